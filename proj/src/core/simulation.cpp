//
// Copyright 2026 The Minifair Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#include "core/simulation.hpp"

#include <algorithm>
#include <cmath>

#include "core/errors.hpp"
#include "core/rng.hpp"

namespace minifair {
namespace {

constexpr std::uint64_t kInitKnownTag = 0x6b696e69;  // "kini"
constexpr std::uint64_t kTrainTag = 0x7472696e;      // "trin"
constexpr std::uint64_t kSweepTag = 0x73776570;      // "swep"
constexpr std::uint64_t kEqTag = 0x65717274;         // "eqrt"

std::uint64_t pair_key(UserId u, ItemId i) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(u)) << 32) |
         static_cast<std::uint32_t>(i);
}

std::pair<RatingSet, RatingSet> split_by_flags(
    const std::vector<Interaction>& entries, const std::vector<char>& pick) {
  RatingSet chosen;
  RatingSet rest;
  for (std::size_t k = 0; k < entries.size(); ++k) {
    if (pick[k])
      chosen.insert(entries[k]);
    else
      rest.insert(entries[k]);
  }
  return {std::move(chosen), std::move(rest)};
}

}  // namespace

void SimulationConfig::validate() const {
  if (query_size < 1) throw InvalidArgumentError("query_size must be >= 1");
  if (!(known_init_fraction > 0.0 && known_init_fraction < 1.0))
    throw InvalidArgumentError("known_init_fraction must be in (0, 1)");
  if (eval_every < 1) throw InvalidArgumentError("eval_every must be >= 1");
  hyperparams.validate();
}

std::pair<RatingSet, RatingSet> init_known(const RatingSet& x, double fraction,
                                           std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0))
    throw InvalidArgumentError("fraction must be in (0, 1)");
  const std::vector<Interaction> entries = x.entries();
  const auto k = static_cast<std::size_t>(
      std::llround(fraction * static_cast<double>(entries.size())));
  SplitMix64 rng(mix64(seed, kInitKnownTag));
  const std::vector<std::size_t> idx = sample_indices(entries.size(), k, rng);
  std::vector<char> pick(entries.size(), 0);
  for (std::size_t j : idx) pick[j] = 1;
  return split_by_flags(entries, pick);
}

std::pair<RatingSet, RatingSet> init_known_stratified(const RatingSet& x,
                                                      const GroupMap& groups,
                                                      double fraction,
                                                      std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0))
    throw InvalidArgumentError("fraction must be in (0, 1)");
  const std::vector<Interaction> entries = x.entries();
  std::vector<std::size_t> prot;
  std::vector<std::size_t> unprot;
  for (std::size_t k = 0; k < entries.size(); ++k) {
    (groups.at(entries[k].user) == Group::kProtected ? prot : unprot)
        .push_back(k);
  }
  const auto total = static_cast<std::size_t>(
      std::llround(fraction * static_cast<double>(entries.size())));
  const std::size_t each =
      std::min({total / 2, prot.size(), unprot.size()});

  SplitMix64 rng(mix64(seed, kInitKnownTag));
  std::vector<char> pick(entries.size(), 0);
  for (std::size_t j : sample_indices(prot.size(), each, rng))
    pick[prot[j]] = 1;
  for (std::size_t j : sample_indices(unprot.size(), each, rng))
    pick[unprot[j]] = 1;
  return split_by_flags(entries, pick);
}

CandidatePools::CandidatePools(const RatingSet& known, int n_users,
                               int n_items) {
  if (n_users < 0 || n_items < 0)
    throw InvalidArgumentError("negative dimensions");
  pools_.resize(static_cast<std::size_t>(n_users));
  for (UserId u = 0; u < n_users; ++u) {
    const std::vector<ItemId> held = known.user_items(u);
    std::vector<ItemId>& pool = pools_[u];
    pool.reserve(static_cast<std::size_t>(n_items) - held.size());
    std::size_t h = 0;
    for (ItemId i = 0; i < n_items; ++i) {
      while (h < held.size() && held[h] < i) ++h;
      if (h < held.size() && held[h] == i) continue;
      pool.push_back(i);
    }
    total_ += pool.size();
  }
}

const std::vector<ItemId>& CandidatePools::pool(UserId u) const {
  if (u < 0 || static_cast<std::size_t>(u) >= pools_.size())
    throw InvalidArgumentError("no pool for user");
  return pools_[u];
}

void CandidatePools::remove(UserId u, std::span<const ItemId> items) {
  if (u < 0 || static_cast<std::size_t>(u) >= pools_.size())
    throw InvalidArgumentError("no pool for user");
  std::vector<ItemId> gone(items.begin(), items.end());
  std::sort(gone.begin(), gone.end());
  std::vector<ItemId>& pool = pools_[u];
  const std::size_t before = pool.size();
  std::size_t g = 0;
  const auto dropped = std::remove_if(pool.begin(), pool.end(), [&](ItemId i) {
    while (g < gone.size() && gone[g] < i) ++g;
    return g < gone.size() && gone[g] == i;
  });
  pool.erase(dropped, pool.end());
  total_ -= before - pool.size();
}

void CandidatePools::insert(UserId u, ItemId item) {
  if (u < 0 || static_cast<std::size_t>(u) >= pools_.size())
    throw InvalidArgumentError("no pool for user");
  std::vector<ItemId>& pool = pools_[u];
  const auto it = std::lower_bound(pool.begin(), pool.end(), item);
  if (it != pool.end() && *it == item) return;
  pool.insert(it, item);
  ++total_;
}

EqualRatioResult equal_ratio_filter(std::span<const Interaction> acquisitions,
                                    const GroupMap& groups,
                                    std::uint64_t seed) {
  std::vector<std::size_t> prot;
  std::vector<std::size_t> unprot;
  for (std::size_t k = 0; k < acquisitions.size(); ++k) {
    (groups.at(acquisitions[k].user) == Group::kProtected ? prot : unprot)
        .push_back(k);
  }
  const std::size_t keep = std::min(prot.size(), unprot.size());

  std::vector<char> kept_flag(acquisitions.size(), 0);
  for (std::size_t k : prot) kept_flag[k] = 1;
  for (std::size_t k : unprot) kept_flag[k] = 1;
  const std::vector<std::size_t>& majority =
      prot.size() > unprot.size() ? prot : unprot;
  if (majority.size() > keep) {
    for (std::size_t k : majority) kept_flag[k] = 0;
    SplitMix64 rng(seed);
    for (std::size_t j : sample_indices(majority.size(), keep, rng))
      kept_flag[majority[j]] = 1;
  }

  EqualRatioResult out;
  for (std::size_t k = 0; k < acquisitions.size(); ++k) {
    (kept_flag[k] ? out.kept : out.discarded).push_back(acquisitions[k]);
  }
  return out;
}

Simulation::Simulation(const Dataset& dataset, const SimulationConfig& cfg)
    : dataset_(&dataset), cfg_(cfg), pools_(RatingSet{}, 0, 0) {
  cfg_.validate();
  cfg_.hyperparams.seed = mix64(cfg.seed, kTrainTag);
  std::tie(known_, candidate_) =
      cfg.equal_ratio
          ? init_known_stratified(dataset.train, dataset.groups,
                                  cfg.known_init_fraction, cfg.seed)
          : init_known(dataset.train, cfg.known_init_fraction, cfg.seed);
  pools_ = CandidatePools(known_, dataset.n_users(), dataset.n_items());
  std::tie(test_protected_, test_unprotected_) =
      group_partition(dataset.test, dataset.groups);
  strategy_ = make_strategy(cfg_.strategy, cfg_.strategy_options);
  conserved_total_ = known_.size() + candidate_.size();
  train();
}

Simulation::Simulation(const Dataset& dataset, const SimulationConfig& cfg,
                       RatingSet known, RatingSet candidate)
    : dataset_(&dataset),
      cfg_(cfg),
      known_(std::move(known)),
      candidate_(std::move(candidate)),
      pools_(known_, dataset.n_users(), dataset.n_items()) {
  cfg_.validate();
  cfg_.hyperparams.seed = mix64(cfg.seed, kTrainTag);
  std::tie(test_protected_, test_unprotected_) =
      group_partition(dataset.test, dataset.groups);
  strategy_ = make_strategy(cfg_.strategy, cfg_.strategy_options);
  conserved_total_ = known_.size() + candidate_.size();
  train();
}

bool Simulation::at_eval_point() const {
  if (iteration_ == 0) return !known_.empty();
  return iteration_ % cfg_.eval_every == 0 || exhausted() ||
         iteration_ == cfg_.max_iterations;
}

void Simulation::train() {
  if (known_.empty()) return;
  if (cfg_.warm_start && model_.has_value()) {
    const std::vector<Interaction> entries = known_.entries();
    model_->run_epochs(entries, cfg_.hyperparams.n_epochs);
    return;
  }
  model_ = SvdModel::fit(known_, dataset_->n_users(), dataset_->n_items(),
                         cfg_.hyperparams);
}

std::vector<Interaction> Simulation::step() {
  if (exhausted()) throw ExhaustedError("all candidate pools are empty");
  ++iteration_;

  const std::vector<ItemStats> stats =
      compute_item_stats(known_, dataset_->n_items());
  StrategyContext ctx;
  ctx.known = &known_;
  ctx.candidate = &candidate_;
  ctx.model = is_personalized(cfg_.strategy) && model_.has_value()
                  ? &*model_
                  : nullptr;
  ctx.item_stats = stats;
  ctx.rng_seed = mix64(cfg_.seed, kSweepTag,
                       static_cast<std::uint64_t>(iteration_));
  ctx.max_rating = cfg_.hyperparams.rating_max;
  ctx.n_users = dataset_->n_users();
  ctx.n_items = dataset_->n_items();

  strategy_->begin_sweep(ctx);

  std::vector<Interaction> acquired;
  std::vector<ItemId> queried_items;
  for (UserId u = 0; u < dataset_->n_users(); ++u) {
    const std::vector<ItemId>& pool = pools_.pool(u);
    if (pool.empty()) continue;
    const ScoredList list = strategy_->select(u, cfg_.query_size, ctx, pool);

    if (cfg_.validate_invariants) {
      if (list.size() > static_cast<std::size_t>(cfg_.query_size))
        throw Error("invariant: |L| > q");
      std::vector<ItemId> ids;
      for (const ScoredItem& s : list) ids.push_back(s.item);
      std::vector<ItemId> uniq = ids;
      std::sort(uniq.begin(), uniq.end());
      if (std::adjacent_find(uniq.begin(), uniq.end()) != uniq.end())
        throw Error("invariant: duplicate item in L");
      for (ItemId i : uniq)
        if (!std::binary_search(pool.begin(), pool.end(), i))
          throw Error("invariant: L not a subset of the pool");
      if (cfg_.strategy != StrategyKind::kMixedRating) {
        for (std::size_t k = 1; k < list.size(); ++k)
          if (list[k - 1].score < list[k].score)
            throw Error("invariant: scores not non-increasing");
      }
      for (ItemId i : ids) {
        const std::uint64_t key = pair_key(u, i);
        if (!queried_.insert(key).second) {
          if (!(cfg_.equal_ratio && repooled_.erase(key) == 1))
            throw Error("invariant: item queried twice");
        }
      }
    }

    queried_items.clear();
    for (const ScoredItem& s : list) {
      queried_items.push_back(s.item);
      if (candidate_.contains(u, s.item)) {
        const Interaction x = candidate_.remove(u, s.item);
        known_.insert(x);
        strategy_->known_added(known_, x);
        acquired.push_back(x);
      }
    }
    pools_.remove(u, queried_items);
  }

  std::vector<Interaction> kept = std::move(acquired);
  if (cfg_.equal_ratio) {
    EqualRatioResult filtered = equal_ratio_filter(
        kept, dataset_->groups,
        mix64(cfg_.seed, kEqTag, static_cast<std::uint64_t>(iteration_)));
    for (const Interaction& x : filtered.discarded) {
      known_.remove(x.user, x.item);
      candidate_.insert(x);
      pools_.insert(x.user, x.item);
      strategy_->known_removed(known_, x);
      if (cfg_.validate_invariants) repooled_.insert(pair_key(x.user, x.item));
    }
    kept = std::move(filtered.kept);
  }

  for (const Interaction& x : kept) {
    if (dataset_->groups.at(x.user) == Group::kProtected)
      ++window_acq_protected_;
    else
      ++window_acq_unprotected_;
  }

  if (is_personalized(cfg_.strategy) || at_eval_point()) train();
  if (cfg_.validate_invariants) check_invariants();
  return kept;
}

TracePoint Simulation::evaluate() {
  if (!model_.has_value())
    throw EmptyTrainingSetError("cannot evaluate before the first training");
  TracePoint p;
  p.iteration = iteration_;
  p.n_known = static_cast<std::int64_t>(known_.size());
  p.acq_protected = window_acq_protected_;
  p.acq_unprotected = window_acq_unprotected_;
  window_acq_protected_ = 0;
  window_acq_unprotected_ = 0;
  p.rmse_all = model_->rmse(dataset_->test);
  const GroupReport g = group_report(*model_, test_protected_,
                                     test_unprotected_, cfg_.t_test_unit);
  p.rmse_protected = g.rmse_protected;
  p.rmse_unprotected = g.rmse_unprotected;
  p.rmse_diff = g.rmse_diff;
  p.t_stat = g.t_statistic;
  p.p_value = g.p_value;
  return p;
}

void Simulation::check_invariants() const {
  if (known_.size() + candidate_.size() != conserved_total_)
    throw Error("invariant: |K| + |X| not conserved");
  known_.for_each([&](const Interaction& x) {
    if (candidate_.contains(x.user, x.item))
      throw Error("invariant: K and X overlap");
    if (dataset_->test.contains(x.user, x.item))
      throw Error("invariant: K overlaps the test set");
  });
  candidate_.for_each([&](const Interaction& x) {
    if (dataset_->test.contains(x.user, x.item))
      throw Error("invariant: X overlaps the test set");
  });
}

SimulationTrace Simulation::run(const ProgressFn& progress) {
  SimulationTrace trace;
  if (iteration_ == 0 && model_.has_value()) trace.push_back(evaluate());
  while (!exhausted() &&
         (cfg_.max_iterations < 0 || iteration_ < cfg_.max_iterations)) {
    step();
    if (at_eval_point() && model_.has_value()) trace.push_back(evaluate());
    if (progress) progress(iteration_, known_.size(), pools_.total_size());
  }
  return trace;
}

SimulationTrace run_simulation(const Dataset& dataset,
                               const SimulationConfig& cfg,
                               const ProgressFn& progress) {
  Simulation sim(dataset, cfg);
  return sim.run(progress);
}

}  // namespace minifair
