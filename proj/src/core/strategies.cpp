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

#include "core/strategies.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <mutex>
#include <thread>
#include <unordered_set>

#include "core/errors.hpp"
#include "core/rng.hpp"

namespace minifair {
namespace {

constexpr std::uint64_t kRandTag = 0x72616e64;     // "rand"
constexpr std::uint64_t kGeTrainTag = 0x67657472;  // "getr"
constexpr std::uint64_t kGeValTag = 0x6765766c;    // "gevl"

bool scored_less(const ScoredItem& a, const ScoredItem& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.item < b.item;
}

const SvdModel& require_model(const StrategyContext& ctx) {
  if (ctx.model == nullptr)
    throw MissingModelError("strategy requires a trained model");
  return *ctx.model;
}

const RatingSet& require_known(const StrategyContext& ctx) {
  if (ctx.known == nullptr)
    throw InvalidArgumentError("strategy context has no known set");
  return *ctx.known;
}

}  // namespace

std::vector<ItemStats> compute_item_stats(const RatingSet& known,
                                          int n_items) {
  if (n_items < 0) throw InvalidArgumentError("n_items must be >= 0");
  std::vector<ItemStats> stats(static_cast<std::size_t>(n_items));
  for (int i = 0; i < n_items; ++i) {
    const auto col = known.item_ratings(i);
    ItemStats& s = stats[i];
    s.count = static_cast<int>(col.size());
    if (s.count == 0) continue;
    double sum = 0.0;
    for (const auto& [user, r] : col) sum += r;
    s.mean = sum / s.count;
    if (s.count <= 1) continue;
    double ss = 0.0;
    for (const auto& [user, r] : col) {
      const double d = r - s.mean;
      ss += d * d;
    }
    s.variance = ss / s.count;
  }
  return stats;
}

ScoredList top_q(std::vector<ScoredItem> scored, int q) {
  if (q < 0) throw InvalidArgumentError("q must be >= 0");
  const std::size_t k =
      std::min(scored.size(), static_cast<std::size_t>(q));
  std::partial_sort(scored.begin(), scored.begin() + k, scored.end(),
                    scored_less);
  scored.resize(k);
  return scored;
}

double item_variance(const StrategyContext& ctx, ItemId i) {
  if (i < 0 || static_cast<std::size_t>(i) >= ctx.item_stats.size()) return 0.0;
  return ctx.item_stats[i].variance;
}

int item_popularity(const StrategyContext& ctx, ItemId i) {
  if (i < 0 || static_cast<std::size_t>(i) >= ctx.item_stats.size()) return 0;
  return ctx.item_stats[i].count;
}

ScoredList select_random(UserId u, int q, const StrategyContext& ctx,
                         std::span<const ItemId> pool) {
  SplitMix64 rng(mix64(ctx.rng_seed, kRandTag, static_cast<std::uint64_t>(u)));
  std::vector<ScoredItem> scored;
  scored.reserve(pool.size());
  for (ItemId i : pool) scored.push_back({i, next_unit(rng)});
  return top_q(std::move(scored), q);
}

ScoredList select_random_personalized(UserId u, int q,
                                      const StrategyContext& ctx,
                                      std::span<const ItemId> pool) {
  return select_random(u, q, ctx, pool);
}

ScoredList select_popularity(UserId /*u*/, int q, const StrategyContext& ctx,
                             std::span<const ItemId> pool) {
  std::vector<ScoredItem> scored;
  scored.reserve(pool.size());
  for (ItemId i : pool)
    scored.push_back({i, static_cast<double>(item_popularity(ctx, i))});
  return top_q(std::move(scored), q);
}

ScoredList select_variance(UserId /*u*/, int q, const StrategyContext& ctx,
                           std::span<const ItemId> pool) {
  std::vector<ScoredItem> scored;
  scored.reserve(pool.size());
  for (ItemId i : pool) scored.push_back({i, item_variance(ctx, i)});
  return top_q(std::move(scored), q);
}

ScoredList select_pop_var(UserId /*u*/, int q, const StrategyContext& ctx,
                          std::span<const ItemId> pool) {
  std::vector<ScoredItem> scored;
  scored.reserve(pool.size());
  for (ItemId i : pool) {
    const double s =
        std::log(1.0 + item_popularity(ctx, i)) * item_variance(ctx, i);
    scored.push_back({i, s});
  }
  return top_q(std::move(scored), q);
}

ScoredList select_max_rating(UserId u, int q, const StrategyContext& ctx,
                             std::span<const ItemId> pool) {
  const SvdModel& model = require_model(ctx);
  std::vector<ScoredItem> scored;
  scored.reserve(pool.size());
  for (ItemId i : pool) scored.push_back({i, model.predict(u, i)});
  return top_q(std::move(scored), q);
}

ScoredList select_min_rating(UserId u, int q, const StrategyContext& ctx,
                             std::span<const ItemId> pool) {
  const SvdModel& model = require_model(ctx);
  std::vector<ScoredItem> scored;
  scored.reserve(pool.size());
  for (ItemId i : pool)
    scored.push_back({i, ctx.max_rating - model.predict(u, i)});
  return top_q(std::move(scored), q);
}

ScoredList select_mixed_rating(UserId u, int q, const StrategyContext& ctx,
                               std::span<const ItemId> pool, bool start_max) {
  const SvdModel& model = require_model(ctx);
  if (q < 0) throw InvalidArgumentError("q must be >= 0");

  std::vector<ScoredItem> preds;
  preds.reserve(pool.size());
  for (ItemId i : pool) preds.push_back({i, model.predict(u, i)});

  std::vector<ScoredItem> hi = preds;
  std::sort(hi.begin(), hi.end(), scored_less);
  std::vector<ScoredItem> lo = std::move(preds);
  std::sort(lo.begin(), lo.end(), [](const ScoredItem& a, const ScoredItem& b) {
    if (a.score != b.score) return a.score < b.score;
    return a.item < b.item;
  });

  // Alternate between the two rankings, skipping already chosen items. The
  // reported score is the predicted rating, so this list is deliberately not
  // score-sorted.
  ScoredList out;
  std::unordered_set<ItemId> taken;
  std::size_t hc = 0;
  std::size_t lc = 0;
  bool from_hi = start_max;
  while (out.size() < static_cast<std::size_t>(q) && taken.size() < lo.size()) {
    std::vector<ScoredItem>& order = from_hi ? hi : lo;
    std::size_t& cursor = from_hi ? hc : lc;
    while (taken.count(order[cursor].item) != 0) ++cursor;
    out.push_back(order[cursor]);
    taken.insert(order[cursor].item);
    from_hi = !from_hi;
  }
  return out;
}

namespace {

double known_cosine(const RatingSet& known, ItemId a, ItemId b) {
  const auto va = known.item_ratings(a);
  const auto vb = known.item_ratings(b);
  double na = 0.0;
  for (const auto& [user, r] : va) na += r * r;
  double nb = 0.0;
  for (const auto& [user, r] : vb) nb += r * r;
  if (na == 0.0 || nb == 0.0) return 0.0;
  double dot = 0.0;
  std::size_t ia = 0;
  std::size_t ib = 0;
  while (ia < va.size() && ib < vb.size()) {
    if (va[ia].first < vb[ib].first) {
      ++ia;
    } else if (vb[ib].first < va[ia].first) {
      ++ib;
    } else {
      dot += va[ia].second * vb[ib].second;
      ++ia;
      ++ib;
    }
  }
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

}  // namespace

ScoredList select_knn(UserId u, int q, const StrategyContext& ctx,
                      std::span<const ItemId> pool, KnnAggregation agg) {
  const RatingSet& known = require_known(ctx);
  const std::vector<ItemId> ku = known.user_items(u);
  std::vector<ScoredItem> scored;
  scored.reserve(pool.size());
  for (ItemId i : pool) {
    double best = 0.0;
    double sum = 0.0;
    for (ItemId j : ku) {
      const double c = known_cosine(known, i, j);
      best = std::max(best, c);
      sum += c;
    }
    const double s = ku.empty()            ? 0.0
                     : agg == KnnAggregation::kMax
                         ? best
                         : sum / static_cast<double>(ku.size());
    scored.push_back({i, s});
  }
  return top_q(std::move(scored), q);
}

std::vector<double> greedy_extend_scores(const StrategyContext& ctx,
                                         std::span<const ItemId> pool_items,
                                         std::span<const Interaction> validation,
                                         const SvdHyperParams& hp_cheap,
                                         int threads) {
  if (validation.empty())
    throw EmptyValidationSetError("greedy-extend needs a validation set");
  const RatingSet& known = require_known(ctx);
  if (ctx.candidate == nullptr)
    throw InvalidArgumentError("greedy-extend needs the candidate set");

  SvdHyperParams hp = hp_cheap;
  hp.seed = mix64(ctx.rng_seed, kGeTrainTag);

  const std::vector<Interaction> base = known.entries();
  const SvdModel base_model =
      SvdModel::fit(base, ctx.n_users, ctx.n_items, hp);
  const double base_rmse = base_model.rmse(validation);

  std::vector<double> scores(pool_items.size(), 0.0);
  std::atomic<std::size_t> next{0};
  std::mutex err_mutex;
  std::exception_ptr err;

  auto worker = [&]() {
    try {
      for (std::size_t k = next.fetch_add(1); k < pool_items.size();
           k = next.fetch_add(1)) {
        const ItemId i = pool_items[k];
        const auto xi = ctx.candidate->item_ratings(i);
        if (xi.empty()) continue;  // K unchanged, same seed: score stays 0
        std::vector<Interaction> train = base;
        train.reserve(base.size() + xi.size());
        for (const auto& [user, r] : xi)
          train.push_back({user, i, r, 0});
        const SvdModel m = SvdModel::fit(train, ctx.n_users, ctx.n_items, hp);
        scores[k] = base_rmse - m.rmse(validation);
      }
    } catch (...) {
      const std::scoped_lock lock(err_mutex);
      if (!err) err = std::current_exception();
    }
  };

  const int n_threads = std::clamp(
      threads, 1, static_cast<int>(std::max<std::size_t>(pool_items.size(), 1)));
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }
  if (err) std::rethrow_exception(err);
  return scores;
}

ScoredList select_greedy_extend(int q, const StrategyContext& ctx,
                                std::span<const ItemId> pool_items,
                                std::span<const Interaction> validation,
                                const SvdHyperParams& hp_cheap, int threads) {
  const std::vector<double> scores =
      greedy_extend_scores(ctx, pool_items, validation, hp_cheap, threads);
  std::vector<ScoredItem> scored;
  scored.reserve(pool_items.size());
  for (std::size_t k = 0; k < pool_items.size(); ++k)
    scored.push_back({pool_items[k], scores[k]});
  return top_q(std::move(scored), q);
}

namespace {

constexpr std::array<StrategyKind, 10> kAllStrategies = {
    StrategyKind::kRandom,      StrategyKind::kPop,
    StrategyKind::kVar,         StrategyKind::kPopVar,
    StrategyKind::kGreedyExtend, StrategyKind::kRandomP,
    StrategyKind::kMaxRating,   StrategyKind::kMinRating,
    StrategyKind::kMixedRating, StrategyKind::kKnn,
};

constexpr std::array<std::string_view, 10> kStrategyNames = {
    "random",     "pop",        "var",          "pop-var", "greedy-extend",
    "random-p",   "max-rating", "min-rating",   "mixed-rating", "knn",
};

}  // namespace

std::string_view strategy_name(StrategyKind kind) {
  return kStrategyNames[static_cast<std::size_t>(kind)];
}

StrategyKind strategy_from_name(std::string_view name) {
  for (std::size_t k = 0; k < kStrategyNames.size(); ++k)
    if (kStrategyNames[k] == name) return kAllStrategies[k];
  throw InvalidArgumentError("unknown strategy: " + std::string(name));
}

std::span<const StrategyKind> all_strategies() { return kAllStrategies; }

bool is_personalized(StrategyKind kind) {
  switch (kind) {
    case StrategyKind::kRandom:
    case StrategyKind::kPop:
    case StrategyKind::kVar:
    case StrategyKind::kPopVar:
    case StrategyKind::kGreedyExtend:
      return false;
    case StrategyKind::kRandomP:
    case StrategyKind::kMaxRating:
    case StrategyKind::kMinRating:
    case StrategyKind::kMixedRating:
    case StrategyKind::kKnn:
      return true;
  }
  throw InvalidArgumentError("unknown strategy kind");
}

namespace {

class SimpleStrategy final : public Strategy {
 public:
  SimpleStrategy(StrategyKind kind, StrategyOptions opts)
      : kind_(kind), opts_(opts) {}

  StrategyKind kind() const override { return kind_; }

  ScoredList select(UserId u, int q, const StrategyContext& ctx,
                    std::span<const ItemId> pool) override {
    switch (kind_) {
      case StrategyKind::kRandom:
        return select_random(u, q, ctx, pool);
      case StrategyKind::kRandomP:
        return select_random_personalized(u, q, ctx, pool);
      case StrategyKind::kPop:
        return select_popularity(u, q, ctx, pool);
      case StrategyKind::kVar:
        return select_variance(u, q, ctx, pool);
      case StrategyKind::kPopVar:
        return select_pop_var(u, q, ctx, pool);
      case StrategyKind::kMaxRating:
        return select_max_rating(u, q, ctx, pool);
      case StrategyKind::kMinRating:
        return select_min_rating(u, q, ctx, pool);
      case StrategyKind::kMixedRating:
        return select_mixed_rating(u, q, ctx, pool, opts_.mixed_start_max);
      default:
        throw InvalidArgumentError("strategy kind not handled here");
    }
  }

 private:
  StrategyKind kind_;
  StrategyOptions opts_;
};

// Keeps the item-item Gram matrix of K up to date across acquisitions so a
// sweep costs |pool|*|K_u| lookups instead of recomputing cosines from raw
// columns. Entries are exact for integer-valued ratings, so scores match
// select_knn bitwise on MovieLens data.
class KnnStrategy final : public Strategy {
 public:
  explicit KnnStrategy(KnnAggregation agg) : agg_(agg) {}

  StrategyKind kind() const override { return StrategyKind::kKnn; }

  void begin_sweep(const StrategyContext& ctx) override {
    const RatingSet& known = require_known(ctx);
    if (!built_ || n_items_ != ctx.n_items || tracked_ != known.size())
      rebuild(known, ctx.n_items);
  }

  // Walks one Gram row per known item instead of gathering one column entry
  // per (pool item, known item) pair; the j-ascending accumulation per pool
  // item and the dot/(norm_i*norm_j) form are kept identical to select_knn,
  // so both paths agree bitwise on integer ratings.
  ScoredList select(UserId u, int q, const StrategyContext& ctx,
                    std::span<const ItemId> pool) override {
    const RatingSet& known = require_known(ctx);
    if (!built_) rebuild(known, ctx.n_items);
    const std::vector<ItemId> ku = known.user_items(u);

    std::vector<ScoredItem> scored;
    scored.reserve(pool.size());
    if (ku.empty() || pool.empty()) {
      for (ItemId i : pool) scored.push_back({i, 0.0});
      return top_q(std::move(scored), q);
    }

    norm_i_.resize(pool.size());
    best_.assign(pool.size(), 0.0);
    sum_.assign(pool.size(), 0.0);
    for (std::size_t k = 0; k < pool.size(); ++k)
      norm_i_[k] = std::sqrt(at(pool[k], pool[k]));

    for (ItemId j : ku) {
      const double norm_j = std::sqrt(at(j, j));
      if (norm_j == 0.0) continue;
      const double* row = &gram_[static_cast<std::size_t>(j) * n_items_];
      for (std::size_t k = 0; k < pool.size(); ++k) {
        if (norm_i_[k] == 0.0) continue;
        const double c = row[pool[k]] / (norm_i_[k] * norm_j);
        best_[k] = std::max(best_[k], c);
        sum_[k] += c;
      }
    }

    const double denom = static_cast<double>(ku.size());
    for (std::size_t k = 0; k < pool.size(); ++k) {
      const double s =
          agg_ == KnnAggregation::kMax ? best_[k] : sum_[k] / denom;
      scored.push_back({pool[k], s});
    }
    return top_q(std::move(scored), q);
  }

  void known_added(const RatingSet& known, const Interaction& x) override {
    if (!built_) return;
    apply(known, x, 1.0);
    ++tracked_;
  }

  void known_removed(const RatingSet& known, const Interaction& x) override {
    if (!built_) return;
    apply(known, x, -1.0);
    --tracked_;
  }

 private:
  double& cell(ItemId a, ItemId b) {
    return gram_[static_cast<std::size_t>(a) * n_items_ + b];
  }
  double at(ItemId a, ItemId b) const {
    return gram_[static_cast<std::size_t>(a) * n_items_ + b];
  }

  void rebuild(const RatingSet& known, int n_items) {
    n_items_ = n_items;
    gram_.assign(static_cast<std::size_t>(n_items) * n_items, 0.0);
    for (UserId u : known.users()) {
      const std::vector<Interaction> row = known.user_entries(u);
      for (std::size_t a = 0; a < row.size(); ++a) {
        cell(row[a].item, row[a].item) += row[a].rating * row[a].rating;
        for (std::size_t b = a + 1; b < row.size(); ++b) {
          const double w = row[a].rating * row[b].rating;
          cell(row[a].item, row[b].item) += w;
          cell(row[b].item, row[a].item) += w;
        }
      }
    }
    tracked_ = known.size();
    built_ = true;
  }

  // `known` already reflects the mutation: the added entry is present, the
  // removed one is gone, so the self term is handled outside the loop.
  void apply(const RatingSet& known, const Interaction& x, double sign) {
    for (const Interaction& e : known.user_entries(x.user)) {
      if (e.item == x.item) continue;
      const double w = sign * x.rating * e.rating;
      cell(x.item, e.item) += w;
      cell(e.item, x.item) += w;
    }
    cell(x.item, x.item) += sign * x.rating * x.rating;
  }

  KnnAggregation agg_;
  bool built_ = false;
  int n_items_ = 0;
  std::size_t tracked_ = 0;
  std::vector<double> gram_;
  // Per-select scratch, kept allocated across calls.
  std::vector<double> norm_i_, best_, sum_;
};

class GreedyExtendStrategy final : public Strategy {
 public:
  explicit GreedyExtendStrategy(GreedyExtendOptions opts) : opts_(opts) {}

  StrategyKind kind() const override { return StrategyKind::kGreedyExtend; }

  void begin_sweep(const StrategyContext& ctx) override {
    require_known(ctx);
    if (ctx.candidate == nullptr)
      throw InvalidArgumentError("greedy-extend needs the candidate set");

    score_by_item_.assign(static_cast<std::size_t>(ctx.n_items), 0.0);

    const std::vector<ItemId> pool = build_pool(*ctx.candidate);
    if (pool.empty()) return;
    const std::vector<Interaction> val = build_validation(ctx);
    const std::vector<double> scores = greedy_extend_scores(
        ctx, pool, val, opts_.cheap, opts_.threads);
    for (std::size_t k = 0; k < pool.size(); ++k)
      score_by_item_[pool[k]] = scores[k];
  }

  // Items outside the scored pool keep score 0, so every user still drains
  // q items from their pool each sweep and the run terminates.
  ScoredList select(UserId /*u*/, int q, const StrategyContext& /*ctx*/,
                    std::span<const ItemId> pool) override {
    std::vector<ScoredItem> scored;
    scored.reserve(pool.size());
    for (ItemId i : pool) {
      const double s = static_cast<std::size_t>(i) < score_by_item_.size()
                           ? score_by_item_[i]
                           : 0.0;
      scored.push_back({i, s});
    }
    return top_q(std::move(scored), q);
  }

 private:
  std::vector<ItemId> build_pool(const RatingSet& candidate) const {
    std::vector<ScoredItem> by_pop;
    for (ItemId i : candidate.items())
      by_pop.push_back({i, static_cast<double>(candidate.item_degree(i))});
    const ScoredList top = top_q(std::move(by_pop),
                                 std::max(opts_.pool_size, 0));
    std::vector<ItemId> pool;
    pool.reserve(top.size());
    for (const ScoredItem& s : top) pool.push_back(s.item);
    return pool;
  }

  std::vector<Interaction> build_validation(const StrategyContext& ctx) const {
    std::vector<Interaction> source = ctx.known->entries();
    std::size_t want = 0;
    if (source.size() >= static_cast<std::size_t>(opts_.min_validation)) {
      const auto frac = static_cast<std::size_t>(std::llround(
          opts_.validation_fraction * static_cast<double>(source.size())));
      want = std::min(source.size(),
                      std::max(frac,
                               static_cast<std::size_t>(opts_.min_validation)));
    } else {
      // K alone is too small; draw from the whole training split instead.
      const std::vector<Interaction> extra = ctx.candidate->entries();
      source.insert(source.end(), extra.begin(), extra.end());
      std::sort(source.begin(), source.end(),
                [](const Interaction& a, const Interaction& b) {
                  if (a.user != b.user) return a.user < b.user;
                  return a.item < b.item;
                });
      want = std::min(source.size(),
                      static_cast<std::size_t>(opts_.min_validation));
    }
    SplitMix64 rng(mix64(ctx.rng_seed, kGeValTag));
    const std::vector<std::size_t> idx = sample_indices(source.size(), want, rng);
    std::vector<Interaction> val;
    val.reserve(idx.size());
    for (std::size_t k : idx) val.push_back(source[k]);
    std::sort(val.begin(), val.end(),
              [](const Interaction& a, const Interaction& b) {
                if (a.user != b.user) return a.user < b.user;
                return a.item < b.item;
              });
    return val;
  }

  GreedyExtendOptions opts_;
  std::vector<double> score_by_item_;
};

}  // namespace

std::unique_ptr<Strategy> make_strategy(StrategyKind kind,
                                        const StrategyOptions& opts) {
  switch (kind) {
    case StrategyKind::kKnn:
      return std::make_unique<KnnStrategy>(opts.knn_aggregation);
    case StrategyKind::kGreedyExtend:
      return std::make_unique<GreedyExtendStrategy>(opts.greedy);
    default:
      return std::make_unique<SimpleStrategy>(kind, opts);
  }
}

}  // namespace minifair
