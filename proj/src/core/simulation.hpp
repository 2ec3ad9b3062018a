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

#ifndef MINIFAIR_CORE_SIMULATION_HPP_
#define MINIFAIR_CORE_SIMULATION_HPP_

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <unordered_set>
#include <utility>
#include <vector>

#include "core/ingest.hpp"
#include "core/metrics.hpp"
#include "core/rating_set.hpp"
#include "core/strategies.hpp"
#include "core/svd.hpp"

namespace minifair {

struct SimulationConfig {
  StrategyKind strategy = StrategyKind::kRandom;
  int query_size = 10;
  double known_init_fraction = 0.002;
  // < 0: run until every pool is empty. Equal-ratio runs should set a bound:
  // once one group's candidates are exhausted, every further acquisition is
  // discarded back into the pools and the run never drains on its own.
  int max_iterations = -1;
  int eval_every = 1;
  bool equal_ratio = false;
  // Continue SGD on the previous sweep's model instead of refitting from
  // scratch. Couples iterations; off for all reported results.
  bool warm_start = false;
  std::uint64_t seed = 0;
  SvdHyperParams hyperparams;
  StrategyOptions strategy_options;
  TTestUnit t_test_unit = TTestUnit::kPerRating;
  // Re-checks disjointness, conservation and the no-repeat guarantee after
  // every sweep. Meant for tests; quadratic-ish bookkeeping on big runs.
  bool validate_invariants = false;

  void validate() const;
};

// Uniform sample of round(fraction * |x|) entries forms K; the rest stays in
// the candidate set. Same seed, same K.
std::pair<RatingSet, RatingSet> init_known(const RatingSet& x, double fraction,
                                           std::uint64_t seed);

// Equal-ratio variant: the same total budget, drawn half from each group's
// entries (capped by the smaller group, so the two halves stay equal).
std::pair<RatingSet, RatingSet> init_known_stratified(const RatingSet& x,
                                                      const GroupMap& groups,
                                                      double fraction,
                                                      std::uint64_t seed);

// Per-user candidate item pools I_u = all items minus the user's known items.
class CandidatePools {
 public:
  CandidatePools(const RatingSet& known, int n_users, int n_items);

  const std::vector<ItemId>& pool(UserId u) const;
  void remove(UserId u, std::span<const ItemId> items);
  void insert(UserId u, ItemId item);
  bool all_empty() const { return total_ == 0; }
  std::size_t total_size() const { return total_; }
  int n_users() const { return static_cast<int>(pools_.size()); }

 private:
  std::vector<std::vector<ItemId>> pools_;
  std::size_t total_ = 0;
};

struct EqualRatioResult {
  std::vector<Interaction> kept;
  std::vector<Interaction> discarded;
};

// Subsamples the majority group's acquisitions down to the minority count.
// Discarded ratings are meant to go back to the candidate set and pools.
EqualRatioResult equal_ratio_filter(std::span<const Interaction> acquisitions,
                                    const GroupMap& groups,
                                    std::uint64_t seed);

using ProgressFn = std::function<void(int iteration, std::size_t n_known,
                                      std::size_t pool_remaining)>;

// The acquire/retrain/evaluate loop. Each sweep visits users in ascending id
// order; the strategy context (model, item stats) is a sweep-start snapshot
// while K itself mutates as acquisitions land. One model training per sweep
// at most: always for personalized strategies, otherwise only when the sweep
// ends at an evaluation point.
class Simulation {
 public:
  Simulation(const Dataset& dataset, const SimulationConfig& cfg);
  // Test hook: start from a hand-built known/candidate state instead of
  // sampling the initial K.
  Simulation(const Dataset& dataset, const SimulationConfig& cfg,
             RatingSet known, RatingSet candidate);

  // One full sweep (plus the equal-ratio filter when enabled). Returns the
  // net acquisitions. Throws ExhaustedError when every pool is already empty.
  std::vector<Interaction> step();

  // Trace point for the current state; resets the acquisition window
  // counters. Valid right after construction or a step that trained.
  TracePoint evaluate();

  SimulationTrace run(const ProgressFn& progress = nullptr);

  const RatingSet& known() const { return known_; }
  const RatingSet& candidate() const { return candidate_; }
  const CandidatePools& pools() const { return pools_; }
  int iteration() const { return iteration_; }
  bool exhausted() const { return pools_.all_empty(); }
  bool at_eval_point() const;
  const SvdModel* model() const {
    return model_.has_value() ? &*model_ : nullptr;
  }

 private:
  void train();
  void check_invariants() const;

  const Dataset* dataset_;
  SimulationConfig cfg_;
  RatingSet known_;
  RatingSet candidate_;
  CandidatePools pools_;
  RatingSet test_protected_;
  RatingSet test_unprotected_;
  std::unique_ptr<Strategy> strategy_;
  std::optional<SvdModel> model_;
  int iteration_ = 0;
  std::int64_t window_acq_protected_ = 0;
  std::int64_t window_acq_unprotected_ = 0;
  std::size_t conserved_total_ = 0;
  std::unordered_set<std::uint64_t> queried_;
  std::unordered_set<std::uint64_t> repooled_;
};

SimulationTrace run_simulation(const Dataset& dataset,
                               const SimulationConfig& cfg,
                               const ProgressFn& progress = nullptr);

}  // namespace minifair

#endif  // MINIFAIR_CORE_SIMULATION_HPP_
