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

#ifndef MINIFAIR_CORE_STRATEGIES_HPP_
#define MINIFAIR_CORE_STRATEGIES_HPP_

#include <cstdint>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include "core/rating_set.hpp"
#include "core/svd.hpp"

namespace minifair {

// Per-item statistics over the known set K. variance is the population
// variance of the item's known ratings, 0 when count <= 1.
struct ItemStats {
  int count = 0;
  double mean = 0.0;
  double variance = 0.0;
};

std::vector<ItemStats> compute_item_stats(const RatingSet& known, int n_items);

// Read-only view handed to every strategy call. Rebuilt by the simulation at
// the start of each sweep and held fixed while the sweep's users are scored.
// model is set only for personalized strategies; candidate (X) is needed by
// greedy-extend's inner trainings.
struct StrategyContext {
  const RatingSet* known = nullptr;
  const RatingSet* candidate = nullptr;
  const SvdModel* model = nullptr;
  std::span<const ItemStats> item_stats;
  std::uint64_t rng_seed = 0;
  double max_rating = 5.0;
  int n_users = 0;
  int n_items = 0;
};

struct ScoredItem {
  ItemId item = 0;
  double score = 0.0;

  friend bool operator==(const ScoredItem&, const ScoredItem&) = default;
};

// Descending by score, ascending item-id on ties, truncated to q entries.
using ScoredList = std::vector<ScoredItem>;

ScoredList top_q(std::vector<ScoredItem> scored, int q);

double item_variance(const StrategyContext& ctx, ItemId i);
int item_popularity(const StrategyContext& ctx, ItemId i);

enum class KnnAggregation { kMax, kMean };

ScoredList select_random(UserId u, int q, const StrategyContext& ctx,
                         std::span<const ItemId> pool);
ScoredList select_popularity(UserId u, int q, const StrategyContext& ctx,
                             std::span<const ItemId> pool);
ScoredList select_variance(UserId u, int q, const StrategyContext& ctx,
                           std::span<const ItemId> pool);
ScoredList select_pop_var(UserId u, int q, const StrategyContext& ctx,
                          std::span<const ItemId> pool);
ScoredList select_max_rating(UserId u, int q, const StrategyContext& ctx,
                             std::span<const ItemId> pool);
ScoredList select_min_rating(UserId u, int q, const StrategyContext& ctx,
                             std::span<const ItemId> pool);
ScoredList select_mixed_rating(UserId u, int q, const StrategyContext& ctx,
                               std::span<const ItemId> pool,
                               bool start_max = true);
ScoredList select_knn(UserId u, int q, const StrategyContext& ctx,
                      std::span<const ItemId> pool,
                      KnnAggregation agg = KnnAggregation::kMax);
ScoredList select_random_personalized(UserId u, int q,
                                      const StrategyContext& ctx,
                                      std::span<const ItemId> pool);

// Scores every pool item as baseline RMSE minus the RMSE after folding the
// item's candidate ratings into K, both trained with hp_cheap on a seed
// derived from ctx.rng_seed (one shared seed, so an item with no candidate
// ratings scores exactly 0). Returns scores parallel to pool_items.
std::vector<double> greedy_extend_scores(const StrategyContext& ctx,
                                         std::span<const ItemId> pool_items,
                                         std::span<const Interaction> validation,
                                         const SvdHyperParams& hp_cheap,
                                         int threads = 1);

ScoredList select_greedy_extend(int q, const StrategyContext& ctx,
                                std::span<const ItemId> pool_items,
                                std::span<const Interaction> validation,
                                const SvdHyperParams& hp_cheap,
                                int threads = 1);

enum class StrategyKind {
  kRandom,
  kPop,
  kVar,
  kPopVar,
  kGreedyExtend,
  kRandomP,
  kMaxRating,
  kMinRating,
  kMixedRating,
  kKnn,
};

std::string_view strategy_name(StrategyKind kind);
StrategyKind strategy_from_name(std::string_view name);
std::span<const StrategyKind> all_strategies();

// Personalized strategies run with a model retrained on K every sweep;
// non-personalized ones never see a model.
bool is_personalized(StrategyKind kind);

struct GreedyExtendOptions {
  int pool_size = 200;
  double validation_fraction = 0.1;
  int min_validation = 100;
  SvdHyperParams cheap{.n_factors = 20, .n_epochs = 5};
  int threads = 1;
};

struct StrategyOptions {
  KnnAggregation knn_aggregation = KnnAggregation::kMax;
  bool mixed_start_max = true;
  GreedyExtendOptions greedy;
};

// Stateful wrapper used by the simulation loop. Stateless strategies just
// forward to the pure select functions; knn keeps an incrementally updated
// item-item Gram matrix and greedy-extend scores its global pool once per
// sweep. The known_* hooks fire after K has been mutated.
class Strategy {
 public:
  virtual ~Strategy() = default;
  virtual StrategyKind kind() const = 0;
  virtual void begin_sweep(const StrategyContext& ctx) { (void)ctx; }
  virtual ScoredList select(UserId u, int q, const StrategyContext& ctx,
                            std::span<const ItemId> pool) = 0;
  virtual void known_added(const RatingSet& known, const Interaction& x) {
    (void)known;
    (void)x;
  }
  virtual void known_removed(const RatingSet& known, const Interaction& x) {
    (void)known;
    (void)x;
  }
};

std::unique_ptr<Strategy> make_strategy(StrategyKind kind,
                                        const StrategyOptions& opts = {});

}  // namespace minifair

#endif  // MINIFAIR_CORE_STRATEGIES_HPP_
