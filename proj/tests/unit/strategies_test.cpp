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
#include <optional>
#include <set>
#include <vector>

#include "core/errors.hpp"
#include "core/rng.hpp"
#include "core/svd.hpp"
#include "doctest.h"
#include "support/test_data.hpp"

namespace minifair {
namespace {

using testing::ix;
using testing::make_set;

// Owns everything a StrategyContext points into.
struct World {
  RatingSet known;
  RatingSet candidate;
  std::vector<ItemStats> stats;
  std::optional<SvdModel> model;
  int n_users = 0;
  int n_items = 0;

  StrategyContext ctx(std::uint64_t seed = 1,
                      bool with_model = false) const {
    StrategyContext c;
    c.known = &known;
    c.candidate = &candidate;
    c.model = with_model && model ? &*model : nullptr;
    c.item_stats = stats;
    c.rng_seed = seed;
    c.n_users = n_users;
    c.n_items = n_items;
    return c;
  }
};

World make_world(RatingSet known, RatingSet candidate, int n_users,
                 int n_items, bool train = false) {
  World w;
  w.known = std::move(known);
  w.candidate = std::move(candidate);
  w.n_users = n_users;
  w.n_items = n_items;
  w.stats = compute_item_stats(w.known, n_items);
  if (train && !w.known.empty()) {
    SvdHyperParams hp;
    hp.n_factors = 2;
    hp.n_epochs = 3;
    hp.seed = 9;
    w.model = SvdModel::fit(w.known, n_users, n_items, hp);
  }
  return w;
}

std::vector<ItemId> items_of(const ScoredList& l) {
  std::vector<ItemId> out;
  for (const ScoredItem& s : l) out.push_back(s.item);
  return out;
}

TEST_CASE("item stats use the population variance") {
  const RatingSet known = make_set(
      {ix(0, 0, 1), ix(1, 0, 5), ix(2, 0, 3), ix(0, 1, 4), ix(1, 2, 4),
       ix(2, 2, 4), ix(0, 3, 2), ix(1, 3, 2)});
  const std::vector<ItemStats> s = compute_item_stats(known, 5);
  REQUIRE(s.size() == 5);
  CHECK(s[0].count == 3);
  CHECK(s[0].mean == 3.0);
  CHECK(s[0].variance == doctest::Approx(8.0 / 3.0).epsilon(1e-15));
  CHECK(s[1].count == 1);
  CHECK(s[1].variance == 0.0);  // single rating
  CHECK(s[2].count == 2);
  CHECK(s[2].variance == 0.0);  // identical ratings
  CHECK(s[3].count == 2);
  CHECK(s[3].variance == 0.0);
  CHECK(s[4].count == 0);
  CHECK(s[4].mean == 0.0);
  CHECK(compute_item_stats(RatingSet{}, 3)[1].count == 0);
  CHECK_THROWS_AS(compute_item_stats(known, -1), InvalidArgumentError);
}

TEST_CASE("top_q orders by score then ascending item id") {
  const std::vector<ScoredItem> scored{
      {5, 1.0}, {2, 3.0}, {7, 3.0}, {1, 0.5}};
  const ScoredList top3 = top_q(scored, 3);
  CHECK(top3 == ScoredList{{2, 3.0}, {7, 3.0}, {5, 1.0}});
  const ScoredList all = top_q(scored, 10);
  CHECK(all == ScoredList{{2, 3.0}, {7, 3.0}, {5, 1.0}, {1, 0.5}});
  CHECK(top_q(scored, 0).empty());
  CHECK_THROWS_AS(top_q(scored, -1), InvalidArgumentError);
}

TEST_CASE("popularity and variance strategies rank by item stats") {
  // item 0: three ratings, var 8/3; item 1: two ratings {1,5}, var 4;
  // item 2: one rating; item 3: unrated.
  const World w = make_world(
      make_set({ix(0, 0, 1), ix(1, 0, 5), ix(2, 0, 3), ix(0, 1, 1),
                ix(1, 1, 5), ix(2, 2, 4)}),
      RatingSet{}, 3, 4);
  const StrategyContext ctx = w.ctx();
  const std::vector<ItemId> pool{0, 1, 2, 3};

  const ScoredList pop = select_popularity(7, 4, ctx, pool);
  CHECK(pop == ScoredList{{0, 3.0}, {1, 2.0}, {2, 1.0}, {3, 0.0}});

  const ScoredList var = select_variance(7, 4, ctx, pool);
  CHECK(items_of(var) == std::vector<ItemId>{1, 0, 2, 3});
  CHECK(var[0].score == 4.0);
  CHECK(var[1].score == doctest::Approx(8.0 / 3.0).epsilon(1e-15));
  CHECK(var[2].score == 0.0);

  const ScoredList pv = select_pop_var(7, 2, ctx, pool);
  // log(1 + 2) * 4 beats log(1 + 3) * 8/3.
  CHECK(items_of(pv) == std::vector<ItemId>{1, 0});
  CHECK(pv[0].score == doctest::Approx(4.394449154672439).epsilon(1e-15));
  // Unrated and single-rating items score exactly 0 under pop-var.
  const ScoredList pv_all = select_pop_var(7, 4, ctx, pool);
  CHECK(pv_all[2].score == 0.0);
  CHECK(pv_all[3].score == 0.0);
}

TEST_CASE("random selection is a seeded per-user stream") {
  const World w = make_world(make_set({ix(0, 0, 3)}), RatingSet{}, 4, 6);
  const std::vector<ItemId> pool{0, 1, 2, 3, 4, 5};
  const StrategyContext ctx = w.ctx(/*seed=*/77);

  const ScoredList a = select_random(2, 3, ctx, pool);
  const ScoredList b = select_random(2, 3, ctx, pool);
  CHECK(a == b);
  REQUIRE(a.size() == 3);
  for (const ScoredItem& s : a) {
    CHECK(s.score >= 0.0);
    CHECK(s.score < 1.0);
  }

  const StrategyContext other = w.ctx(/*seed=*/78);
  const ScoredList c = select_random(2, 6, other, pool);
  const ScoredList full = select_random(2, 6, ctx, pool);
  CHECK(full != c);

  // random-p is the same sampler; it differs only in when the simulation
  // retrains the model.
  CHECK(select_random_personalized(2, 3, ctx, pool) == a);
}

TEST_CASE("rating-based strategies need a model") {
  const World w = make_world(make_set({ix(0, 0, 3)}), RatingSet{}, 2, 2);
  const StrategyContext ctx = w.ctx();  // no model attached
  const std::vector<ItemId> pool{0, 1};
  CHECK_THROWS_AS(select_max_rating(0, 1, ctx, pool), MissingModelError);
  CHECK_THROWS_AS(select_min_rating(0, 1, ctx, pool), MissingModelError);
  CHECK_THROWS_AS(select_mixed_rating(0, 1, ctx, pool), MissingModelError);
}

TEST_CASE("max, min and mixed rating strategies order by prediction") {
  RatingSet known = make_set({ix(0, 0, 5), ix(0, 1, 1)});
  World w;
  w.known = std::move(known);
  w.n_users = 1;
  w.n_items = 4;
  w.stats = compute_item_stats(w.known, 4);
  SvdHyperParams hp;
  hp.n_factors = 2;
  hp.n_epochs = 50;
  hp.learning_rate = 0.05;
  hp.regularization = 0.01;
  hp.seed = 2;
  w.model = SvdModel::fit(w.known, 1, 4, hp);
  const StrategyContext ctx = w.ctx(1, /*with_model=*/true);
  const std::vector<ItemId> pool{0, 1, 2, 3};

  const double p0 = w.model->predict(0, 0);
  const double p1 = w.model->predict(0, 1);
  const double pu = w.model->predict(0, 2);  // unseen items 2 and 3 tie
  REQUIRE(p0 > pu + 0.05);
  REQUIRE(p1 < pu - 0.05);
  REQUIRE(w.model->predict(0, 3) == pu);

  const ScoredList mx = select_max_rating(0, 4, ctx, pool);
  CHECK(items_of(mx) == std::vector<ItemId>{0, 2, 3, 1});
  CHECK(mx[0].score == p0);
  CHECK(mx[3].score == p1);

  const ScoredList mn = select_min_rating(0, 4, ctx, pool);
  CHECK(items_of(mn) == std::vector<ItemId>{1, 2, 3, 0});
  CHECK(mn[0].score == 5.0 - p1);  // distance from the rating ceiling

  // Mixed alternates the two rankings, skipping items already taken, and
  // reports raw predictions as scores.
  const ScoredList mixed = select_mixed_rating(0, 4, ctx, pool);
  CHECK(items_of(mixed) == std::vector<ItemId>{0, 1, 2, 3});
  CHECK(mixed[0].score == p0);
  CHECK(mixed[1].score == p1);
  CHECK(mixed[2].score == pu);
  const ScoredList mixed_lo =
      select_mixed_rating(0, 4, ctx, pool, /*start_max=*/false);
  CHECK(items_of(mixed_lo) == std::vector<ItemId>{1, 0, 2, 3});
  CHECK(items_of(select_mixed_rating(0, 1, ctx, pool)) ==
        std::vector<ItemId>{0});
  CHECK(items_of(select_mixed_rating(0, 1, ctx, pool, false)) ==
        std::vector<ItemId>{1});
  CHECK(items_of(select_mixed_rating(0, 2, ctx, pool)) ==
        std::vector<ItemId>{0, 1});

  const std::vector<ItemId> one{2};
  const ScoredList single = select_mixed_rating(0, 3, ctx, one);
  REQUIRE(single.size() == 1);
  CHECK(single[0].item == 2);
}

TEST_CASE("knn cosine handles overlap, identity and disjoint columns") {
  // Column 0: user0 -> 5. Column 1: user0 -> 3, user1 -> 4.
  // cos(0, 1) = 15 / (5 * 5) = 0.6.
  // Column 2 duplicates column 0; column 3 only has user2.
  const World w = make_world(
      make_set({ix(0, 0, 5), ix(0, 1, 3), ix(1, 1, 4), ix(0, 2, 5),
                ix(2, 3, 2), ix(1, 4, 1)}),
      RatingSet{}, 4, 6);
  const StrategyContext ctx = w.ctx();

  // User 1 knows items {1, 4}. Score item 0 against them.
  const std::vector<ItemId> pool{0, 2, 3, 5};
  const ScoredList top = select_knn(1, 4, ctx, pool);
  REQUIRE(top.size() == 4);
  CHECK(top[0].item == 0);
  CHECK(top[0].score == 0.6);
  CHECK(top[1].item == 2);  // same column as 0, same cosine
  CHECK(top[1].score == 0.6);
  CHECK(top[2] == ScoredItem{3, 0.0});  // disjoint users
  CHECK(top[3] == ScoredItem{5, 0.0});  // empty column

  // Identical columns give cosine exactly 1 under max aggregation.
  const std::vector<ItemId> pool2{2};
  const ScoredList self = select_knn(0, 1, ctx, pool2);
  CHECK(self[0].score == 1.0);

  // Mean aggregation averages over the user's known items.
  const ScoredList mean =
      select_knn(1, 1, ctx, pool, KnnAggregation::kMean);
  CHECK(mean[0].item == 0);
  CHECK(mean[0].score == (0.6 + 0.0) / 2.0);

  // A user with no known ratings scores everything 0: ascending item order.
  const ScoredList cold = select_knn(3, 3, ctx, pool);
  CHECK(items_of(cold) == std::vector<ItemId>{0, 2, 3});
  CHECK(cold[0].score == 0.0);
}

TEST_CASE("stateful knn matches the pure version across mutations") {
  for (const KnnAggregation agg :
       {KnnAggregation::kMax, KnnAggregation::kMean}) {
    const int n_users = 6;
    const int n_items = 9;
    RatingSet known =
        RatingSet::from(testing::random_ratings(n_users, n_items, 0.4, 31));
    StrategyOptions opts;
    opts.knn_aggregation = agg;
    const std::unique_ptr<Strategy> strat =
        make_strategy(StrategyKind::kKnn, opts);
    REQUIRE(strat->kind() == StrategyKind::kKnn);

    SplitMix64 rng(99);
    World w;
    w.n_users = n_users;
    w.n_items = n_items;
    for (int step = 0; step < 120; ++step) {
      w.known = known;  // keep the context pointing at the live set
      const StrategyContext ctx = w.ctx(step);
      if (step % 17 == 0) strat->begin_sweep(ctx);

      const bool add = known.empty() || next_unit(rng) < 0.55;
      if (add) {
        UserId u;
        ItemId i;
        do {
          u = static_cast<UserId>(next_below(rng, n_users));
          i = static_cast<ItemId>(next_below(rng, n_items));
        } while (known.contains(u, i));
        const Interaction x =
            ix(u, i, 1.0 + static_cast<double>(next_below(rng, 5)));
        known.insert(x);
        w.known = known;
        strat->known_added(w.known, x);
      } else {
        const std::vector<Interaction> all = known.entries();
        const Interaction victim =
            all[next_below(rng, static_cast<std::uint64_t>(all.size()))];
        known.remove(victim.user, victim.item);
        w.known = known;
        strat->known_removed(w.known, victim);
      }

      const StrategyContext cur = w.ctx(step);
      for (int probe = 0; probe < 2; ++probe) {
        const UserId u = static_cast<UserId>(next_below(rng, n_users));
        std::vector<ItemId> pool;
        for (ItemId i = 0; i < n_items; ++i)
          if (next_unit(rng) < 0.5) pool.push_back(i);
        const ScoredList got = strat->select(u, 5, cur, pool);
        const ScoredList want = select_knn(u, 5, cur, pool, agg);
        CHECK(got == want);  // bitwise: integer ratings keep the Gram exact
      }
    }
  }
}

TEST_CASE("greedy-extend scores fold candidate columns into the model") {
  // Users 0..3 rate items 0 and 1 in K. Item 2 has candidate ratings from
  // two users; item 3 has none.
  RatingSet known, candidate;
  for (UserId u = 0; u < 4; ++u) {
    known.insert(ix(u, 0, static_cast<double>(1 + u)));
    known.insert(ix(u, 1, static_cast<double>(5 - u)));
  }
  candidate.insert(ix(0, 2, 4));
  candidate.insert(ix(1, 2, 4));
  const World w = [&] {
    World out;
    out.known = known;
    out.candidate = candidate;
    out.n_users = 4;
    out.n_items = 4;
    out.stats = compute_item_stats(out.known, 4);
    return out;
  }();
  const StrategyContext ctx = w.ctx(5);

  SvdHyperParams cheap;
  cheap.n_factors = 2;
  cheap.n_epochs = 3;
  const std::vector<Interaction> val = known.entries();
  const std::vector<ItemId> pool{2, 3};

  const std::vector<double> scores =
      greedy_extend_scores(ctx, pool, val, cheap);
  REQUIRE(scores.size() == 2);
  // No candidate ratings: K is unchanged and the shared seed makes the
  // retrained model identical, so the score is exactly zero.
  CHECK(scores[1] == 0.0);
  CHECK(scores[0] != 0.0);

  const ScoredList sel = select_greedy_extend(2, ctx, pool, val, cheap);
  REQUIRE(sel.size() == 2);
  if (scores[0] > 0.0) {
    CHECK(sel[0] == ScoredItem{2, scores[0]});
  } else {
    CHECK(sel[0] == ScoredItem{3, 0.0});
  }

  const std::vector<Interaction> empty_val;
  CHECK_THROWS_AS(greedy_extend_scores(ctx, pool, empty_val, cheap),
                  EmptyValidationSetError);

  // Two threads must reproduce the single-thread scores exactly.
  CHECK(greedy_extend_scores(ctx, pool, val, cheap, 2) == scores);
}

TEST_CASE("strategy names round-trip") {
  const std::span<const StrategyKind> all = all_strategies();
  REQUIRE(all.size() == 10);
  std::set<std::string_view> seen;
  for (const StrategyKind k : all) {
    const std::string_view name = strategy_name(k);
    CHECK(strategy_from_name(name) == k);
    seen.insert(name);
  }
  CHECK(seen.size() == 10);
  CHECK(strategy_from_name("random") == StrategyKind::kRandom);
  CHECK(strategy_from_name("greedy-extend") == StrategyKind::kGreedyExtend);
  CHECK(strategy_from_name("mixed-rating") == StrategyKind::kMixedRating);
  CHECK_THROWS_AS(strategy_from_name("bogus"), InvalidArgumentError);
}

TEST_CASE("personalization split") {
  CHECK_FALSE(is_personalized(StrategyKind::kRandom));
  CHECK_FALSE(is_personalized(StrategyKind::kPop));
  CHECK_FALSE(is_personalized(StrategyKind::kVar));
  CHECK_FALSE(is_personalized(StrategyKind::kPopVar));
  CHECK_FALSE(is_personalized(StrategyKind::kGreedyExtend));
  CHECK(is_personalized(StrategyKind::kRandomP));
  CHECK(is_personalized(StrategyKind::kMaxRating));
  CHECK(is_personalized(StrategyKind::kMinRating));
  CHECK(is_personalized(StrategyKind::kMixedRating));
  CHECK(is_personalized(StrategyKind::kKnn));
}

TEST_CASE("every strategy returns a valid query list") {
  // Randomized property check: the selection is a subset of the pool, has no
  // duplicates, respects q, and (mixed aside) is non-increasing in score.
  SplitMix64 rng(7);
  int cases = 0;
  for (int world_i = 0; world_i < 12; ++world_i) {
    const int n_users = 5;
    const int n_items = 8;
    const World w = make_world(
        RatingSet::from(testing::random_ratings(n_users, n_items, 0.5,
                                                100 + world_i)),
        RatingSet::from(testing::random_ratings(n_users, n_items, 0.2,
                                                200 + world_i)),
        n_users, n_items, /*train=*/true);

    StrategyOptions opts;
    opts.greedy.min_validation = 5;
    opts.greedy.cheap.n_factors = 2;
    opts.greedy.cheap.n_epochs = 2;
    for (const StrategyKind kind : all_strategies()) {
      const std::unique_ptr<Strategy> strat = make_strategy(kind, opts);
      CHECK(strat->kind() == kind);
      const StrategyContext ctx =
          w.ctx(world_i, /*with_model=*/is_personalized(kind));
      strat->begin_sweep(ctx);
      for (int probe = 0; probe < 10; ++probe) {
        const UserId u = static_cast<UserId>(next_below(rng, n_users));
        const int q = static_cast<int>(next_below(rng, 6));
        std::vector<ItemId> pool;
        for (ItemId i = 0; i < n_items; ++i)
          if (next_unit(rng) < 0.6) pool.push_back(i);

        const ScoredList l = strat->select(u, q, ctx, pool);
        ++cases;
        CHECK(l.size() <= static_cast<std::size_t>(q));
        CHECK(l.size() == std::min(pool.size(),
                                   static_cast<std::size_t>(q)));
        std::set<ItemId> unique;
        for (const ScoredItem& s : l) {
          unique.insert(s.item);
          CHECK(std::binary_search(pool.begin(), pool.end(), s.item));
        }
        CHECK(unique.size() == l.size());
        if (kind != StrategyKind::kMixedRating) {
          for (std::size_t k = 1; k < l.size(); ++k)
            CHECK(l[k - 1].score >= l[k].score);
        }
      }
    }
  }
  CHECK(cases >= 1000);
}

}  // namespace
}  // namespace minifair
