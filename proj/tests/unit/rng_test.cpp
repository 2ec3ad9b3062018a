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

#include "core/rng.hpp"

#include <algorithm>
#include <set>
#include <vector>

#include "doctest.h"

namespace minifair {
namespace {

TEST_CASE("splitmix64 is deterministic and seed-sensitive") {
  SplitMix64 a(42);
  SplitMix64 b(42);
  SplitMix64 c(43);
  bool diverged = false;
  for (int k = 0; k < 64; ++k) {
    const std::uint64_t va = a();
    CHECK(va == b());
    if (va != c()) diverged = true;
  }
  CHECK(diverged);
}

TEST_CASE("next_unit stays in [0, 1) and covers both halves") {
  SplitMix64 rng(7);
  int low = 0;
  int high = 0;
  for (int k = 0; k < 10000; ++k) {
    const double u = next_unit(rng);
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    (u < 0.5 ? low : high) += 1;
  }
  CHECK(low > 4000);
  CHECK(high > 4000);
}

TEST_CASE("next_below covers the full range without bias holes") {
  SplitMix64 rng(11);
  std::vector<int> counts(7, 0);
  for (int k = 0; k < 14000; ++k) {
    const std::uint64_t v = next_below(rng, 7);
    REQUIRE(v < 7);
    ++counts[v];
  }
  for (int v : counts) CHECK(v > 1000);
}

TEST_CASE("next_normal has roughly the requested moments") {
  SplitMix64 rng(3);
  double sum = 0.0;
  double sq = 0.0;
  const int n = 20000;
  for (int k = 0; k < n; ++k) {
    const double x = next_normal(rng, 2.0, 0.5);
    sum += x;
    sq += x * x;
  }
  const double mean = sum / n;
  const double var = sq / n - mean * mean;
  CHECK(mean == doctest::Approx(2.0).epsilon(0.02));
  CHECK(var == doctest::Approx(0.25).epsilon(0.1));
}

TEST_CASE("deterministic_shuffle permutes and reproduces") {
  std::vector<int> v1{1, 2, 3, 4, 5, 6, 7, 8};
  std::vector<int> v2 = v1;
  const std::vector<int> original = v1;
  SplitMix64 r1(99);
  SplitMix64 r2(99);
  deterministic_shuffle(v1, r1);
  deterministic_shuffle(v2, r2);
  CHECK(v1 == v2);
  CHECK(std::is_permutation(v1.begin(), v1.end(), original.begin()));
}

TEST_CASE("sample_without_replacement returns distinct elements") {
  std::vector<int> items{10, 20, 30, 40, 50};
  SplitMix64 rng(5);
  const std::vector<int> got = sample_without_replacement(items, 3, rng);
  CHECK(got.size() == 3);
  const std::set<int> uniq(got.begin(), got.end());
  CHECK(uniq.size() == 3);
  for (int x : got) CHECK(std::count(items.begin(), items.end(), x) == 1);

  SplitMix64 rng2(5);
  CHECK(sample_without_replacement(items, 3, rng2) == got);

  SplitMix64 rng3(5);
  CHECK(sample_without_replacement(items, 99, rng3).size() == items.size());
}

TEST_CASE("sample_indices draws uniformly over [0, n)") {
  SplitMix64 rng(17);
  const std::vector<std::size_t> got = sample_indices(100, 100, rng);
  CHECK(got.size() == 100);
  const std::set<std::size_t> uniq(got.begin(), got.end());
  CHECK(uniq.size() == 100);
  CHECK(*uniq.begin() == 0);
  CHECK(*uniq.rbegin() == 99);

  // Every index should land in a k=1 sample once in a while.
  std::set<std::size_t> seen;
  SplitMix64 rng2(18);
  for (int k = 0; k < 200; ++k) {
    const auto one = sample_indices(4, 1, rng2);
    REQUIRE(one.size() == 1);
    seen.insert(one[0]);
  }
  CHECK(seen.size() == 4);
}

TEST_CASE("mix64 separates nearby inputs") {
  std::set<std::uint64_t> vals;
  for (std::uint64_t a = 0; a < 16; ++a)
    for (std::uint64_t b = 0; b < 16; ++b) vals.insert(mix64(a, b));
  CHECK(vals.size() == 256);
  CHECK(mix64(1, 2, 3) == mix64(mix64(1, 2), 3));
}

}  // namespace
}  // namespace minifair
