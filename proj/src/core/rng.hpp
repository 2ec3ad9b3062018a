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

#ifndef MINIFAIR_CORE_RNG_HPP_
#define MINIFAIR_CORE_RNG_HPP_

// Deterministic randomness. Everything random in this library flows through
// SplitMix64 streams derived from user-supplied seeds, so results are
// reproducible bit-for-bit across runs and independent of the standard
// library's distribution implementations.

#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

namespace minifair {

// SplitMix64 (Steele, Lea & Flood). Counter-based: the state advances by a
// fixed odd constant and the output is a bijective mix of the counter value.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~std::uint64_t{0}; }

  result_type operator()() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

// Mixes two values into a stream seed. Used to derive independent
// sub-streams, e.g. mix64(run_seed, user_id) or mix64(run_seed, iteration).
inline std::uint64_t mix64(std::uint64_t a, std::uint64_t b) {
  SplitMix64 g(a ^ (b + 0x9e3779b97f4a7c15ull + (a << 6) + (a >> 2)));
  return g();
}

inline std::uint64_t mix64(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  return mix64(mix64(a, b), c);
}

// Uniform double in [0, 1) using the top 53 bits.
inline double next_unit(SplitMix64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Unbiased uniform integer in [0, n). Rejection sampling on the low bits.
inline std::uint64_t next_below(SplitMix64& rng, std::uint64_t n) {
  const std::uint64_t limit = ~std::uint64_t{0} - ~std::uint64_t{0} % n;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % n;
}

// Normal(mean, stddev) via Box-Muller. One draw per uniform pair; the sine
// counterpart is discarded so the stream position stays easy to reason about.
inline double next_normal(SplitMix64& rng, double mean, double stddev) {
  double u1 = next_unit(rng);
  while (u1 <= 0.0) u1 = next_unit(rng);
  const double u2 = next_unit(rng);
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double two_pi = 6.283185307179586476925286766559;
  return mean + stddev * radius * std::cos(two_pi * u2);
}

// Fisher-Yates shuffle with explicit draws (std::shuffle output is
// implementation-defined, which would break cross-platform reproducibility).
template <typename T>
void deterministic_shuffle(std::vector<T>& items, SplitMix64& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(next_below(rng, i));
    std::swap(items[i - 1], items[j]);
  }
}

// First k elements of a seeded Fisher-Yates permutation: a uniform sample
// without replacement, in selection order.
template <typename T>
std::vector<T> sample_without_replacement(std::vector<T> items, std::size_t k,
                                          SplitMix64& rng) {
  if (k > items.size()) k = items.size();
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j =
        i + static_cast<std::size_t>(next_below(rng, items.size() - i));
    std::swap(items[i], items[j]);
  }
  items.resize(k);
  return items;
}

// Sample k indices from [0, n), in selection order.
inline std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k,
                                               SplitMix64& rng) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  return sample_without_replacement(std::move(idx), k, rng);
}

}  // namespace minifair

#endif  // MINIFAIR_CORE_RNG_HPP_
