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

#ifndef MINIFAIR_CORE_SVD_HPP_
#define MINIFAIR_CORE_SVD_HPP_

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "core/rating_set.hpp"

namespace minifair {

struct SvdHyperParams {
  int n_factors = 100;
  double learning_rate = 0.005;
  double regularization = 0.1;
  int n_epochs = 20;
  double init_std = 0.1;
  double rating_min = 1.0;
  double rating_max = 5.0;
  std::uint64_t seed = 0;

  void validate() const;
};

// Biased matrix factorization r = mu + b_u + b_i + q_i . p_u, trained with
// sequential SGD. Training order and factor initialization are driven by
// SvdHyperParams::seed, so identical inputs give bitwise-identical models.
//
// Predictions clamp to [rating_min, rating_max]; the raw residual is used
// during training. Users or items absent from the training data contribute
// neither bias nor factor terms.
class SvdModel {
 public:
  // Global mean plus seeded factor initialization, no SGD yet. Factor rows
  // are drawn only for users/items present in `ratings`, in ascending id
  // order, from a stream derived from hp.seed.
  static SvdModel initialize(std::span<const Interaction> ratings, int n_users,
                             int n_items, const SvdHyperParams& hp);

  static SvdModel fit(std::span<const Interaction> ratings, int n_users,
                      int n_items, const SvdHyperParams& hp);
  static SvdModel fit(const RatingSet& ratings, int n_users, int n_items,
                      const SvdHyperParams& hp);

  // Continues SGD for n_epochs more epochs. Epoch numbering carries on from
  // previous calls, so fit(hp{n_epochs=a+b}) == initialize + run(a) + run(b).
  // Rows first seen here start from zero factors (warm-start semantics);
  // the global mean is recomputed from `ratings`.
  void run_epochs(std::span<const Interaction> ratings, int n_epochs);

  double predict(UserId user, ItemId item) const;

  // Root mean squared error over `entries`, evaluated in (user, item)-sorted
  // order. Throws EmptyTestSetError on an empty span.
  double rmse(std::span<const Interaction> entries) const;
  double rmse(const RatingSet& rs) const;

  // Per-entry squared errors in (user, item)-sorted order. The mean of the
  // returned list is exactly rmse()^2 (same traversal, same accumulation).
  std::vector<double> squared_errors(std::span<const Interaction> entries) const;

  double global_mean() const { return mu_; }
  double user_bias(UserId u) const { return bu_[u]; }
  double item_bias(ItemId i) const { return bi_[i]; }
  std::span<const double> user_factors(UserId u) const;
  std::span<const double> item_factors(ItemId i) const;
  bool seen_user(UserId u) const;
  bool seen_item(ItemId i) const;
  int n_users() const { return n_users_; }
  int n_items() const { return n_items_; }
  int n_factors() const { return hp_.n_factors; }
  const SvdHyperParams& hyper_params() const { return hp_; }

  // Flat binary checkpoint (test support).
  void save(const std::filesystem::path& path) const;
  static SvdModel load(const std::filesystem::path& path);

  friend bool operator==(const SvdModel& a, const SvdModel& b);

 private:
  SvdModel() = default;

  SvdHyperParams hp_;
  int n_users_ = 0;
  int n_items_ = 0;
  int epochs_done_ = 0;
  double mu_ = 0.0;
  std::vector<double> bu_, bi_;
  std::vector<double> pu_, qi_;  // row-major [id * n_factors + f]
  std::vector<std::uint8_t> seen_user_, seen_item_;
};

}  // namespace minifair

#endif  // MINIFAIR_CORE_SVD_HPP_
