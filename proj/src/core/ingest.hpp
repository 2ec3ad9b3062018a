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

#ifndef MINIFAIR_CORE_INGEST_HPP_
#define MINIFAIR_CORE_INGEST_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "core/rating_set.hpp"

namespace minifair {

// Input file dialects. kMl1m reads `::`-delimited ratings/users files;
// kMl100k reads the tab-delimited u.data and pipe-delimited u.user layout.
enum class DatasetFormat { kMl1m, kMl100k };

DatasetFormat dataset_format_from_name(const std::string& name);
std::string dataset_format_name(DatasetFormat format);

struct SplitConfig {
  double train_fraction = 0.8;
  int k_core = 5;
  std::uint64_t seed = 0;

  void validate() const;
};

// Raw interactions keep the file's original ids; dense remapping happens in
// build_dataset. Interactions are returned in file order.
std::vector<Interaction> parse_ratings(const std::filesystem::path& path,
                                       DatasetFormat format);

// Gender column: F -> protected, M -> unprotected.
GroupMap parse_users(const std::filesystem::path& path, DatasetFormat format);

// Iteratively drops users and items with fewer than k ratings until every
// remaining user and item has at least k. Preserves input order.
std::vector<Interaction> k_core_filter(std::vector<Interaction> interactions,
                                       int k);

// Per-user split: ceil(train_fraction * n_u) ratings to train, remainder to
// test, chosen by a per-user stream seeded with mix64(seed, user). Throws
// DegenerateUserError when a user has fewer than 2 ratings.
std::pair<RatingSet, RatingSet> userfixed_split(const RatingSet& rs,
                                                const SplitConfig& cfg);

// Fully prepared experiment input: filtered, densely remapped and split.
struct Dataset {
  RatingSet train;
  RatingSet test;
  GroupMap groups;  // dense user ids, total over all users

  // dense id -> original file id
  std::vector<std::int64_t> user_labels;
  std::vector<std::int64_t> item_labels;

  int n_users() const { return static_cast<int>(user_labels.size()); }
  int n_items() const { return static_cast<int>(item_labels.size()); }
  std::size_t n_ratings() const { return train.size() + test.size(); }
  double density() const;
  int n_protected_users() const;
};

// Assembles a Dataset from raw-id interactions and group labels:
// k-core filter, optional user subsample (re-peeled to keep the k-core
// property), dense remap, then the userfixed split.
Dataset build_dataset(std::vector<Interaction> raw, const GroupMap& raw_groups,
                      const SplitConfig& split,
                      double user_sample_fraction = 1.0);

Dataset load_dataset(const std::filesystem::path& ratings_path,
                     const std::filesystem::path& users_path,
                     DatasetFormat format, const SplitConfig& split,
                     double user_sample_fraction = 1.0);

// Conventional file names inside a dataset directory:
// ml-1m ratings.dat/users.dat, ml-100k u.data/u.user.
std::pair<std::filesystem::path, std::filesystem::path> dataset_paths(
    const std::filesystem::path& dir, DatasetFormat format);

}  // namespace minifair

#endif  // MINIFAIR_CORE_INGEST_HPP_
