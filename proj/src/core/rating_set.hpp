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

#ifndef MINIFAIR_CORE_RATING_SET_HPP_
#define MINIFAIR_CORE_RATING_SET_HPP_

#include <cstdint>
#include <map>
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

#include "core/errors.hpp"

namespace minifair {

using UserId = std::int32_t;
using ItemId = std::int32_t;

// A single (user, item, rating) observation. The timestamp is carried for
// provenance and never consulted by any algorithm.
struct Interaction {
  UserId user = 0;
  ItemId item = 0;
  double rating = 0.0;
  std::int64_t timestamp = 0;

  friend bool operator==(const Interaction& a, const Interaction& b) {
    return a.user == b.user && a.item == b.item && a.rating == b.rating &&
           a.timestamp == b.timestamp;
  }
};

enum class Group : std::uint8_t { kProtected, kUnprotected };

// user -> group label. Lookups of unmapped users throw, so a partial map is
// caught the first time it is consulted.
class GroupMap {
 public:
  void set(UserId user, Group group) { groups_[user] = group; }

  Group at(UserId user) const {
    auto it = groups_.find(user);
    if (it == groups_.end()) {
      throw UnknownUserError("no group label for user " +
                             std::to_string(user));
    }
    return it->second;
  }

  bool contains(UserId user) const { return groups_.count(user) != 0; }
  std::size_t size() const { return groups_.size(); }
  bool empty() const { return groups_.empty(); }

  const std::unordered_map<UserId, Group>& raw() const { return groups_; }

 private:
  std::unordered_map<UserId, Group> groups_;
};

// Sparse collection of interactions keyed by (user, item), with a secondary
// per-item index. Iteration is always in (user, item) order, which is what
// makes downstream computations reproducible.
class RatingSet {
 public:
  RatingSet() = default;

  static RatingSet from(std::span<const Interaction> interactions);

  // Throws DuplicateEntryError if the (user, item) key already exists.
  void insert(const Interaction& x);

  // Removes and returns the entry; throws NotFoundError if absent.
  Interaction remove(UserId user, ItemId item);

  const Interaction* find(UserId user, ItemId item) const;
  bool contains(UserId user, ItemId item) const {
    return find(user, item) != nullptr;
  }

  std::size_t size() const { return by_key_.size(); }
  bool empty() const { return by_key_.empty(); }

  // All entries in (user, item) order.
  std::vector<Interaction> entries() const;

  template <typename Fn>
  void for_each(Fn&& fn) const {
    for (const auto& [key, x] : by_key_) fn(x);
  }

  // Entries of one user, item-sorted.
  std::vector<Interaction> user_entries(UserId user) const;
  // Items of one user, ascending.
  std::vector<ItemId> user_items(UserId user) const;
  std::size_t user_degree(UserId user) const;

  // Entries of one item, user-sorted.
  std::vector<Interaction> item_entries(ItemId item) const;
  // (user, rating) pairs of one item, user-sorted. Zero-copy view.
  std::span<const std::pair<UserId, double>> item_ratings(ItemId item) const;
  std::size_t item_degree(ItemId item) const;

  // Distinct ids present, ascending.
  std::vector<UserId> users() const;
  std::vector<ItemId> items() const;

  friend bool operator==(const RatingSet& a, const RatingSet& b) {
    return a.by_key_ == b.by_key_;
  }

 private:
  static std::uint64_t key(UserId user, ItemId item) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(user))
            << 32) |
           static_cast<std::uint32_t>(item);
  }

  // Ordered by key = (user << 32) | item, i.e. (user, item) lexicographic
  // for the non-negative ids this library uses.
  std::map<std::uint64_t, Interaction> by_key_;
  std::unordered_map<ItemId, std::vector<std::pair<UserId, double>>> by_item_;
};

// Splits rs into (protected, unprotected) by the owning user's label.
// Throws UnknownUserError if some user in rs is unmapped.
std::pair<RatingSet, RatingSet> group_partition(const RatingSet& rs,
                                                const GroupMap& groups);

}  // namespace minifair

#endif  // MINIFAIR_CORE_RATING_SET_HPP_
