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

#include "core/rating_set.hpp"

#include <algorithm>
#include <string>

namespace minifair {
namespace {

std::string pair_text(UserId user, ItemId item) {
  return "(" + std::to_string(user) + ", " + std::to_string(item) + ")";
}

}  // namespace

RatingSet RatingSet::from(std::span<const Interaction> interactions) {
  RatingSet rs;
  for (const Interaction& x : interactions) rs.insert(x);
  return rs;
}

void RatingSet::insert(const Interaction& x) {
  if (x.user < 0 || x.item < 0) {
    throw InvalidArgumentError("negative id in " + pair_text(x.user, x.item));
  }
  auto [it, inserted] = by_key_.emplace(key(x.user, x.item), x);
  if (!inserted) {
    throw DuplicateEntryError("duplicate entry " + pair_text(x.user, x.item));
  }
  auto& column = by_item_[x.item];
  auto pos = std::lower_bound(
      column.begin(), column.end(), x.user,
      [](const auto& entry, UserId user) { return entry.first < user; });
  column.insert(pos, {x.user, x.rating});
}

Interaction RatingSet::remove(UserId user, ItemId item) {
  auto it = by_key_.find(key(user, item));
  if (it == by_key_.end()) {
    throw NotFoundError("no entry " + pair_text(user, item));
  }
  const Interaction removed = it->second;
  by_key_.erase(it);

  auto column_it = by_item_.find(item);
  auto& column = column_it->second;
  auto pos = std::lower_bound(
      column.begin(), column.end(), user,
      [](const auto& entry, UserId u) { return entry.first < u; });
  column.erase(pos);
  if (column.empty()) by_item_.erase(column_it);
  return removed;
}

const Interaction* RatingSet::find(UserId user, ItemId item) const {
  auto it = by_key_.find(key(user, item));
  return it == by_key_.end() ? nullptr : &it->second;
}

std::vector<Interaction> RatingSet::entries() const {
  std::vector<Interaction> out;
  out.reserve(by_key_.size());
  for (const auto& [k, x] : by_key_) out.push_back(x);
  return out;
}

std::vector<Interaction> RatingSet::user_entries(UserId user) const {
  std::vector<Interaction> out;
  auto it = by_key_.lower_bound(key(user, 0));
  for (; it != by_key_.end() && it->second.user == user; ++it) {
    out.push_back(it->second);
  }
  return out;
}

std::vector<ItemId> RatingSet::user_items(UserId user) const {
  std::vector<ItemId> out;
  auto it = by_key_.lower_bound(key(user, 0));
  for (; it != by_key_.end() && it->second.user == user; ++it) {
    out.push_back(it->second.item);
  }
  return out;
}

std::size_t RatingSet::user_degree(UserId user) const {
  std::size_t n = 0;
  auto it = by_key_.lower_bound(key(user, 0));
  for (; it != by_key_.end() && it->second.user == user; ++it) ++n;
  return n;
}

std::vector<Interaction> RatingSet::item_entries(ItemId item) const {
  std::vector<Interaction> out;
  for (const auto& [user, rating] : item_ratings(item)) {
    out.push_back(*find(user, item));
  }
  return out;
}

std::span<const std::pair<UserId, double>> RatingSet::item_ratings(
    ItemId item) const {
  auto it = by_item_.find(item);
  if (it == by_item_.end()) return {};
  return it->second;
}

std::size_t RatingSet::item_degree(ItemId item) const {
  return item_ratings(item).size();
}

std::vector<UserId> RatingSet::users() const {
  std::vector<UserId> out;
  UserId last = -1;
  for (const auto& [k, x] : by_key_) {
    if (out.empty() || x.user != last) {
      out.push_back(x.user);
      last = x.user;
    }
  }
  return out;
}

std::vector<ItemId> RatingSet::items() const {
  std::vector<ItemId> out;
  out.reserve(by_item_.size());
  for (const auto& [item, column] : by_item_) out.push_back(item);
  std::sort(out.begin(), out.end());
  return out;
}

std::pair<RatingSet, RatingSet> group_partition(const RatingSet& rs,
                                                const GroupMap& groups) {
  RatingSet prot, unprot;
  rs.for_each([&](const Interaction& x) {
    (groups.at(x.user) == Group::kProtected ? prot : unprot).insert(x);
  });
  return {std::move(prot), std::move(unprot)};
}

}  // namespace minifair
