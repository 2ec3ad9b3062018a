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

#include "core/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <charconv>
#include <fstream>
#include <unordered_map>
#include <unordered_set>

#include "core/rng.hpp"

namespace minifair {
namespace {

// Splits `line` on a single-character or "::" delimiter into exactly `n`
// fields. Returns false on a wrong field count.
bool split_fields(const std::string& line, const std::string& delim,
                  std::size_t n, std::vector<std::string_view>& out) {
  out.clear();
  std::string_view rest(line);
  while (true) {
    const auto pos = rest.find(delim);
    if (pos == std::string_view::npos) {
      out.push_back(rest);
      break;
    }
    out.push_back(rest.substr(0, pos));
    rest = rest.substr(pos + delim.size());
  }
  return out.size() == n;
}

bool parse_int(std::string_view text, std::int64_t& out) {
  const char* begin = text.data();
  const char* end = begin + text.size();
  auto [ptr, ec] = std::from_chars(begin, end, out);
  return ec == std::errc() && ptr == end && !text.empty();
}

void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

std::ifstream open_or_throw(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return in;
}

}  // namespace

DatasetFormat dataset_format_from_name(const std::string& name) {
  if (name == "ml-1m") return DatasetFormat::kMl1m;
  if (name == "ml-100k") return DatasetFormat::kMl100k;
  throw InvalidArgumentError("unknown dataset format: " + name);
}

std::string dataset_format_name(DatasetFormat format) {
  return format == DatasetFormat::kMl1m ? "ml-1m" : "ml-100k";
}

void SplitConfig::validate() const {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw InvalidArgumentError("train_fraction must be in (0, 1)");
  }
  if (k_core < 0) throw InvalidArgumentError("k_core must be >= 0");
}

std::vector<Interaction> parse_ratings(const std::filesystem::path& path,
                                       DatasetFormat format) {
  const std::string delim = format == DatasetFormat::kMl1m ? "::" : "\t";
  std::ifstream in = open_or_throw(path);

  std::vector<Interaction> out;
  std::vector<std::string_view> fields;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (line.empty()) continue;
    std::int64_t user, item, rating, timestamp;
    if (!split_fields(line, delim, 4, fields) ||
        !parse_int(fields[0], user) || !parse_int(fields[1], item) ||
        !parse_int(fields[2], rating) || !parse_int(fields[3], timestamp)) {
      throw ParseError("malformed rating record in " + path.string(), line_no);
    }
    if (user < 0 || item < 0 || rating < 1 || rating > 5) {
      throw ParseError("rating record out of range in " + path.string(),
                       line_no);
    }
    out.push_back(Interaction{static_cast<UserId>(user),
                              static_cast<ItemId>(item),
                              static_cast<double>(rating), timestamp});
  }
  if (in.bad()) throw IoError("read failure on " + path.string());
  return out;
}

GroupMap parse_users(const std::filesystem::path& path, DatasetFormat format) {
  std::ifstream in = open_or_throw(path);

  // ml-1m users file: UserID::Gender::Age::Occupation::Zip
  // ml-100k u.user:   user|age|gender|occupation|zip
  const std::string delim = format == DatasetFormat::kMl1m ? "::" : "|";
  const std::size_t gender_field = format == DatasetFormat::kMl1m ? 1 : 2;

  GroupMap out;
  std::vector<std::string_view> fields;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (line.empty()) continue;
    std::int64_t user;
    if (!split_fields(line, delim, 5, fields) || !parse_int(fields[0], user)) {
      throw ParseError("malformed user record in " + path.string(), line_no);
    }
    const std::string_view gender = fields[gender_field];
    Group group;
    if (gender == "F") {
      group = Group::kProtected;
    } else if (gender == "M") {
      group = Group::kUnprotected;
    } else {
      throw ParseError("unknown gender token in " + path.string(), line_no);
    }
    out.set(static_cast<UserId>(user), group);
  }
  if (in.bad()) throw IoError("read failure on " + path.string());
  return out;
}

std::vector<Interaction> k_core_filter(std::vector<Interaction> interactions,
                                       int k) {
  if (k <= 0) return interactions;

  std::unordered_map<UserId, int> user_degree;
  std::unordered_map<ItemId, int> item_degree;
  for (const Interaction& x : interactions) {
    ++user_degree[x.user];
    ++item_degree[x.item];
  }

  // Peel to fixpoint. Each pass drops every interaction touching an
  // under-degree endpoint; degree maps are rebuilt from survivors.
  bool changed = true;
  while (changed) {
    changed = false;
    std::vector<Interaction> kept;
    kept.reserve(interactions.size());
    for (const Interaction& x : interactions) {
      if (user_degree[x.user] >= k && item_degree[x.item] >= k) {
        kept.push_back(x);
      } else {
        changed = true;
      }
    }
    if (changed) {
      interactions = std::move(kept);
      user_degree.clear();
      item_degree.clear();
      for (const Interaction& x : interactions) {
        ++user_degree[x.user];
        ++item_degree[x.item];
      }
    }
  }
  return interactions;
}

std::pair<RatingSet, RatingSet> userfixed_split(const RatingSet& rs,
                                                const SplitConfig& cfg) {
  cfg.validate();
  RatingSet train, test;
  for (UserId user : rs.users()) {
    std::vector<Interaction> owned = rs.user_entries(user);  // item-sorted
    if (owned.size() < 2) {
      throw DegenerateUserError("user " + std::to_string(user) +
                                " has fewer than 2 ratings");
    }
    const auto n_train = static_cast<std::size_t>(
        std::ceil(cfg.train_fraction * static_cast<double>(owned.size())));
    SplitMix64 rng(mix64(cfg.seed, static_cast<std::uint64_t>(user)));
    deterministic_shuffle(owned, rng);
    for (std::size_t i = 0; i < owned.size(); ++i) {
      (i < n_train ? train : test).insert(owned[i]);
    }
  }
  return {std::move(train), std::move(test)};
}

double Dataset::density() const {
  const double cells =
      static_cast<double>(n_users()) * static_cast<double>(n_items());
  return cells > 0.0 ? static_cast<double>(n_ratings()) / cells : 0.0;
}

int Dataset::n_protected_users() const {
  int n = 0;
  for (const auto& [user, group] : groups.raw()) {
    if (group == Group::kProtected) ++n;
  }
  return n;
}

Dataset build_dataset(std::vector<Interaction> raw, const GroupMap& raw_groups,
                      const SplitConfig& split, double user_sample_fraction) {
  split.validate();
  if (!(user_sample_fraction > 0.0 && user_sample_fraction <= 1.0)) {
    throw InvalidArgumentError("user_sample_fraction must be in (0, 1]");
  }

  raw = k_core_filter(std::move(raw), split.k_core);

  if (user_sample_fraction < 1.0) {
    std::vector<UserId> users;
    {
      std::unordered_set<UserId> seen;
      for (const Interaction& x : raw) {
        if (seen.insert(x.user).second) users.push_back(x.user);
      }
    }
    std::sort(users.begin(), users.end());
    const auto keep_n = static_cast<std::size_t>(std::lround(
        user_sample_fraction * static_cast<double>(users.size())));
    SplitMix64 rng(mix64(split.seed, 0x73616d70ull));  // "samp"
    std::vector<UserId> kept =
        sample_without_replacement(std::move(users), keep_n, rng);
    std::unordered_set<UserId> keep(kept.begin(), kept.end());
    std::vector<Interaction> sampled;
    sampled.reserve(raw.size());
    for (const Interaction& x : raw) {
      if (keep.count(x.user)) sampled.push_back(x);
    }
    // Re-peel: dropping users can push item degrees below k.
    raw = k_core_filter(std::move(sampled), split.k_core);
  }

  // Dense remap in ascending original-id order.
  std::vector<std::int64_t> user_ids, item_ids;
  {
    std::unordered_set<std::int64_t> useen, iseen;
    for (const Interaction& x : raw) {
      if (useen.insert(x.user).second) user_ids.push_back(x.user);
      if (iseen.insert(x.item).second) item_ids.push_back(x.item);
    }
  }
  std::sort(user_ids.begin(), user_ids.end());
  std::sort(item_ids.begin(), item_ids.end());

  std::unordered_map<std::int64_t, UserId> user_index;
  std::unordered_map<std::int64_t, ItemId> item_index;
  for (std::size_t i = 0; i < user_ids.size(); ++i) {
    user_index[user_ids[i]] = static_cast<UserId>(i);
  }
  for (std::size_t i = 0; i < item_ids.size(); ++i) {
    item_index[item_ids[i]] = static_cast<ItemId>(i);
  }

  RatingSet all;
  for (const Interaction& x : raw) {
    all.insert(Interaction{user_index.at(x.user), item_index.at(x.item),
                           x.rating, x.timestamp});
  }

  Dataset ds;
  ds.user_labels = std::move(user_ids);
  ds.item_labels = std::move(item_ids);
  for (std::size_t i = 0; i < ds.user_labels.size(); ++i) {
    const auto original = static_cast<UserId>(ds.user_labels[i]);
    if (!raw_groups.contains(original)) {
      throw UnknownUserError("no group label for user " +
                             std::to_string(ds.user_labels[i]));
    }
    ds.groups.set(static_cast<UserId>(i), raw_groups.at(original));
  }
  std::tie(ds.train, ds.test) = userfixed_split(all, split);
  return ds;
}

Dataset load_dataset(const std::filesystem::path& ratings_path,
                     const std::filesystem::path& users_path,
                     DatasetFormat format, const SplitConfig& split,
                     double user_sample_fraction) {
  return build_dataset(parse_ratings(ratings_path, format),
                       parse_users(users_path, format), split,
                       user_sample_fraction);
}

std::pair<std::filesystem::path, std::filesystem::path> dataset_paths(
    const std::filesystem::path& dir, DatasetFormat format) {
  switch (format) {
    case DatasetFormat::kMl1m:
      return {dir / "ratings.dat", dir / "users.dat"};
    case DatasetFormat::kMl100k:
      return {dir / "u.data", dir / "u.user"};
  }
  throw InvalidArgumentError("unknown dataset format");
}

}  // namespace minifair
