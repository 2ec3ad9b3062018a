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

#include "core/svd.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <numeric>
#include <string>

#include "core/errors.hpp"
#include "core/rng.hpp"

namespace minifair {
namespace {

constexpr std::uint64_t kInitTag = 0x696e6974;   // "init"
constexpr std::uint64_t kEpochTag = 0x65706f63;  // "epoc"

bool entry_less(const Interaction& a, const Interaction& b) {
  if (a.user != b.user) return a.user < b.user;
  return a.item < b.item;
}

double mean_rating(std::span<const Interaction> ratings) {
  double sum = 0.0;
  for (const Interaction& x : ratings) sum += x.rating;
  return sum / static_cast<double>(ratings.size());
}

}  // namespace

void SvdHyperParams::validate() const {
  if (n_factors < 1) throw InvalidArgumentError("n_factors must be >= 1");
  if (!(learning_rate > 0.0))
    throw InvalidArgumentError("learning_rate must be > 0");
  if (regularization < 0.0)
    throw InvalidArgumentError("regularization must be >= 0");
  if (n_epochs < 1) throw InvalidArgumentError("n_epochs must be >= 1");
  if (init_std < 0.0) throw InvalidArgumentError("init_std must be >= 0");
  if (!(rating_min < rating_max))
    throw InvalidArgumentError("rating_min must be < rating_max");
}

SvdModel SvdModel::initialize(std::span<const Interaction> ratings,
                              int n_users, int n_items,
                              const SvdHyperParams& hp) {
  hp.validate();
  if (ratings.empty()) throw EmptyTrainingSetError("no training ratings");
  if (n_users < 1 || n_items < 1)
    throw InvalidArgumentError("n_users and n_items must be >= 1");

  SvdModel m;
  m.hp_ = hp;
  m.n_users_ = n_users;
  m.n_items_ = n_items;
  m.bu_.assign(static_cast<std::size_t>(n_users), 0.0);
  m.bi_.assign(static_cast<std::size_t>(n_items), 0.0);
  m.pu_.assign(static_cast<std::size_t>(n_users) * hp.n_factors, 0.0);
  m.qi_.assign(static_cast<std::size_t>(n_items) * hp.n_factors, 0.0);
  m.seen_user_.assign(static_cast<std::size_t>(n_users), 0);
  m.seen_item_.assign(static_cast<std::size_t>(n_items), 0);

  for (const Interaction& x : ratings) {
    if (x.user < 0 || x.user >= n_users || x.item < 0 || x.item >= n_items)
      throw InvalidArgumentError("rating index out of range");
    m.seen_user_[x.user] = 1;
    m.seen_item_[x.item] = 1;
  }
  m.mu_ = mean_rating(ratings);

  SplitMix64 rng(mix64(hp.seed, kInitTag));
  for (int u = 0; u < n_users; ++u) {
    if (!m.seen_user_[u]) continue;
    double* row = &m.pu_[static_cast<std::size_t>(u) * hp.n_factors];
    for (int f = 0; f < hp.n_factors; ++f)
      row[f] = next_normal(rng, 0.0, hp.init_std);
  }
  for (int i = 0; i < n_items; ++i) {
    if (!m.seen_item_[i]) continue;
    double* row = &m.qi_[static_cast<std::size_t>(i) * hp.n_factors];
    for (int f = 0; f < hp.n_factors; ++f)
      row[f] = next_normal(rng, 0.0, hp.init_std);
  }
  return m;
}

void SvdModel::run_epochs(std::span<const Interaction> ratings, int n_epochs) {
  if (ratings.empty()) throw EmptyTrainingSetError("no training ratings");
  if (n_epochs < 0) throw InvalidArgumentError("n_epochs must be >= 0");

  for (const Interaction& x : ratings) {
    if (x.user < 0 || x.user >= n_users_ || x.item < 0 || x.item >= n_items_)
      throw InvalidArgumentError("rating index out of range");
    seen_user_[x.user] = 1;
    seen_item_[x.item] = 1;
  }
  mu_ = mean_rating(ratings);

  const int nf = hp_.n_factors;
  const double lr = hp_.learning_rate;
  const double reg = hp_.regularization;
  std::vector<std::uint32_t> order(ratings.size());

  for (int e = 0; e < n_epochs; ++e, ++epochs_done_) {
    std::iota(order.begin(), order.end(), 0u);
    SplitMix64 rng(mix64(hp_.seed, kEpochTag,
                         static_cast<std::uint64_t>(epochs_done_)));
    deterministic_shuffle(order, rng);
    for (std::uint32_t idx : order) {
      const Interaction& x = ratings[idx];
      double* pu = &pu_[static_cast<std::size_t>(x.user) * nf];
      double* qi = &qi_[static_cast<std::size_t>(x.item) * nf];
      double dot = 0.0;
      for (int f = 0; f < nf; ++f) dot += pu[f] * qi[f];
      const double err = x.rating - (mu_ + bu_[x.user] + bi_[x.item] + dot);
      bu_[x.user] += lr * (err - reg * bu_[x.user]);
      bi_[x.item] += lr * (err - reg * bi_[x.item]);
      for (int f = 0; f < nf; ++f) {
        const double p = pu[f];
        const double q = qi[f];
        pu[f] += lr * (err * q - reg * p);
        qi[f] += lr * (err * p - reg * q);
      }
    }
  }
}

SvdModel SvdModel::fit(std::span<const Interaction> ratings, int n_users,
                       int n_items, const SvdHyperParams& hp) {
  SvdModel m = initialize(ratings, n_users, n_items, hp);
  m.run_epochs(ratings, hp.n_epochs);
  return m;
}

SvdModel SvdModel::fit(const RatingSet& ratings, int n_users, int n_items,
                       const SvdHyperParams& hp) {
  return fit(std::span<const Interaction>(ratings.entries()), n_users, n_items,
             hp);
}

double SvdModel::predict(UserId user, ItemId item) const {
  if (user < 0 || user >= n_users_ || item < 0 || item >= n_items_)
    throw InvalidArgumentError("prediction index out of range");
  double est = mu_;
  if (seen_user_[user]) est += bu_[user];
  if (seen_item_[item]) est += bi_[item];
  if (seen_user_[user] && seen_item_[item]) {
    const double* pu = &pu_[static_cast<std::size_t>(user) * hp_.n_factors];
    const double* qi = &qi_[static_cast<std::size_t>(item) * hp_.n_factors];
    double dot = 0.0;
    for (int f = 0; f < hp_.n_factors; ++f) dot += pu[f] * qi[f];
    est += dot;
  }
  return std::clamp(est, hp_.rating_min, hp_.rating_max);
}

std::vector<double> SvdModel::squared_errors(
    std::span<const Interaction> entries) const {
  std::vector<const Interaction*> ptrs;
  ptrs.reserve(entries.size());
  for (const Interaction& x : entries) ptrs.push_back(&x);
  if (!std::is_sorted(ptrs.begin(), ptrs.end(),
                      [](const Interaction* a, const Interaction* b) {
                        return entry_less(*a, *b);
                      })) {
    std::sort(ptrs.begin(), ptrs.end(),
              [](const Interaction* a, const Interaction* b) {
                return entry_less(*a, *b);
              });
  }
  std::vector<double> out;
  out.reserve(ptrs.size());
  for (const Interaction* x : ptrs) {
    const double e = x->rating - predict(x->user, x->item);
    out.push_back(e * e);
  }
  return out;
}

double SvdModel::rmse(std::span<const Interaction> entries) const {
  if (entries.empty()) throw EmptyTestSetError("no test ratings");
  const std::vector<double> sq = squared_errors(entries);
  double sum = 0.0;
  for (double v : sq) sum += v;
  return std::sqrt(sum / static_cast<double>(sq.size()));
}

double SvdModel::rmse(const RatingSet& rs) const {
  return rmse(std::span<const Interaction>(rs.entries()));
}

std::span<const double> SvdModel::user_factors(UserId u) const {
  return {&pu_[static_cast<std::size_t>(u) * hp_.n_factors],
          static_cast<std::size_t>(hp_.n_factors)};
}

std::span<const double> SvdModel::item_factors(ItemId i) const {
  return {&qi_[static_cast<std::size_t>(i) * hp_.n_factors],
          static_cast<std::size_t>(hp_.n_factors)};
}

bool SvdModel::seen_user(UserId u) const {
  return u >= 0 && u < n_users_ && seen_user_[u] != 0;
}

bool SvdModel::seen_item(ItemId i) const {
  return i >= 0 && i < n_items_ && seen_item_[i] != 0;
}

namespace {

constexpr char kMagic[8] = {'M', 'F', 'S', 'V', 'D', '1', '\n', '\0'};

template <typename T>
void write_pod(std::ofstream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

template <typename T>
void read_pod(std::ifstream& in, T& v) {
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
}

template <typename T>
void write_vec(std::ofstream& out, const std::vector<T>& v) {
  const std::uint64_t n = v.size();
  write_pod(out, n);
  out.write(reinterpret_cast<const char*>(v.data()),
            static_cast<std::streamsize>(n * sizeof(T)));
}

template <typename T>
void read_vec(std::ifstream& in, std::vector<T>& v) {
  std::uint64_t n = 0;
  read_pod(in, n);
  v.resize(n);
  in.read(reinterpret_cast<char*>(v.data()),
          static_cast<std::streamsize>(n * sizeof(T)));
}

}  // namespace

void SvdModel::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out.write(kMagic, sizeof(kMagic));
  write_pod(out, hp_);
  write_pod(out, n_users_);
  write_pod(out, n_items_);
  write_pod(out, epochs_done_);
  write_pod(out, mu_);
  write_vec(out, bu_);
  write_vec(out, bi_);
  write_vec(out, pu_);
  write_vec(out, qi_);
  write_vec(out, seen_user_);
  write_vec(out, seen_item_);
  if (!out) throw IoError("write failed: " + path.string());
}

SvdModel SvdModel::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for reading: " + path.string());
  char magic[8] = {};
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw ParseError("not a model checkpoint: " + path.string());
  SvdModel m;
  read_pod(in, m.hp_);
  read_pod(in, m.n_users_);
  read_pod(in, m.n_items_);
  read_pod(in, m.epochs_done_);
  read_pod(in, m.mu_);
  read_vec(in, m.bu_);
  read_vec(in, m.bi_);
  read_vec(in, m.pu_);
  read_vec(in, m.qi_);
  read_vec(in, m.seen_user_);
  read_vec(in, m.seen_item_);
  if (!in) throw ParseError("truncated model checkpoint: " + path.string());
  return m;
}

bool operator==(const SvdModel& a, const SvdModel& b) {
  return a.n_users_ == b.n_users_ && a.n_items_ == b.n_items_ &&
         a.mu_ == b.mu_ && a.bu_ == b.bu_ && a.bi_ == b.bi_ &&
         a.pu_ == b.pu_ && a.qi_ == b.qi_ && a.seen_user_ == b.seen_user_ &&
         a.seen_item_ == b.seen_item_;
}

}  // namespace minifair
