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

// Exercises the shared library the way an external consumer would: only the
// public C header, no core internals.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include "minifair.h"

namespace {

struct TempDir {
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    root = std::filesystem::temp_directory_path() /
           ("minifair_capi_" + tag + "_" + std::to_string(counter++));
    std::filesystem::remove_all(root);
    std::filesystem::create_directories(root);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(root, ec);
  }
  std::filesystem::path file(const std::string& name) const {
    return root / name;
  }
  std::filesystem::path root;
};

void write_text(const std::filesystem::path& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  REQUIRE(out.good());
  out << body;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream body;
  body << in.rdbuf();
  return body.str();
}

// Six users rating the same five items (complete bipartite, so any k-core
// keeps it). Odd users are female and land in the protected group.
void write_ml100k(const std::filesystem::path& dir) {
  std::ostringstream data;
  for (int u = 1; u <= 6; ++u)
    for (int i = 10; i <= 14; ++i)
      data << u << '\t' << i << '\t' << 1 + (u + i) % 5 << '\t' << 97000 + u
           << '\n';
  write_text(dir / "u.data", data.str());

  std::ostringstream users;
  for (int u = 1; u <= 6; ++u)
    users << u << "|25|" << (u % 2 == 1 ? 'F' : 'M') << "|artist|00000\n";
  write_text(dir / "u.user", users.str());
}

struct ProgressLog {
  int calls = 0;
  bool labels_ok = true;
  std::string expected;
};

void on_progress(const char* run, int32_t, int64_t, int64_t, void* user_data) {
  auto* log = static_cast<ProgressLog*>(user_data);
  ++log->calls;
  if (log->expected != run && log->expected != "*") log->labels_ok = false;
}

const char* kSimConfig = R"({
  "strategy": "random",
  "seed": 3,
  "query_size": 2,
  "known_init_fraction": 0.1,
  "eval_every": 1,
  "hyperparams": {"n_factors": 2, "n_epochs": 2}
})";

}  // namespace

TEST_CASE("version and strategy catalogue") {
  REQUIRE(mf_version() != nullptr);
  CHECK(std::string(mf_version()) == "1.0.0");
  REQUIRE(mf_strategy_count() == 10);
  std::set<std::string> names;
  for (int k = 0; k < mf_strategy_count(); ++k) {
    const char* name = mf_strategy_name_at(k);
    REQUIRE(name != nullptr);
    names.insert(name);
  }
  CHECK(names.size() == 10);
  CHECK(names.count("random") == 1);
  CHECK(names.count("greedy-extend") == 1);
  CHECK(mf_strategy_name_at(-1) == nullptr);
  CHECK(mf_strategy_name_at(mf_strategy_count()) == nullptr);
}

TEST_CASE("dataset loading and accessors") {
  TempDir dir("data");
  write_ml100k(dir.root);

  mf_dataset* ds = nullptr;
  REQUIRE(mf_dataset_load(dir.root.c_str(), "ml-100k", 0.8, 1, 7, 1.0, &ds) ==
          MF_OK);
  REQUIRE(ds != nullptr);
  CHECK(mf_dataset_n_users(ds) == 6);
  CHECK(mf_dataset_n_items(ds) == 5);
  CHECK(mf_dataset_n_train(ds) == 24);  // ceil(0.8 * 5) per user
  CHECK(mf_dataset_n_test(ds) == 6);
  CHECK(mf_dataset_n_protected_users(ds) == 3);
  mf_dataset_free(ds);

  CHECK(mf_dataset_n_users(nullptr) == 0);
  CHECK(mf_dataset_n_train(nullptr) == 0);
}

TEST_CASE("dataset loading reports errors through status codes") {
  TempDir dir("data");
  write_ml100k(dir.root);
  mf_dataset* ds = nullptr;

  CHECK(mf_dataset_load(nullptr, "ml-100k", 0.8, 1, 7, 1.0, &ds) ==
        MF_ERROR_INVALID_ARGUMENT);
  CHECK(std::string(mf_last_error()).size() > 0);
  CHECK(mf_dataset_load(dir.root.c_str(), "netflix", 0.8, 1, 7, 1.0, &ds) ==
        MF_ERROR_INVALID_ARGUMENT);
  CHECK(mf_dataset_load(dir.root.c_str(), "ml-100k", 1.5, 1, 7, 1.0, &ds) ==
        MF_ERROR_INVALID_ARGUMENT);
  const std::filesystem::path missing = dir.file("nope");
  CHECK(mf_dataset_load(missing.c_str(), "ml-100k", 0.8, 1, 7, 1.0, &ds) ==
        MF_ERROR_IO);
  CHECK(ds == nullptr);
  CHECK(mf_dataset_load(dir.root.c_str(), "ml-100k", 0.8, 1, 7, 1.0,
                        nullptr) == MF_ERROR_INVALID_ARGUMENT);

  // A success clears the error message.
  REQUIRE(mf_dataset_load(dir.root.c_str(), "ml-100k", 0.8, 1, 7, 1.0, &ds) ==
          MF_OK);
  CHECK(std::string(mf_last_error()).empty());
  mf_dataset_free(ds);
}

TEST_CASE("a simulation runs end to end through the C surface") {
  TempDir dir("sim");
  write_ml100k(dir.root);
  mf_dataset* ds = nullptr;
  REQUIRE(mf_dataset_load(dir.root.c_str(), "ml-100k", 0.8, 1, 7, 1.0, &ds) ==
          MF_OK);

  ProgressLog log;
  log.expected = "sim";
  mf_trace* trace = nullptr;
  REQUIRE(mf_simulate(ds, kSimConfig, on_progress, &log, &trace) == MF_OK);
  REQUIRE(trace != nullptr);
  CHECK(log.calls > 0);
  CHECK(log.labels_ok);

  const size_t n = mf_trace_size(trace);
  REQUIRE(n >= 2);
  mf_trace_point first;
  REQUIRE(mf_trace_get(trace, 0, &first) == MF_OK);
  CHECK(first.iteration == 0);
  CHECK(first.n_known == 2);  // llround(0.1 * 24)
  CHECK(first.rmse_all > 0.0);
  mf_trace_point prev = first;
  for (size_t k = 1; k < n; ++k) {
    mf_trace_point p;
    REQUIRE(mf_trace_get(trace, k, &p) == MF_OK);
    CHECK(p.iteration > prev.iteration);
    CHECK(p.n_known >= prev.n_known);
    prev = p;
  }
  CHECK(prev.n_known == 24);  // pool exhausted: everything acquired

  mf_trace_point out;
  CHECK(mf_trace_get(trace, n, &out) == MF_ERROR_INVALID_ARGUMENT);
  CHECK(mf_trace_get(nullptr, 0, &out) == MF_ERROR_INVALID_ARGUMENT);

  const std::filesystem::path csv = dir.file("trace.csv");
  REQUIRE(mf_trace_write_csv(trace, csv.c_str()) == MF_OK);
  const std::string body = read_text(csv);
  CHECK(body.rfind("iteration,n_known,acq_protected,acq_unprotected,", 0) ==
        0);
  mf_trace_free(trace);

  mf_trace* bad = nullptr;
  CHECK(mf_simulate(ds, "not json", nullptr, nullptr, &bad) == MF_ERROR_PARSE);
  CHECK(mf_simulate(ds, R"({"strategy": "bogus"})", nullptr, nullptr, &bad) ==
        MF_ERROR_INVALID_ARGUMENT);
  CHECK(mf_simulate(nullptr, kSimConfig, nullptr, nullptr, &bad) ==
        MF_ERROR_INVALID_ARGUMENT);
  CHECK(bad == nullptr);
  mf_dataset_free(ds);
}

TEST_CASE("an experiment grid runs from a config document") {
  TempDir dir("exp");
  write_ml100k(dir.root);
  const std::filesystem::path out_dir = dir.file("out");

  std::ostringstream cfg;
  cfg << R"({
    "dataset_path": ")"
      << dir.root.string() << R"(",
    "dataset_format": "ml-100k",
    "output_dir": ")"
      << out_dir.string() << R"(",
    "strategies": ["random", "pop"],
    "modes": ["original"],
    "seeds": [1],
    "split": {"train_fraction": 0.8, "k_core": 1, "seed": 7},
    "sim": {
      "query_size": 2,
      "known_init_fraction": 0.1,
      "eval_every": 2,
      "hyperparams": {"n_factors": 2, "n_epochs": 2}
    },
    "checkpoints": [0, 5],
    "threads": 1
  })";

  ProgressLog log;
  log.expected = "*";
  REQUIRE(mf_experiment_run(cfg.str().c_str(), on_progress, &log) == MF_OK);
  CHECK(log.calls > 0);
  CHECK(std::filesystem::exists(out_dir / "random_original_seed1.csv"));
  CHECK(std::filesystem::exists(out_dir / "pop_original_seed1.csv"));
  CHECK(std::filesystem::exists(out_dir / "summary.csv"));

  const std::filesystem::path plot = dir.file("plot.csv");
  REQUIRE(mf_emit_plot_data(out_dir.c_str(), plot.c_str()) == MF_OK);
  const std::string body = read_text(plot);
  CHECK(body.rfind("strategy,mode,seed,iteration,series,value\n", 0) == 0);
  CHECK(body.find("random,original,1,") != std::string::npos);
  CHECK(body.find(",rolling_w10,") != std::string::npos);

  CHECK(mf_experiment_run(nullptr, nullptr, nullptr) ==
        MF_ERROR_INVALID_ARGUMENT);
  CHECK(mf_experiment_run("{ bad", nullptr, nullptr) == MF_ERROR_PARSE);
  const std::filesystem::path missing = dir.file("nosuch");
  CHECK(mf_emit_plot_data(missing.c_str(), plot.c_str()) != MF_OK);
}
