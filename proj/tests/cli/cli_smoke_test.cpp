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

// Smoke test for the command line tool. The path to the binary is the first
// non-flag argument (ctest passes $<TARGET_FILE:minifair_cli>); remaining
// arguments go to doctest.

#define DOCTEST_CONFIG_IMPLEMENT
#include "doctest.h"

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace {

std::string g_cli;

struct TempDir {
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    root = std::filesystem::temp_directory_path() /
           ("minifair_cli_" + tag + "_" + std::to_string(counter++));
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

struct CliResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

CliResult run_cli(const std::string& args) {
  REQUIRE(!g_cli.empty());
  TempDir cap("capture");
  const std::string out_path = cap.file("out.txt").string();
  const std::string err_path = cap.file("err.txt").string();
  const std::string cmd =
      "\"" + g_cli + "\" " + args + " >\"" + out_path + "\" 2>\"" + err_path +
      "\"";
  const int status = std::system(cmd.c_str());
  CliResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = read_text(out_path);
  r.err = read_text(err_path);
  return r;
}

}  // namespace

TEST_CASE("--version prints the library version") {
  const CliResult r = run_cli("--version");
  CHECK(r.exit_code == 0);
  CHECK(r.out.find("1.0.0") != std::string::npos);
}

TEST_CASE("strategies lists all ten names") {
  const CliResult r = run_cli("strategies");
  CHECK(r.exit_code == 0);
  CHECK(r.out.find("random\n") != std::string::npos);
  CHECK(r.out.find("greedy-extend\n") != std::string::npos);
  int lines = 0;
  for (char c : r.out)
    if (c == '\n') ++lines;
  CHECK(lines == 10);
}

TEST_CASE("inspect prints the dataset shape") {
  TempDir dir("inspect");
  write_ml100k(dir.root);
  const CliResult r =
      run_cli("inspect --dataset \"" + dir.root.string() +
              "\" --format ml-100k --k-core 1");
  CHECK(r.exit_code == 0);
  CHECK(r.out.find("users: 6\n") != std::string::npos);
  CHECK(r.out.find("items: 5\n") != std::string::npos);
  CHECK(r.out.find("train ratings: 24\n") != std::string::npos);
  CHECK(r.out.find("test ratings: 6\n") != std::string::npos);
  CHECK(r.out.find("protected users: 3\n") != std::string::npos);

  const CliResult bad =
      run_cli("inspect --dataset \"" + dir.file("nope").string() +
              "\" --format ml-100k");
  CHECK(bad.exit_code == 1);
  CHECK(bad.err.find("error:") != std::string::npos);
}

TEST_CASE("run executes a grid from a config file and plot-data collects it") {
  TempDir dir("run");
  write_ml100k(dir.root);
  const std::filesystem::path out_dir = dir.file("out");
  std::ostringstream cfg;
  cfg << R"({
    "dataset_path": ")"
      << dir.root.string() << R"(",
    "dataset_format": "ml-100k",
    "output_dir": ")"
      << out_dir.string() << R"(",
    "strategies": ["random"],
    "seeds": [1],
    "split": {"train_fraction": 0.8, "k_core": 1, "seed": 7},
    "sim": {
      "query_size": 2,
      "known_init_fraction": 0.1,
      "eval_every": 2,
      "hyperparams": {"n_factors": 2, "n_epochs": 2}
    },
    "checkpoints": [0, 5]
  })";
  write_text(dir.file("cfg.json"), cfg.str());

  const CliResult r =
      run_cli("run --config \"" + dir.file("cfg.json").string() + "\" --quiet");
  CHECK(r.exit_code == 0);
  CHECK(std::filesystem::exists(out_dir / "random_original_seed1.csv"));
  CHECK(std::filesystem::exists(out_dir / "summary.csv"));

  // Flag overrides layer on top of the config document.
  const CliResult r2 = run_cli("run --config \"" +
                               dir.file("cfg.json").string() +
                               "\" --strategy pop --seed 2 --quiet");
  CHECK(r2.exit_code == 0);
  CHECK(std::filesystem::exists(out_dir / "pop_original_seed2.csv"));

  const CliResult plot = run_cli("plot-data --out \"" + out_dir.string() +
                                 "\"");
  CHECK(plot.exit_code == 0);
  REQUIRE(std::filesystem::exists(out_dir / "plot_data.csv"));
  const std::string body = read_text(out_dir / "plot_data.csv");
  CHECK(body.rfind("strategy,mode,seed,iteration,series,value\n", 0) == 0);

  const CliResult bad = run_cli("run --config \"" +
                                dir.file("cfg.json").string() +
                                "\" --strategy bogus --quiet");
  CHECK(bad.exit_code == 1);
  CHECK(bad.err.find("error:") != std::string::npos);
}

TEST_CASE("bad invocations exit nonzero") {
  CHECK(run_cli("frobnicate").exit_code != 0);
  CHECK(run_cli("run --config /does/not/exist.json").exit_code != 0);
  CHECK(run_cli("").exit_code != 0);  // a subcommand is required
}

int run_all(int argc, char** argv) {
  std::vector<const char*> rest;
  rest.push_back(argc > 0 ? argv[0] : "cli_smoke");
  for (int k = 1; k < argc; ++k) {
    if (g_cli.empty() && argv[k][0] != '-') {
      g_cli = argv[k];
      continue;
    }
    rest.push_back(argv[k]);
  }
  doctest::Context ctx(static_cast<int>(rest.size()),
                       const_cast<char**>(rest.data()));
  return ctx.run();
}

int main(int argc, char** argv) { return run_all(argc, argv); }
