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

#include <cinttypes>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "minifair.h"

namespace {

void progress_to_stderr(const char* run, int32_t iteration, int64_t n_known,
                        int64_t pool_remaining, void* /*user_data*/) {
  std::fprintf(stderr, "[%s] iteration %" PRId32 " known=%" PRId64
                       " pool=%" PRId64 "\n",
               run, iteration, n_known, pool_remaining);
}

int report_failure(const char* what) {
  std::fprintf(stderr, "error: %s: %s\n", what, mf_last_error());
  return 1;
}

nlohmann::json load_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CLI::ValidationError("--config", "cannot open " + path);
  const std::string text((std::istreambuf_iterator<char>(in)),
                         std::istreambuf_iterator<char>());
  return nlohmann::json::parse(text);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Data-minimization rating elicitation experiments"};
  app.set_version_flag("--version", mf_version());
  app.require_subcommand(1);
  int exit_code = 0;

  // run
  auto* run = app.add_subcommand(
      "run", "Run a strategy x mode x seed experiment grid");
  std::string config_path;
  std::string dataset_dir;
  std::string format;
  std::string out_dir;
  std::vector<std::string> strategies;
  std::vector<std::string> modes;
  std::vector<std::uint64_t> seeds;
  int threads = 0;
  int max_iterations = 0;
  int eval_every = 0;
  int query_size = 0;
  double user_sample = 0.0;
  bool quiet = false;
  auto* o_config =
      run->add_option("--config", config_path, "Experiment config JSON file")
          ->check(CLI::ExistingFile);
  auto* o_dataset =
      run->add_option("--dataset", dataset_dir, "Dataset directory");
  auto* o_format =
      run->add_option("--format", format, "Dataset format: ml-1m or ml-100k");
  auto* o_out = run->add_option("--out", out_dir, "Output directory");
  auto* o_strategy = run->add_option("--strategy", strategies,
                                     "Strategy name (repeatable)");
  auto* o_mode = run->add_option(
      "--mode", modes, "Acquisition mode: original or equal-ratio");
  auto* o_seed = run->add_option("--seed", seeds, "Run seed (repeatable)");
  auto* o_threads = run->add_option(
      "--threads", threads, "Parallel runs (default: MINIFAIR_THREADS or 1)");
  auto* o_maxit = run->add_option("--max-iterations", max_iterations,
                                  "Stop after this many sweeps");
  auto* o_evalev =
      run->add_option("--eval-every", eval_every, "Evaluate every N sweeps");
  auto* o_qsize = run->add_option("--query-size", query_size,
                                  "Items queried per user per sweep");
  auto* o_usample =
      run->add_option("--user-sample-fraction", user_sample,
                      "Random user subsample applied before the split");
  run->add_flag("--quiet", quiet, "Suppress progress output");
  run->callback([&]() {
    nlohmann::json cfg = nlohmann::json::object();
    if (o_config->count() > 0) cfg = load_json_file(config_path);
    if (o_dataset->count() > 0) cfg["dataset_path"] = dataset_dir;
    if (o_format->count() > 0) cfg["dataset_format"] = format;
    if (o_out->count() > 0) cfg["output_dir"] = out_dir;
    if (o_strategy->count() > 0) cfg["strategies"] = strategies;
    if (o_mode->count() > 0) cfg["modes"] = modes;
    if (o_seed->count() > 0) cfg["seeds"] = seeds;
    if (o_threads->count() > 0) cfg["threads"] = threads;
    if (o_usample->count() > 0) cfg["user_sample_fraction"] = user_sample;
    if (o_maxit->count() > 0) cfg["sim"]["max_iterations"] = max_iterations;
    if (o_evalev->count() > 0) cfg["sim"]["eval_every"] = eval_every;
    if (o_qsize->count() > 0) cfg["sim"]["query_size"] = query_size;
    const std::string text = cfg.dump();
    const mf_status st = mf_experiment_run(
        text.c_str(), quiet ? nullptr : progress_to_stderr, nullptr);
    if (st != MF_OK) exit_code = report_failure("run");
  });

  // plot-data
  auto* plot = app.add_subcommand(
      "plot-data", "Collect trace CSVs into a long-format plot data file");
  std::string plot_dir;
  std::string plot_file;
  plot->add_option("--out", plot_dir, "Experiment output directory")
      ->required()
      ->check(CLI::ExistingDirectory);
  plot->add_option("--file", plot_file,
                   "Destination file (default: <out>/plot_data.csv)");
  plot->callback([&]() {
    const std::string dest =
        plot_file.empty() ? plot_dir + "/plot_data.csv" : plot_file;
    if (mf_emit_plot_data(plot_dir.c_str(), dest.c_str()) != MF_OK)
      exit_code = report_failure("plot-data");
  });

  // inspect
  auto* inspect =
      app.add_subcommand("inspect", "Load a dataset and print its shape");
  std::string ins_dir;
  std::string ins_format = "ml-1m";
  double ins_fraction = 0.8;
  int ins_kcore = 5;
  std::uint64_t ins_seed = 0;
  double ins_sample = 1.0;
  inspect->add_option("--dataset", ins_dir, "Dataset directory")->required();
  inspect->add_option("--format", ins_format,
                      "Dataset format: ml-1m or ml-100k");
  inspect->add_option("--train-fraction", ins_fraction,
                      "Per-user train fraction");
  inspect->add_option("--k-core", ins_kcore, "k-core filter threshold");
  inspect->add_option("--seed", ins_seed, "Split seed");
  inspect->add_option("--user-sample-fraction", ins_sample,
                      "Random user subsample applied before the split");
  inspect->callback([&]() {
    mf_dataset* ds = nullptr;
    if (mf_dataset_load(ins_dir.c_str(), ins_format.c_str(), ins_fraction,
                        ins_kcore, ins_seed, ins_sample, &ds) != MF_OK) {
      exit_code = report_failure("inspect");
      return;
    }
    const double users = mf_dataset_n_users(ds);
    const double items = mf_dataset_n_items(ds);
    const double ratings = static_cast<double>(mf_dataset_n_train(ds)) +
                           static_cast<double>(mf_dataset_n_test(ds));
    std::printf("users: %" PRId32 "\n", mf_dataset_n_users(ds));
    std::printf("items: %" PRId32 "\n", mf_dataset_n_items(ds));
    std::printf("train ratings: %" PRId64 "\n", mf_dataset_n_train(ds));
    std::printf("test ratings: %" PRId64 "\n", mf_dataset_n_test(ds));
    std::printf("protected users: %" PRId32 "\n",
                mf_dataset_n_protected_users(ds));
    std::printf("density: %.4f\n",
                users > 0 && items > 0 ? ratings / (users * items) : 0.0);
    mf_dataset_free(ds);
  });

  // strategies
  auto* list =
      app.add_subcommand("strategies", "List available strategy names");
  list->callback([&]() {
    for (int k = 0; k < mf_strategy_count(); ++k)
      std::printf("%s\n", mf_strategy_name_at(k));
  });

  CLI11_PARSE(app, argc, argv);
  return exit_code;
}
