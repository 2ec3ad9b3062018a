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

#ifndef MINIFAIR_CORE_EXPERIMENT_HPP_
#define MINIFAIR_CORE_EXPERIMENT_HPP_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "core/ingest.hpp"
#include "core/metrics.hpp"
#include "core/simulation.hpp"
#include "core/strategies.hpp"

namespace minifair {

enum class AcquisitionMode { kOriginal, kEqualRatio };

std::string_view mode_name(AcquisitionMode mode);
AcquisitionMode mode_from_name(std::string_view name);

// Grid description: one simulation per strategy x mode x seed. Parsed from a
// JSON document; every field has a default except that the lists must stay
// non-empty. sim.strategy / sim.equal_ratio / sim.seed are overridden per run.
struct ExperimentConfig {
  std::filesystem::path dataset_path;
  DatasetFormat dataset_format = DatasetFormat::kMl1m;
  std::filesystem::path output_dir = "out";
  std::vector<StrategyKind> strategies{all_strategies().begin(),
                                       all_strategies().end()};
  std::vector<AcquisitionMode> modes{AcquisitionMode::kOriginal};
  std::vector<std::uint64_t> seeds{42};
  SplitConfig split;
  SimulationConfig sim;
  double user_sample_fraction = 1.0;
  std::vector<int> checkpoints{0, 50, 100, 150, 200, 250, 300};
  int threads = 0;  // 0: MINIFAIR_THREADS, else 1

  void validate() const;
  std::string to_json() const;
  static ExperimentConfig from_json(const std::string& text);
  static ExperimentConfig from_json_file(const std::filesystem::path& path);
};

// `threads` resolved against the MINIFAIR_THREADS environment variable.
int resolve_threads(int requested);

// Single-run config from a JSON object holding the sim fields at top level
// plus "strategy", "seed" and either "equal_ratio" or "mode".
SimulationConfig simulation_config_from_json(const std::string& text);

std::string trace_file_name(StrategyKind strategy, AcquisitionMode mode,
                            std::uint64_t seed);

struct RunOutcome {
  StrategyKind strategy = StrategyKind::kRandom;
  AcquisitionMode mode = AcquisitionMode::kOriginal;
  std::uint64_t seed = 0;
  std::filesystem::path trace_path;
  bool ok = false;
  std::string error;
  SimulationTrace trace;
};

using ExperimentProgressFn =
    std::function<void(const std::string& run, int iteration,
                       std::size_t n_known, std::size_t pool_remaining)>;

// Runs the whole grid (parallel across runs, `threads` workers), writing one
// trace CSV per run into output_dir plus a summary.csv with the trace rows
// nearest each requested checkpoint. A failed run leaves its partial trace
// as <name>.csv.partial and is reported in the outcome, not thrown.
std::vector<RunOutcome> run_experiment(
    const ExperimentConfig& cfg, const ExperimentProgressFn& progress = nullptr);

// Same grid against an already loaded dataset (the paths in cfg are ignored).
std::vector<RunOutcome> run_experiment(
    const ExperimentConfig& cfg, const Dataset& dataset,
    const ExperimentProgressFn& progress = nullptr);

struct TraceMeta {
  StrategyKind strategy = StrategyKind::kRandom;
  AcquisitionMode mode = AcquisitionMode::kOriginal;
  std::uint64_t seed = 0;
};

// Parses "{strategy}_{mode}_seed{seed}.csv"; throws ParseError otherwise.
TraceMeta trace_meta_from_file_name(const std::string& name);

// Long-format CSV `strategy,mode,seed,iteration,series,value` with four
// series per trace point: rmse_all, rmse_protected, rmse_unprotected and
// rolling_w10 (same rounded rolling mean the trace CSV carries).
void emit_plot_data(
    std::span<const std::pair<TraceMeta, SimulationTrace>> traces,
    const std::filesystem::path& path);

void write_summary_csv(std::span<const RunOutcome> outcomes,
                       std::span<const int> checkpoints,
                       const std::filesystem::path& path);

}  // namespace minifair

#endif  // MINIFAIR_CORE_EXPERIMENT_HPP_
