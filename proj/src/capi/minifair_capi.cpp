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

#include "minifair.h"

#include <algorithm>
#include <filesystem>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "core/errors.hpp"
#include "core/experiment.hpp"
#include "core/ingest.hpp"
#include "core/metrics.hpp"
#include "core/simulation.hpp"

namespace {

thread_local std::string g_last_error;

mf_status classify(const std::exception& e) {
  using namespace minifair;
  if (dynamic_cast<const IoError*>(&e)) return MF_ERROR_IO;
  if (dynamic_cast<const ParseError*>(&e)) return MF_ERROR_PARSE;
  if (dynamic_cast<const DuplicateEntryError*>(&e)) return MF_ERROR_DUPLICATE;
  if (dynamic_cast<const NotFoundError*>(&e)) return MF_ERROR_NOT_FOUND;
  if (dynamic_cast<const UnknownUserError*>(&e)) return MF_ERROR_NOT_FOUND;
  if (dynamic_cast<const ExhaustedError*>(&e)) return MF_ERROR_EXHAUSTED;
  if (dynamic_cast<const EmptyTrainingSetError*>(&e) ||
      dynamic_cast<const EmptyTestSetError*>(&e) ||
      dynamic_cast<const EmptyGroupError*>(&e) ||
      dynamic_cast<const EmptyValidationSetError*>(&e) ||
      dynamic_cast<const DegenerateUserError*>(&e) ||
      dynamic_cast<const InsufficientSamplesError*>(&e))
    return MF_ERROR_EMPTY_INPUT;
  if (dynamic_cast<const InvalidArgumentError*>(&e) ||
      dynamic_cast<const MissingModelError*>(&e))
    return MF_ERROR_INVALID_ARGUMENT;
  return MF_ERROR_INTERNAL;
}

template <typename Fn>
mf_status guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return MF_OK;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return classify(e);
  } catch (...) {
    g_last_error = "unknown error";
    return MF_ERROR_INTERNAL;
  }
}

mf_status fail(mf_status code, const char* message) {
  g_last_error = message;
  return code;
}

}  // namespace

struct mf_dataset {
  minifair::Dataset data;
};

struct mf_trace {
  minifair::SimulationTrace points;
};

extern "C" {

const char* mf_version(void) { return "1.0.0"; }

const char* mf_last_error(void) { return g_last_error.c_str(); }

int mf_strategy_count(void) {
  return static_cast<int>(minifair::all_strategies().size());
}

const char* mf_strategy_name_at(int index) {
  const auto all = minifair::all_strategies();
  if (index < 0 || static_cast<std::size_t>(index) >= all.size())
    return nullptr;
  return minifair::strategy_name(all[index]).data();
}

mf_status mf_dataset_load(const char* dir, const char* format,
                          double train_fraction, int k_core, uint64_t seed,
                          double user_sample_fraction, mf_dataset** out) {
  if (out == nullptr)
    return fail(MF_ERROR_INVALID_ARGUMENT, "out must not be null");
  *out = nullptr;
  if (dir == nullptr || format == nullptr)
    return fail(MF_ERROR_INVALID_ARGUMENT, "dir and format must not be null");
  return guarded([&]() {
    const minifair::DatasetFormat fmt =
        minifair::dataset_format_from_name(format);
    minifair::SplitConfig split;
    split.train_fraction = train_fraction;
    split.k_core = k_core;
    split.seed = seed;
    const auto [ratings, users] = minifair::dataset_paths(dir, fmt);
    auto handle = std::make_unique<mf_dataset>();
    handle->data = minifair::load_dataset(ratings, users, fmt, split,
                                          user_sample_fraction);
    *out = handle.release();
  });
}

void mf_dataset_free(mf_dataset* dataset) { delete dataset; }

int32_t mf_dataset_n_users(const mf_dataset* dataset) {
  return dataset == nullptr ? 0 : dataset->data.n_users();
}

int32_t mf_dataset_n_items(const mf_dataset* dataset) {
  return dataset == nullptr ? 0 : dataset->data.n_items();
}

int64_t mf_dataset_n_train(const mf_dataset* dataset) {
  return dataset == nullptr
             ? 0
             : static_cast<int64_t>(dataset->data.train.size());
}

int64_t mf_dataset_n_test(const mf_dataset* dataset) {
  return dataset == nullptr ? 0
                            : static_cast<int64_t>(dataset->data.test.size());
}

int32_t mf_dataset_n_protected_users(const mf_dataset* dataset) {
  return dataset == nullptr ? 0 : dataset->data.n_protected_users();
}

mf_status mf_simulate(const mf_dataset* dataset, const char* config_json,
                      mf_progress_fn progress, void* user_data,
                      mf_trace** out) {
  if (out == nullptr)
    return fail(MF_ERROR_INVALID_ARGUMENT, "out must not be null");
  *out = nullptr;
  if (dataset == nullptr || config_json == nullptr)
    return fail(MF_ERROR_INVALID_ARGUMENT,
                "dataset and config_json must not be null");
  return guarded([&]() {
    const minifair::SimulationConfig cfg =
        minifair::simulation_config_from_json(config_json);
    minifair::ProgressFn cb;
    if (progress != nullptr) {
      cb = [progress, user_data](int iteration, std::size_t n_known,
                                 std::size_t pool_remaining) {
        progress("sim", iteration, static_cast<int64_t>(n_known),
                 static_cast<int64_t>(pool_remaining), user_data);
      };
    }
    auto handle = std::make_unique<mf_trace>();
    handle->points = minifair::run_simulation(dataset->data, cfg, cb);
    *out = handle.release();
  });
}

size_t mf_trace_size(const mf_trace* trace) {
  return trace == nullptr ? 0 : trace->points.size();
}

mf_status mf_trace_get(const mf_trace* trace, size_t index,
                       mf_trace_point* out) {
  if (trace == nullptr || out == nullptr)
    return fail(MF_ERROR_INVALID_ARGUMENT, "trace and out must not be null");
  if (index >= trace->points.size())
    return fail(MF_ERROR_INVALID_ARGUMENT, "trace index out of range");
  const minifair::TracePoint& p = trace->points[index];
  out->iteration = p.iteration;
  out->n_known = p.n_known;
  out->acq_protected = p.acq_protected;
  out->acq_unprotected = p.acq_unprotected;
  out->rmse_all = p.rmse_all;
  out->rmse_protected = p.rmse_protected;
  out->rmse_unprotected = p.rmse_unprotected;
  out->rmse_diff = p.rmse_diff;
  out->t_stat = p.t_stat;
  out->p_value = p.p_value;
  return MF_OK;
}

mf_status mf_trace_write_csv(const mf_trace* trace, const char* path) {
  if (trace == nullptr || path == nullptr)
    return fail(MF_ERROR_INVALID_ARGUMENT, "trace and path must not be null");
  return guarded([&]() { minifair::trace_to_csv(trace->points, path); });
}

void mf_trace_free(mf_trace* trace) { delete trace; }

mf_status mf_experiment_run(const char* config_json, mf_progress_fn progress,
                            void* user_data) {
  if (config_json == nullptr)
    return fail(MF_ERROR_INVALID_ARGUMENT, "config_json must not be null");
  return guarded([&]() {
    const minifair::ExperimentConfig cfg =
        minifair::ExperimentConfig::from_json(config_json);
    minifair::ExperimentProgressFn cb;
    if (progress != nullptr) {
      cb = [progress, user_data](const std::string& run, int iteration,
                                 std::size_t n_known,
                                 std::size_t pool_remaining) {
        progress(run.c_str(), iteration, static_cast<int64_t>(n_known),
                 static_cast<int64_t>(pool_remaining), user_data);
      };
    }
    const std::vector<minifair::RunOutcome> outcomes =
        minifair::run_experiment(cfg, cb);
    std::string failures;
    for (const minifair::RunOutcome& o : outcomes) {
      if (o.ok) continue;
      if (!failures.empty()) failures += "; ";
      failures += minifair::trace_file_name(o.strategy, o.mode, o.seed) +
                  ": " + o.error;
    }
    if (!failures.empty()) throw minifair::Error(failures);
  });
}

mf_status mf_emit_plot_data(const char* output_dir, const char* path) {
  if (output_dir == nullptr || path == nullptr)
    return fail(MF_ERROR_INVALID_ARGUMENT,
                "output_dir and path must not be null");
  return guarded([&]() {
    std::vector<std::string> names;
    for (const auto& entry :
         std::filesystem::directory_iterator(output_dir)) {
      if (!entry.is_regular_file()) continue;
      const std::string name = entry.path().filename().string();
      if (name == "summary.csv" || !name.ends_with(".csv")) continue;
      names.push_back(name);
    }
    std::sort(names.begin(), names.end());
    std::vector<std::pair<minifair::TraceMeta, minifair::SimulationTrace>>
        traces;
    for (const std::string& name : names) {
      minifair::TraceMeta meta;
      try {
        meta = minifair::trace_meta_from_file_name(name);
      } catch (const minifair::ParseError&) {
        continue;  // not a trace file
      }
      traces.emplace_back(
          meta, minifair::trace_from_csv(std::filesystem::path(output_dir) /
                                         name));
    }
    minifair::emit_plot_data(traces, path);
  });
}

}  // extern "C"
