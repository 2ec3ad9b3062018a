/*
 * Copyright 2026 The Minifair Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/*
 * C interface to the minifair core: dataset loading, single simulations and
 * full experiment grids. All functions return mf_status; on failure the
 * thread-local message from mf_last_error() describes what went wrong.
 * Handles are opaque and must be released with the matching *_free call.
 */

#ifndef MINIFAIR_H_
#define MINIFAIR_H_

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum mf_status {
  MF_OK = 0,
  MF_ERROR_INVALID_ARGUMENT = 1,
  MF_ERROR_IO = 2,
  MF_ERROR_PARSE = 3,
  MF_ERROR_NOT_FOUND = 4,
  MF_ERROR_DUPLICATE = 5,
  MF_ERROR_EMPTY_INPUT = 6,
  MF_ERROR_EXHAUSTED = 7,
  MF_ERROR_INTERNAL = 8
} mf_status;

const char* mf_version(void);

/* Message for the most recent failure on this thread; empty string if none. */
const char* mf_last_error(void);

int mf_strategy_count(void);
const char* mf_strategy_name_at(int index);

typedef struct mf_dataset mf_dataset;

/* Loads and prepares a dataset directory: parse, k-core filter, optional
 * user subsample, dense remap, per-user train/test split.
 * format: "ml-1m" or "ml-100k". */
mf_status mf_dataset_load(const char* dir, const char* format,
                          double train_fraction, int k_core, uint64_t seed,
                          double user_sample_fraction, mf_dataset** out);
void mf_dataset_free(mf_dataset* dataset);

int32_t mf_dataset_n_users(const mf_dataset* dataset);
int32_t mf_dataset_n_items(const mf_dataset* dataset);
int64_t mf_dataset_n_train(const mf_dataset* dataset);
int64_t mf_dataset_n_test(const mf_dataset* dataset);
int32_t mf_dataset_n_protected_users(const mf_dataset* dataset);

typedef struct mf_trace mf_trace;

typedef struct mf_trace_point {
  int32_t iteration;
  int64_t n_known;
  int64_t acq_protected;
  int64_t acq_unprotected;
  double rmse_all;
  double rmse_protected;
  double rmse_unprotected;
  double rmse_diff;
  double t_stat;
  double p_value;
} mf_trace_point;

/* run: file-style run label ("sim" for single simulations). Called after
 * every sweep; may be invoked from worker threads but never concurrently. */
typedef void (*mf_progress_fn)(const char* run, int32_t iteration,
                               int64_t n_known, int64_t pool_remaining,
                               void* user_data);

/* config_json: simulation fields at top level (query_size,
 * known_init_fraction, max_iterations, eval_every, hyperparams, ...) plus
 * "strategy", "seed" and "equal_ratio" (or "mode"). */
mf_status mf_simulate(const mf_dataset* dataset, const char* config_json,
                      mf_progress_fn progress, void* user_data,
                      mf_trace** out);

size_t mf_trace_size(const mf_trace* trace);
mf_status mf_trace_get(const mf_trace* trace, size_t index,
                       mf_trace_point* out);
mf_status mf_trace_write_csv(const mf_trace* trace, const char* path);
void mf_trace_free(mf_trace* trace);

/* Full strategy x mode x seed grid from an experiment config JSON document.
 * Writes one trace CSV per run plus summary.csv into the configured output
 * directory. Returns MF_OK only if every run succeeded. */
mf_status mf_experiment_run(const char* config_json, mf_progress_fn progress,
                            void* user_data);

/* Collects every trace CSV in output_dir into a long-format plot data file. */
mf_status mf_emit_plot_data(const char* output_dir, const char* path);

#ifdef __cplusplus
}
#endif

#endif /* MINIFAIR_H_ */
