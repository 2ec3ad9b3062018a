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

#ifndef MINIFAIR_CORE_METRICS_HPP_
#define MINIFAIR_CORE_METRICS_HPP_

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "core/rating_set.hpp"
#include "core/svd.hpp"

namespace minifair {

struct WelchResult {
  double t = 0.0;
  double df = 0.0;
  double p = 1.0;
};

// Welch's unequal-variance t-test, two-tailed. Sample variances (ddof=1) are
// floored at 1e-12 so fully degenerate samples give a finite t and p -> 0
// instead of a division by zero. Throws InsufficientSamplesError when either
// sample has fewer than two values.
WelchResult welch_t_test(std::span<const double> a, std::span<const double> b);

// Two-tailed p for a Student-t statistic, via the regularized incomplete
// beta function I_x(df/2, 1/2) with x = df / (df + t^2).
double student_t_two_tailed_p(double t, double df);

// Sample unit for the significance test: individual squared errors, or each
// user's mean squared error.
enum class TTestUnit { kPerRating, kPerUser };

struct GroupReport {
  double rmse_protected = 0.0;
  double rmse_unprotected = 0.0;
  double rmse_diff = 0.0;  // rmse_protected - rmse_unprotected, exactly
  std::int64_t n_protected = 0;
  std::int64_t n_unprotected = 0;
  double t_statistic = 0.0;
  double p_value = 1.0;
  bool significant = false;  // p_value < 0.01
};

GroupReport group_report(const SvdModel& model, const RatingSet& test_protected,
                         const RatingSet& test_unprotected,
                         TTestUnit unit = TTestUnit::kPerRating);

struct TracePoint {
  int iteration = 0;
  std::int64_t n_known = 0;
  std::int64_t acq_protected = 0;
  std::int64_t acq_unprotected = 0;
  double rmse_all = 0.0;
  double rmse_protected = 0.0;
  double rmse_unprotected = 0.0;
  double rmse_diff = 0.0;
  double t_stat = 0.0;
  double p_value = 1.0;

  friend bool operator==(const TracePoint&, const TracePoint&) = default;
};

using SimulationTrace = std::vector<TracePoint>;

// Trailing mean: out[k] = mean(values[max(0, k-window+1) .. k]).
std::vector<double> rolling_mean(std::span<const double> values, int window);

// Writes the trace CSV (atomic temp + rename): fixed header, reals with six
// decimals, '\n' line endings. The rolling column is computed over the
// 6-decimal-rounded rmse_all values so that parsing a file and re-serializing
// it is byte-identical.
void trace_to_csv(const SimulationTrace& trace,
                  const std::filesystem::path& path);

SimulationTrace trace_from_csv(const std::filesystem::path& path);

}  // namespace minifair

#endif  // MINIFAIR_CORE_METRICS_HPP_
