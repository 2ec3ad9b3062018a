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

#include "core/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <string>

#include "core/errors.hpp"

namespace minifair {
namespace {

constexpr double kVarianceFloor = 1e-12;

// Continued fraction for the regularized incomplete beta function,
// evaluated with the modified Lentz method.
double beta_cf(double a, double b, double x) {
  constexpr int kMaxIter = 300;
  constexpr double kEps = 3e-16;
  constexpr double kTiny = 1e-300;

  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) break;
  }
  return h;
}

double reg_inc_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double ln_bt = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                       a * std::log(x) + b * std::log1p(-x);
  const double bt = std::exp(ln_bt);
  if (x < (a + 1.0) / (a + b + 2.0)) return bt * beta_cf(a, b, x) / a;
  return 1.0 - bt * beta_cf(b, a, 1.0 - x) / b;
}

double sample_mean(std::span<const double> v) {
  double sum = 0.0;
  for (double x : v) sum += x;
  return sum / static_cast<double>(v.size());
}

double sample_variance(std::span<const double> v, double mean) {
  double ss = 0.0;
  for (double x : v) {
    const double d = x - mean;
    ss += d * d;
  }
  return ss / static_cast<double>(v.size() - 1);
}

}  // namespace

double student_t_two_tailed_p(double t, double df) {
  if (!(df > 0.0)) throw InvalidArgumentError("df must be > 0");
  const double x = df / (df + t * t);
  return std::clamp(reg_inc_beta(df / 2.0, 0.5, x), 0.0, 1.0);
}

WelchResult welch_t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2)
    throw InsufficientSamplesError("welch_t_test needs >= 2 values per sample");

  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  const double ma = sample_mean(a);
  const double mb = sample_mean(b);
  const double va = std::max(sample_variance(a, ma), kVarianceFloor);
  const double vb = std::max(sample_variance(b, mb), kVarianceFloor);

  const double sa = va / na;
  const double sb = vb / nb;
  WelchResult r;
  r.t = (ma - mb) / std::sqrt(sa + sb);
  r.df = (sa + sb) * (sa + sb) /
         (sa * sa / (na - 1.0) + sb * sb / (nb - 1.0));
  r.p = student_t_two_tailed_p(r.t, r.df);
  return r;
}

namespace {

std::vector<double> per_rating_squared_errors(const SvdModel& model,
                                              const RatingSet& rs) {
  return model.squared_errors(std::span<const Interaction>(rs.entries()));
}

// One sample per user: the mean squared error over that user's test ratings,
// in ascending user order.
std::vector<double> per_user_squared_errors(const SvdModel& model,
                                            const RatingSet& rs) {
  std::vector<double> out;
  const std::vector<Interaction> entries = rs.entries();
  std::size_t k = 0;
  while (k < entries.size()) {
    const UserId u = entries[k].user;
    double sum = 0.0;
    int n = 0;
    while (k < entries.size() && entries[k].user == u) {
      const double e = entries[k].rating -
                       model.predict(entries[k].user, entries[k].item);
      sum += e * e;
      ++n;
      ++k;
    }
    out.push_back(sum / n);
  }
  return out;
}

}  // namespace

GroupReport group_report(const SvdModel& model,
                         const RatingSet& test_protected,
                         const RatingSet& test_unprotected, TTestUnit unit) {
  if (test_protected.empty())
    throw EmptyGroupError("protected test set is empty");
  if (test_unprotected.empty())
    throw EmptyGroupError("unprotected test set is empty");

  GroupReport r;
  r.rmse_protected = model.rmse(test_protected);
  r.rmse_unprotected = model.rmse(test_unprotected);
  r.rmse_diff = r.rmse_protected - r.rmse_unprotected;
  r.n_protected = static_cast<std::int64_t>(test_protected.size());
  r.n_unprotected = static_cast<std::int64_t>(test_unprotected.size());

  const std::vector<double> sp =
      unit == TTestUnit::kPerRating
          ? per_rating_squared_errors(model, test_protected)
          : per_user_squared_errors(model, test_protected);
  const std::vector<double> su =
      unit == TTestUnit::kPerRating
          ? per_rating_squared_errors(model, test_unprotected)
          : per_user_squared_errors(model, test_unprotected);
  const WelchResult w = welch_t_test(sp, su);
  r.t_statistic = w.t;
  r.p_value = w.p;
  r.significant = w.p < 0.01;
  return r;
}

std::vector<double> rolling_mean(std::span<const double> values, int window) {
  if (window < 1) throw InvalidArgumentError("window must be >= 1");
  std::vector<double> out;
  out.reserve(values.size());
  for (std::size_t k = 0; k < values.size(); ++k) {
    const std::size_t lo = k + 1 >= static_cast<std::size_t>(window)
                               ? k + 1 - static_cast<std::size_t>(window)
                               : 0;
    double sum = 0.0;
    for (std::size_t j = lo; j <= k; ++j) sum += values[j];
    out.push_back(sum / static_cast<double>(k - lo + 1));
  }
  return out;
}

namespace {

constexpr char kTraceHeader[] =
    "iteration,n_known,acq_protected,acq_unprotected,rmse_all,"
    "rmse_protected,rmse_unprotected,rmse_diff,t_stat,p_value,"
    "rolling_rmse_all_w10";
constexpr int kRollingWindow = 10;

std::string format_real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

// The value the CSV reader will see for v: formatted at six decimals, then
// parsed back.
double round6(double v) { return std::strtod(format_real(v).c_str(), nullptr); }

}  // namespace

void trace_to_csv(const SimulationTrace& trace,
                  const std::filesystem::path& path) {
  if (trace.empty()) throw InvalidArgumentError("trace is empty");

  std::vector<double> rounded_rmse;
  rounded_rmse.reserve(trace.size());
  for (const TracePoint& p : trace) rounded_rmse.push_back(round6(p.rmse_all));
  const std::vector<double> rolling = rolling_mean(rounded_rmse, kRollingWindow);

  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + tmp.string());
    out << kTraceHeader << '\n';
    for (std::size_t k = 0; k < trace.size(); ++k) {
      const TracePoint& p = trace[k];
      out << p.iteration << ',' << p.n_known << ',' << p.acq_protected << ','
          << p.acq_unprotected << ',' << format_real(p.rmse_all) << ','
          << format_real(p.rmse_protected) << ','
          << format_real(p.rmse_unprotected) << ','
          << format_real(p.rmse_diff) << ',' << format_real(p.t_stat) << ','
          << format_real(p.p_value) << ',' << format_real(rolling[k]) << '\n';
    }
    if (!out.flush()) throw IoError("write failed: " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("rename failed: " + path.string() + ": " + ec.message());
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(',', start);
    if (pos == std::string::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return fields;
}

std::int64_t parse_int_field(const std::string& s, int line_no) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParseError("bad integer field '" + s + "'", line_no);
  }
}

double parse_real_field(const std::string& s, int line_no) {
  const char* begin = s.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end != begin + s.size() || s.empty())
    throw ParseError("bad real field '" + s + "'", line_no);
  return v;
}

}  // namespace

SimulationTrace trace_from_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for reading: " + path.string());

  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty trace file", 1);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kTraceHeader) throw ParseError("unexpected trace header", 1);

  SimulationTrace trace;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> f = split_csv_line(line);
    if (f.size() != 11)
      throw ParseError("expected 11 fields, got " + std::to_string(f.size()),
                       line_no);
    TracePoint p;
    p.iteration = static_cast<int>(parse_int_field(f[0], line_no));
    p.n_known = parse_int_field(f[1], line_no);
    p.acq_protected = parse_int_field(f[2], line_no);
    p.acq_unprotected = parse_int_field(f[3], line_no);
    p.rmse_all = parse_real_field(f[4], line_no);
    p.rmse_protected = parse_real_field(f[5], line_no);
    p.rmse_unprotected = parse_real_field(f[6], line_no);
    p.rmse_diff = parse_real_field(f[7], line_no);
    p.t_stat = parse_real_field(f[8], line_no);
    p.p_value = parse_real_field(f[9], line_no);
    // field 10 (rolling mean) is derived; recomputed on serialization
    parse_real_field(f[10], line_no);
    trace.push_back(p);
  }
  return trace;
}

}  // namespace minifair
