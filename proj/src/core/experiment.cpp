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

#include "core/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <mutex>
#include <thread>

#include "json.hpp"

#include "core/errors.hpp"

namespace minifair {
namespace {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

std::string format_real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

double round6(double v) { return std::strtod(format_real(v).c_str(), nullptr); }

void atomic_write(const std::filesystem::path& path, const std::string& body) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + tmp.string());
    out << body;
    if (!out.flush()) throw IoError("write failed: " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("rename failed: " + path.string() + ": " + ec.message());
}

}  // namespace

std::string_view mode_name(AcquisitionMode mode) {
  return mode == AcquisitionMode::kOriginal ? "original" : "equal-ratio";
}

AcquisitionMode mode_from_name(std::string_view name) {
  if (name == "original") return AcquisitionMode::kOriginal;
  if (name == "equal-ratio") return AcquisitionMode::kEqualRatio;
  throw InvalidArgumentError("unknown mode: " + std::string(name));
}

void ExperimentConfig::validate() const {
  if (strategies.empty()) throw InvalidArgumentError("strategies is empty");
  if (modes.empty()) throw InvalidArgumentError("modes is empty");
  if (seeds.empty()) throw InvalidArgumentError("seeds is empty");
  if (!(user_sample_fraction > 0.0 && user_sample_fraction <= 1.0))
    throw InvalidArgumentError("user_sample_fraction must be in (0, 1]");
  for (int c : checkpoints)
    if (c < 0) throw InvalidArgumentError("checkpoints must be >= 0");
  split.validate();
  sim.validate();
}

namespace {

void hyperparams_from_json(const json& j, SvdHyperParams& hp) {
  hp.n_factors = j.value("n_factors", hp.n_factors);
  hp.learning_rate = j.value("learning_rate", hp.learning_rate);
  hp.regularization = j.value("regularization", hp.regularization);
  hp.n_epochs = j.value("n_epochs", hp.n_epochs);
  hp.init_std = j.value("init_std", hp.init_std);
  hp.rating_min = j.value("rating_min", hp.rating_min);
  hp.rating_max = j.value("rating_max", hp.rating_max);
}

ordered_json hyperparams_to_json(const SvdHyperParams& hp) {
  return ordered_json{{"n_factors", hp.n_factors},
                      {"learning_rate", hp.learning_rate},
                      {"regularization", hp.regularization},
                      {"n_epochs", hp.n_epochs},
                      {"init_std", hp.init_std},
                      {"rating_min", hp.rating_min},
                      {"rating_max", hp.rating_max}};
}

void strategy_options_from_json(const json& j, StrategyOptions& o) {
  if (j.contains("knn_aggregation")) {
    const std::string agg = j.at("knn_aggregation").get<std::string>();
    if (agg == "max")
      o.knn_aggregation = KnnAggregation::kMax;
    else if (agg == "mean")
      o.knn_aggregation = KnnAggregation::kMean;
    else
      throw InvalidArgumentError("knn_aggregation must be max or mean");
  }
  o.mixed_start_max = j.value("mixed_start_max", o.mixed_start_max);
  if (j.contains("greedy")) {
    const json& g = j.at("greedy");
    o.greedy.pool_size = g.value("pool_size", o.greedy.pool_size);
    o.greedy.validation_fraction =
        g.value("validation_fraction", o.greedy.validation_fraction);
    o.greedy.min_validation =
        g.value("min_validation", o.greedy.min_validation);
    o.greedy.threads = g.value("threads", o.greedy.threads);
    if (g.contains("cheap")) hyperparams_from_json(g.at("cheap"), o.greedy.cheap);
  }
}

ordered_json strategy_options_to_json(const StrategyOptions& o) {
  return ordered_json{
      {"knn_aggregation",
       o.knn_aggregation == KnnAggregation::kMax ? "max" : "mean"},
      {"mixed_start_max", o.mixed_start_max},
      {"greedy",
       ordered_json{{"pool_size", o.greedy.pool_size},
                    {"validation_fraction", o.greedy.validation_fraction},
                    {"min_validation", o.greedy.min_validation},
                    {"threads", o.greedy.threads},
                    {"cheap", hyperparams_to_json(o.greedy.cheap)}}}};
}

void sim_from_json(const json& j, SimulationConfig& s) {
  s.query_size = j.value("query_size", s.query_size);
  s.known_init_fraction =
      j.value("known_init_fraction", s.known_init_fraction);
  s.max_iterations = j.value("max_iterations", s.max_iterations);
  s.eval_every = j.value("eval_every", s.eval_every);
  s.warm_start = j.value("warm_start", s.warm_start);
  s.validate_invariants = j.value("validate_invariants", s.validate_invariants);
  if (j.contains("t_test_unit")) {
    const std::string unit = j.at("t_test_unit").get<std::string>();
    if (unit == "per-rating")
      s.t_test_unit = TTestUnit::kPerRating;
    else if (unit == "per-user")
      s.t_test_unit = TTestUnit::kPerUser;
    else
      throw InvalidArgumentError("t_test_unit must be per-rating or per-user");
  }
  if (j.contains("hyperparams"))
    hyperparams_from_json(j.at("hyperparams"), s.hyperparams);
  if (j.contains("strategy_options"))
    strategy_options_from_json(j.at("strategy_options"), s.strategy_options);
}

ordered_json sim_to_json(const SimulationConfig& s) {
  return ordered_json{
      {"query_size", s.query_size},
      {"known_init_fraction", s.known_init_fraction},
      {"max_iterations", s.max_iterations},
      {"eval_every", s.eval_every},
      {"warm_start", s.warm_start},
      {"validate_invariants", s.validate_invariants},
      {"t_test_unit",
       s.t_test_unit == TTestUnit::kPerRating ? "per-rating" : "per-user"},
      {"hyperparams", hyperparams_to_json(s.hyperparams)},
      {"strategy_options", strategy_options_to_json(s.strategy_options)}};
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("invalid config JSON: ") + e.what());
  }
  try {
    ExperimentConfig cfg;
    cfg.dataset_path = j.value("dataset_path", std::string{});
    if (j.contains("dataset_format"))
      cfg.dataset_format =
          dataset_format_from_name(j.at("dataset_format").get<std::string>());
    cfg.output_dir = j.value("output_dir", cfg.output_dir.string());
    if (j.contains("strategies")) {
      cfg.strategies.clear();
      for (const auto& name : j.at("strategies"))
        cfg.strategies.push_back(
            strategy_from_name(name.get<std::string>()));
    }
    if (j.contains("modes")) {
      cfg.modes.clear();
      for (const auto& name : j.at("modes"))
        cfg.modes.push_back(mode_from_name(name.get<std::string>()));
    }
    if (j.contains("seeds")) {
      cfg.seeds.clear();
      for (const auto& s : j.at("seeds"))
        cfg.seeds.push_back(s.get<std::uint64_t>());
    }
    if (j.contains("split")) {
      const json& sp = j.at("split");
      cfg.split.train_fraction =
          sp.value("train_fraction", cfg.split.train_fraction);
      cfg.split.k_core = sp.value("k_core", cfg.split.k_core);
      cfg.split.seed = sp.value("seed", cfg.split.seed);
    }
    if (j.contains("sim")) sim_from_json(j.at("sim"), cfg.sim);
    cfg.user_sample_fraction =
        j.value("user_sample_fraction", cfg.user_sample_fraction);
    if (j.contains("checkpoints")) {
      cfg.checkpoints.clear();
      for (const auto& c : j.at("checkpoints"))
        cfg.checkpoints.push_back(c.get<int>());
    }
    cfg.threads = j.value("threads", cfg.threads);
    return cfg;
  } catch (const json::exception& e) {
    throw ParseError(std::string("invalid config JSON: ") + e.what());
  }
}

ExperimentConfig ExperimentConfig::from_json_file(
    const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config: " + path.string());
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return from_json(text);
}

std::string ExperimentConfig::to_json() const {
  ordered_json j;
  j["dataset_path"] = dataset_path.string();
  j["dataset_format"] = dataset_format_name(dataset_format);
  j["output_dir"] = output_dir.string();
  json names = json::array();
  for (StrategyKind s : strategies) names.push_back(strategy_name(s));
  j["strategies"] = names;
  json mode_names = json::array();
  for (AcquisitionMode m : modes) mode_names.push_back(mode_name(m));
  j["modes"] = mode_names;
  j["seeds"] = seeds;
  j["split"] = ordered_json{{"train_fraction", split.train_fraction},
                            {"k_core", split.k_core},
                            {"seed", split.seed}};
  j["sim"] = sim_to_json(sim);
  j["user_sample_fraction"] = user_sample_fraction;
  j["checkpoints"] = checkpoints;
  j["threads"] = threads;
  return j.dump(2) + "\n";
}

SimulationConfig simulation_config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("invalid simulation JSON: ") + e.what());
  }
  try {
    SimulationConfig s;
    sim_from_json(j, s);
    if (j.contains("strategy"))
      s.strategy = strategy_from_name(j.at("strategy").get<std::string>());
    if (j.contains("mode"))
      s.equal_ratio = mode_from_name(j.at("mode").get<std::string>()) ==
                      AcquisitionMode::kEqualRatio;
    s.equal_ratio = j.value("equal_ratio", s.equal_ratio);
    s.seed = j.value("seed", s.seed);
    return s;
  } catch (const json::exception& e) {
    throw ParseError(std::string("invalid simulation JSON: ") + e.what());
  }
}

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("MINIFAIR_THREADS")) {
    int v = 0;
    const auto [ptr, ec] = std::from_chars(env, env + std::strlen(env), v);
    if (ec == std::errc{} && *ptr == '\0' && v > 0) return v;
  }
  return 1;
}

std::string trace_file_name(StrategyKind strategy, AcquisitionMode mode,
                            std::uint64_t seed) {
  return std::string(strategy_name(strategy)) + "_" +
         std::string(mode_name(mode)) + "_seed" + std::to_string(seed) +
         ".csv";
}

TraceMeta trace_meta_from_file_name(const std::string& name) {
  constexpr std::string_view kExt = ".csv";
  if (name.size() <= kExt.size() ||
      name.substr(name.size() - kExt.size()) != kExt)
    throw ParseError("trace file name must end in .csv: " + name);
  const std::string stem = name.substr(0, name.size() - kExt.size());
  const std::size_t seed_pos = stem.rfind("_seed");
  if (seed_pos == std::string::npos)
    throw ParseError("trace file name has no _seed suffix: " + name);
  const std::string seed_str = stem.substr(seed_pos + 5);
  TraceMeta meta;
  const auto [ptr, ec] = std::from_chars(
      seed_str.data(), seed_str.data() + seed_str.size(), meta.seed);
  if (ec != std::errc{} || ptr != seed_str.data() + seed_str.size())
    throw ParseError("bad seed in trace file name: " + name);
  const std::string prefix = stem.substr(0, seed_pos);
  const std::size_t mode_pos = prefix.rfind('_');
  if (mode_pos == std::string::npos)
    throw ParseError("trace file name has no mode: " + name);
  meta.strategy = strategy_from_name(prefix.substr(0, mode_pos));
  meta.mode = mode_from_name(prefix.substr(mode_pos + 1));
  return meta;
}

std::vector<RunOutcome> run_experiment(const ExperimentConfig& cfg,
                                       const Dataset& dataset,
                                       const ExperimentProgressFn& progress) {
  cfg.validate();
  std::filesystem::create_directories(cfg.output_dir);

  std::vector<RunOutcome> outcomes;
  for (StrategyKind s : cfg.strategies)
    for (AcquisitionMode m : cfg.modes)
      for (std::uint64_t seed : cfg.seeds) {
        RunOutcome o;
        o.strategy = s;
        o.mode = m;
        o.seed = seed;
        o.trace_path = cfg.output_dir / trace_file_name(s, m, seed);
        outcomes.push_back(std::move(o));
      }

  std::atomic<std::size_t> next{0};
  std::mutex progress_mutex;

  auto report = [&](const RunOutcome& o, int iteration, std::size_t n_known,
                    std::size_t pool) {
    if (!progress) return;
    const std::scoped_lock lock(progress_mutex);
    progress(trace_file_name(o.strategy, o.mode, o.seed), iteration, n_known,
             pool);
  };

  auto worker = [&]() {
    for (std::size_t k = next.fetch_add(1); k < outcomes.size();
         k = next.fetch_add(1)) {
      RunOutcome& o = outcomes[k];
      SimulationConfig sc = cfg.sim;
      sc.strategy = o.strategy;
      sc.equal_ratio = o.mode == AcquisitionMode::kEqualRatio;
      sc.seed = o.seed;
      SimulationTrace trace;
      try {
        Simulation sim(dataset, sc);
        if (sim.model() != nullptr) trace.push_back(sim.evaluate());
        while (!sim.exhausted() &&
               (sc.max_iterations < 0 || sim.iteration() < sc.max_iterations)) {
          sim.step();
          if (sim.at_eval_point() && sim.model() != nullptr)
            trace.push_back(sim.evaluate());
          report(o, sim.iteration(), sim.known().size(),
                 sim.pools().total_size());
        }
        trace_to_csv(trace, o.trace_path);
        o.trace = std::move(trace);
        o.ok = true;
      } catch (const std::exception& e) {
        o.ok = false;
        o.error = e.what();
        if (!trace.empty()) {
          try {
            trace_to_csv(trace, o.trace_path.string() + ".partial");
          } catch (...) {
          }
        }
      }
    }
  };

  const int n_threads = std::min<int>(resolve_threads(cfg.threads),
                                      static_cast<int>(outcomes.size()));
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }

  write_summary_csv(outcomes, cfg.checkpoints,
                    cfg.output_dir / "summary.csv");
  return outcomes;
}

std::vector<RunOutcome> run_experiment(const ExperimentConfig& cfg,
                                       const ExperimentProgressFn& progress) {
  cfg.validate();
  const auto [ratings, users] =
      dataset_paths(cfg.dataset_path, cfg.dataset_format);
  const Dataset dataset = load_dataset(ratings, users, cfg.dataset_format,
                                       cfg.split, cfg.user_sample_fraction);
  return run_experiment(cfg, dataset, progress);
}

void write_summary_csv(std::span<const RunOutcome> outcomes,
                       std::span<const int> checkpoints,
                       const std::filesystem::path& path) {
  std::string body =
      "strategy,mode,seed,checkpoint,iteration,rmse_protected,"
      "rmse_unprotected,rmse_diff,t_stat,p_value,significant\n";
  for (const RunOutcome& o : outcomes) {
    if (!o.ok) continue;
    for (int cp : checkpoints) {
      // the trace row at the checkpoint, or the nearest earlier one
      const TracePoint* best = nullptr;
      for (const TracePoint& p : o.trace) {
        if (p.iteration > cp) break;
        best = &p;
      }
      if (best == nullptr) continue;
      body += std::string(strategy_name(o.strategy)) + "," +
              std::string(mode_name(o.mode)) + "," + std::to_string(o.seed) +
              "," + std::to_string(cp) + "," +
              std::to_string(best->iteration) + "," +
              format_real(best->rmse_protected) + "," +
              format_real(best->rmse_unprotected) + "," +
              format_real(best->rmse_diff) + "," + format_real(best->t_stat) +
              "," + format_real(best->p_value) + "," +
              (best->p_value < 0.01 ? "1" : "0") + "\n";
    }
  }
  atomic_write(path, body);
}

void emit_plot_data(
    std::span<const std::pair<TraceMeta, SimulationTrace>> traces,
    const std::filesystem::path& path) {
  std::string body = "strategy,mode,seed,iteration,series,value\n";
  for (const auto& [meta, trace] : traces) {
    std::vector<double> rounded;
    rounded.reserve(trace.size());
    for (const TracePoint& p : trace) rounded.push_back(round6(p.rmse_all));
    const std::vector<double> rolling = rolling_mean(rounded, 10);
    const std::string prefix = std::string(strategy_name(meta.strategy)) +
                               "," + std::string(mode_name(meta.mode)) + "," +
                               std::to_string(meta.seed) + ",";
    for (std::size_t k = 0; k < trace.size(); ++k) {
      const TracePoint& p = trace[k];
      const std::string it = std::to_string(p.iteration);
      body += prefix + it + ",rmse_all," + format_real(p.rmse_all) + "\n";
      body += prefix + it + ",rmse_protected," +
              format_real(p.rmse_protected) + "\n";
      body += prefix + it + ",rmse_unprotected," +
              format_real(p.rmse_unprotected) + "\n";
      body += prefix + it + ",rolling_w10," + format_real(rolling[k]) + "\n";
    }
  }
  atomic_write(path, body);
}

}  // namespace minifair
