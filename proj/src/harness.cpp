// Copyright 2026 The sctm Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "sctm/harness.hpp"

#include <charconv>
#include <cstdio>
#include <cmath>
#include <fstream>
#include <sstream>

#include "sctm/errors.hpp"
#include "sctm/evaluation.hpp"

namespace sctm {

std::vector<Threshold> calibrate_benchmark(const EvaluationConfig& eval) {
  std::vector<Threshold> out;
  for (const auto& b : eval.benchmark) {
    const BenchmarkSpec spec{b.e, b.sigma};
    out.push_back({b.name, b.e, b.sigma, spec.beta(), calibrate_threshold(spec, eval.utility)});
  }
  return out;
}

double resolve_gamma(const EvaluationConfig& eval) {
  if (eval.gamma) return *eval.gamma;
  if (eval.benchmark.empty()) throw ConfigError("evaluation: neither gamma nor a benchmark is given");
  for (const auto& b : eval.benchmark) {
    if (eval.level.empty() || b.name == eval.level) return calibrate_threshold({b.e, b.sigma}, eval.utility);
  }
  throw ConfigError("evaluation: unknown benchmark level '" + eval.level + "'");
}

double resolve_tau_scale(const ScenarioConfig& config) {
  if (config.learning.tau_scale) return *config.learning.tau_scale;
  const auto& bench = config.evaluation.benchmark;
  if (bench.size() < 2) throw ConfigError("learning: tau_scale is required without at least two benchmark levels");
  const auto& u = config.evaluation.utility;
  const double scale = std::abs(calibrate_threshold({bench.front().e, bench.front().sigma}, u) -
                                calibrate_threshold({bench.back().e, bench.back().sigma}, u));
  if (!(scale > 0.0)) throw ConfigError("learning: benchmark levels give a zero tau scale");
  return scale;
}

LoopConfig make_loop_config(const ScenarioConfig& config, unsigned workers) {
  const auto& L = config.learning;
  const double scale = resolve_tau_scale(config);
  LoopConfig c;
  c.n_initial = L.n_initial;
  c.n_loop = L.n_loop;
  c.iterations = L.iterations;
  c.tau.clear();
  for (double t : L.tau) c.tau.push_back(t * scale);
  c.n_min = L.n_min;
  c.n_max = L.n_max;
  c.c1 = L.c1;
  c.c2_0 = L.c2_0 ? *L.c2_0 : 2.0 / scale;
  c.c3 = L.c3;
  c.acquisition = L.acquisition == "scaled" ? AcquisitionKind::kScaled : AcquisitionKind::kDistance;
  c.max_trials = L.max_trials;
  c.delta = L.delta;
  c.n_eval = L.n_eval;
  c.error_stop = L.error_stop;
  c.kernel = *parse_kernel_kind(L.kernel);
  c.fit_starts = L.fit_starts;
  c.workers = workers == 0 ? 1 : workers;
  c.validate();
  return c;
}

Box learning_box(const Scenario& scenario) {
  Box box;
  for (std::size_t i : scenario.vary_indices()) {
    box.lower.push_back(scenario.config().design[i].lower);
    box.upper.push_back(scenario.config().design[i].upper);
  }
  box.validate();
  return box;
}

PointEvaluator make_evaluator(const Scenario& scenario, std::uint64_t seed) {
  const Utility u = scenario.config().evaluation.utility;
  return [&scenario, seed, u](const PointRequest& req) {
    return sequential_mc(scenario.sampler(scenario.embed(req.k), derive_seed(seed, req.index)), u, req.options);
  };
}

std::vector<double> parse_vector(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b == std::string::npos) throw ConfigError("empty entry in vector '" + text + "'");
    double v = 0.0;
    const char* first = item.data() + b;
    const char* last = item.data() + e + 1;
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last) throw ConfigError("not a number: '" + item + "'");
    out.push_back(v);
  }
  if (out.empty()) throw ConfigError("empty vector");
  return out;
}

std::vector<double> resolve_design(const Scenario& scenario, const std::vector<double>& k) {
  std::vector<double> full;
  if (k.size() == scenario.design_dim()) {
    full = k;
  } else if (k.size() == scenario.vary_indices().size()) {
    full = scenario.embed(k);
  } else {
    throw ConfigError("design vector has " + std::to_string(k.size()) + " entries; expected " +
                      std::to_string(scenario.design_dim()) + " or " + std::to_string(scenario.vary_indices().size()));
  }
  scenario.check_design(full);
  return full;
}

void RunManifest::add_file(const std::string& name, std::size_t rows, long iteration) {
  nlohmann::json f{{"name", name}, {"rows", rows}};
  if (iteration >= 0) f["iteration"] = iteration;
  files.push_back(std::move(f));
}

nlohmann::json RunManifest::to_json() const {
  char hash[17];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(config_hash));
  return {{"command", command}, {"config_hash", hash}, {"seed", seed},       {"variant", variant},
          {"version", version}, {"workers", workers},  {"parameters", parameters}, {"files", files},
          {"timings", timings}};
}

void RunManifest::write(const std::filesystem::path& dir) const {
  std::ofstream out(dir / "manifest.json");
  out << to_json().dump(2) << '\n';
  if (!out) throw std::runtime_error("cannot write " + (dir / "manifest.json").string());
}

std::string format_double(double x) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return ec == std::errc{} ? std::string(buf, ptr) : std::string("nan");
}

}  // namespace sctm
