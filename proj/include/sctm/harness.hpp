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

#ifndef SCTM_HARNESS_HPP
#define SCTM_HARNESS_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "sctm/active_learning.hpp"
#include "sctm/config.hpp"
#include "sctm/scenario.hpp"

namespace sctm {

struct Threshold {
  std::string level;
  double e = 0.0;
  double sigma = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
};

/// gamma of every benchmark level under the configured utility.
std::vector<Threshold> calibrate_benchmark(const EvaluationConfig& eval);

/// Explicit gamma, else the configured benchmark level (default: the first).
double resolve_gamma(const EvaluationConfig& eval);

/// learning.tau_scale, else |gamma_first - gamma_last| of the benchmark.
double resolve_tau_scale(const ScenarioConfig& config);

/// Loop settings of a config: tau schedule times the tau scale, c2 from the
/// config or 2 / tau scale.
LoopConfig make_loop_config(const ScenarioConfig& config, unsigned workers);

/// Box spanned by the explored design coordinates.
Box learning_box(const Scenario& scenario);

/// Sequential MC at embed(k); point `index` draws its replicates from
/// derive_seed(seed, index).
PointEvaluator make_evaluator(const Scenario& scenario, std::uint64_t seed);

/// Parses "a,b,c" into numbers; throws ConfigError.
std::vector<double> parse_vector(const std::string& text);

/// Full design from a vector of either design_dim or #vary entries.
std::vector<double> resolve_design(const Scenario& scenario, const std::vector<double>& k);

/// Run metadata written next to the outputs as manifest.json.
struct RunManifest {
  std::string command;
  std::uint64_t config_hash = 0;
  std::uint64_t seed = 0;
  std::string variant;
  std::string version = SCTM_VERSION;
  unsigned workers = 1;
  nlohmann::json parameters = nlohmann::json::object();
  nlohmann::json files = nlohmann::json::array();    // {name, iteration?, rows}
  nlohmann::json timings = nlohmann::json::object();  // seconds

  void add_file(const std::string& name, std::size_t rows, long iteration = -1);
  [[nodiscard]] nlohmann::json to_json() const;
  void write(const std::filesystem::path& dir) const;
};

/// Shortest round-trip decimal form.
std::string format_double(double x);

}  // namespace sctm

#endif  // SCTM_HARNESS_HPP
