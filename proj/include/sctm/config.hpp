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

#ifndef SCTM_CONFIG_HPP
#define SCTM_CONFIG_HPP

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "sctm/cells.hpp"
#include "sctm/evaluation.hpp"

namespace sctm {

inline constexpr int kSchemaVersion = 1;

/// A number, or a design coordinate times a scale. In JSON: `3.5`, `"Tg"`, or
/// `{"design": "xi1", "scale": -2}`.
struct ParamRef {
  double value = 0.0;
  std::string design;  // empty: constant
  double scale = 1.0;

  static ParamRef constant(double v) { return {v, {}, 1.0}; }
  static ParamRef of(std::string name, double scale = 1.0) { return {0.0, std::move(name), scale}; }
  [[nodiscard]] bool is_constant() const noexcept { return design.empty(); }

  bool operator==(const ParamRef&) const = default;
};

struct DesignDim {
  std::string name;
  double lower = 0.0;
  double upper = 1.0;
  double value = 0.0;    // default when not varied
  bool integer = false;  // randomized per replicate to floor/ceil with matching mean

  bool operator==(const DesignDim&) const = default;
};

using RouteLabels = std::array<int, 3>;

struct CellTypeConfig {
  std::string name;
  CellKind kind = CellKind::kHighway;
  CellParams params;
  double length = 1.0;

  bool operator==(const CellTypeConfig&) const = default;
};

struct NodeConfig {
  int id = 0;
  std::string type;
  std::vector<int> arms;  // counter-clockwise
  std::vector<int> exits;
  std::optional<double> length;
  bool allow_uturn = false;

  bool operator==(const NodeConfig&) const = default;
};

struct TurningEntryConfig {
  RouteLabels route{};
  int to = 0;
  double fraction = 0.0;

  bool operator==(const TurningEntryConfig&) const = default;
};

struct SignalConfig {
  int node = 0;
  ParamRef green = ParamRef::constant(1);
  ParamRef shift = ParamRef::constant(0);
  std::vector<int> axis_i;  // neighbour labels
  std::vector<int> axis_j;
  double a_real = 1.5;
  double t_safe = 2.0;
  double v_real = 50.0 / 3.6;

  bool operator==(const SignalConfig&) const = default;
};

struct SourceConfig {
  std::string kind = "constant";  // random_walk | gaussian | copy | constant
  RouteLabels route{};
  std::string cap = "rho_max";    // rho_max | half_rho_max
  ParamRef sigma = ParamRef::constant(0);
  int copula_slot = -1;
  ParamRef mean = ParamRef::constant(0);
  ParamRef cv = ParamRef::constant(0);
  ParamRef value = ParamRef::constant(0);
  std::optional<RouteLabels> of;
  double scale = 1.0;

  bool operator==(const SourceConfig&) const = default;
};

struct LinkWeightsConfig {
  std::array<int, 2> link{};
  std::vector<double> weights;  // per upstream node, in the order of `from`
  std::vector<int> from;

  bool operator==(const LinkWeightsConfig&) const = default;
};

struct RuleConfig {
  std::string kind = "dpf";  // dpf | cpf | priority | cooperative
  std::vector<LinkWeightsConfig> cpf_weights;
  std::vector<LinkWeightsConfig> priority;  // `from` lists upstream nodes, highest priority first

  bool operator==(const RuleConfig&) const = default;
};

struct InitialConfig {
  std::string mode = "value";  // value | per_type | fill_fraction
  double value = 0.0;          // density (value) or fraction (fill_fraction)
  std::map<std::string, double> per_type;

  bool operator==(const InitialConfig&) const = default;
};

struct RunConfig {
  long steps = 100;
  double t_real = 1.0;
  RuleConfig rule;
  InitialConfig initial;

  bool operator==(const RunConfig&) const = default;
};

struct MeasureConfig {
  std::string kind = "Q";  // Q | Qa | Qb
  std::vector<RouteLabels> routes;

  bool operator==(const MeasureConfig&) const = default;
};

struct BenchmarkLevel {
  std::string name;
  double e = 60.0;
  double sigma = 0.1;

  bool operator==(const BenchmarkLevel&) const = default;
};

struct EvaluationConfig {
  MeasureConfig measure;
  Utility utility;
  std::vector<BenchmarkLevel> benchmark;
  std::optional<double> gamma;  // explicit threshold, overrides the benchmark
  std::string level;            // benchmark level used as gamma (default: first)

  bool operator==(const EvaluationConfig&) const = default;
};

struct LearningConfig {
  std::vector<std::string> vary;  // explored design coordinates; empty = all
  std::string kernel = "matern32";  // se | matern12 | matern32 | matern52
  std::size_t n_initial = 150;
  std::size_t n_loop = 50;
  std::size_t iterations = 7;     // loop iterations after the initial phase
  std::vector<double> tau{0.05, 0.10, 0.08, 0.06, 0.05, 0.04, 0.03, 0.02};
  std::optional<double> tau_scale;  // unset: |gamma_first - gamma_last| of the benchmark
  std::size_t n_min = 20;
  std::vector<std::size_t> n_max{500, 150, 200, 300, 400, 650, 1200, 3000};
  double c1 = 5.0;
  std::optional<double> c2_0;     // unset: 2 / tau scale
  double c3 = 2.0;
  std::string acquisition = "distance";  // distance | scaled
  std::size_t max_trials = 100000;
  double delta = 0.05;
  std::size_t n_eval = 100000;
  std::optional<double> error_stop;
  std::size_t grid = 200;
  std::size_t fit_starts = 10;

  bool operator==(const LearningConfig&) const = default;
};

/// Built-in analytic test function used instead of a traffic model.
struct SyntheticConfig {
  std::string function = "sin_product";  // sin_product (2-D) | sin (1-D)
  double noise = 0.01;

  bool operator==(const SyntheticConfig&) const = default;
};

struct ScenarioConfig {
  int schema = kSchemaVersion;
  std::string name;
  std::uint64_t seed = 1;
  std::string variant;  // applied variant, informational after parsing
  std::vector<DesignDim> design;
  std::optional<SyntheticConfig> synthetic;
  std::vector<CellTypeConfig> cell_types;
  std::vector<NodeConfig> nodes;
  std::string turning = "uniform";  // uniform | table
  std::vector<TurningEntryConfig> turning_table;
  std::vector<SignalConfig> signals;
  std::optional<ParamRef> copula_r;
  std::vector<SourceConfig> sources;
  RunConfig run;
  EvaluationConfig evaluation;
  LearningConfig learning;

  bool operator==(const ScenarioConfig&) const = default;

  [[nodiscard]] std::size_t design_index(std::string_view name) const;  // throws ConfigError
};

/// Parses scenario text. Variants (`"variants": {"open": {...}}`) are JSON
/// merge patches; `variant` picks one (default: the file's "variant" field).
/// Errors carry the 1-based line of the offending value.
ScenarioConfig parse_config(std::string_view text, std::string_view variant = {});
ScenarioConfig load_config(const std::filesystem::path& path, std::string_view variant = {});

/// Canonical JSON of a resolved config; parse_config(dump) == config.
nlohmann::json to_json(const ScenarioConfig& config);

/// FNV-1a 64-bit hash of the canonical JSON dump.
std::uint64_t config_hash(const ScenarioConfig& config);

/// Maps each JSON pointer ("/a/0/b") of a document to the line its value starts on.
std::map<std::string, int> json_pointer_lines(std::string_view text);

}  // namespace sctm

#endif  // SCTM_CONFIG_HPP
