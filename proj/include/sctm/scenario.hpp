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

#ifndef SCTM_SCENARIO_HPP
#define SCTM_SCENARIO_HPP

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "sctm/config.hpp"
#include "sctm/environment.hpp"
#include "sctm/evaluation.hpp"
#include "sctm/rng.hpp"
#include "sctm/simulator.hpp"

namespace sctm {

/// A resolved scenario: network, engine and measure built once, then sampled
/// at design points k (one entry per config design dimension).
class Scenario {
 public:
  explicit Scenario(ScenarioConfig config);

  [[nodiscard]] const ScenarioConfig& config() const noexcept { return config_; }
  [[nodiscard]] bool synthetic() const noexcept { return config_.synthetic.has_value(); }
  [[nodiscard]] const TrafficNetwork& network() const;
  [[nodiscard]] const FlowEngine& engine() const;
  [[nodiscard]] std::shared_ptr<const TrafficNetwork> network_ptr() const noexcept { return net_; }

  [[nodiscard]] std::size_t design_dim() const noexcept { return config_.design.size(); }
  [[nodiscard]] std::vector<double> default_design() const;
  /// Indices of the learning block's explored coordinates (all when unset).
  [[nodiscard]] std::vector<std::size_t> vary_indices() const;
  /// Default design with the explored coordinates replaced by `sub`.
  [[nodiscard]] std::vector<double> embed(std::span<const double> sub) const;
  void check_design(std::span<const double> k) const;  // throws ConfigError

  /// Integer-flagged coordinates become floor or ceil with mean k_i; one
  /// uniform is drawn per such coordinate, in design order.
  [[nodiscard]] std::vector<double> realize(std::span<const double> k, RngStream& rng) const;

  [[nodiscard]] SignalBoard signal_board(std::span<const double> realized) const;
  [[nodiscard]] EnvironmentSpec environment(std::span<const double> realized) const;
  [[nodiscard]] DensityState initial_state() const;
  [[nodiscard]] PerformanceMeasure measure() const;

  /// One replicate of the performance measure at k. The stream is
  /// RngStream(seed, index); extra observers see every step.
  double sample(std::span<const double> k, std::uint64_t seed, std::uint64_t index,
                std::span<StepObserver* const> extra = {}) const;

  /// Noise-free value of the synthetic function (synthetic scenarios only).
  [[nodiscard]] double synthetic_mean(std::span<const double> k) const;

  [[nodiscard]] ReplicateSampler sampler(std::vector<double> k, std::uint64_t seed) const;

 private:
  [[nodiscard]] double resolve(const ParamRef& p, std::span<const double> k) const;

  ScenarioConfig config_;
  std::shared_ptr<const TrafficNetwork> net_;
  std::unique_ptr<FlowEngine> engine_;
  std::vector<std::size_t> signal_nodes_;  // node index per config signal
};

/// Seed for the replicates of design point k: a hash of the run seed and
/// the bit patterns of k.
std::uint64_t point_seed(std::uint64_t seed, std::span<const double> k);

/// Network and turning fractions of a config, without the stochastic parts.
std::shared_ptr<const TrafficNetwork> build_network(const ScenarioConfig& config);
TurningFractions build_turning(const ScenarioConfig& config, const TrafficNetwork& net);
InteractionRule build_rule(const RuleConfig& rule, const TrafficNetwork& net);

}  // namespace sctm

#endif  // SCTM_SCENARIO_HPP
