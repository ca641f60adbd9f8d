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

#ifndef SCTM_SIMULATOR_HPP
#define SCTM_SIMULATOR_HPP

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "sctm/environment.hpp"
#include "sctm/lp.hpp"
#include "sctm/network.hpp"
#include "sctm/signals.hpp"
#include "sctm/simd.hpp"
#include "sctm/solvers.hpp"

namespace sctm {

struct SignalPlan {
  NodeId node;
  SignalSchedule schedule;
};

/// Light plans of one replicate; every signalized node needs exactly one.
using SignalBoard = std::vector<SignalPlan>;

/// Lets a priority rule change its orderings over time (e.g. alternating
/// right-of-way regimes). Called once per step before phase two.
using PriorityHook = std::function<void(long t, std::vector<std::vector<std::size_t>>& orders)>;

/// Receives every step of a run.
class StepObserver {
 public:
  virtual ~StepObserver() = default;
  /// `rho_before` is rho(t), `flows` the flows of step t -> t+1, `rho_after` rho(t+1).
  virtual void observe(long t, std::span<const double> rho_before, const FlowRecord& flows,
                       std::span<const double> rho_after) = 0;
};

/// Advances a network by one step under an interaction rule. Immutable after
/// construction; replicates share one engine and each own a Workspace.
class FlowEngine {
 public:
  struct Workspace {
    std::vector<double> sending, receiving;  // per route
    std::vector<double> next;                // rho(t+1)
    std::vector<double> local, la;           // arms x arms gather buffers
    std::vector<double> s_link, r_link, q_link;
    std::vector<std::vector<std::size_t>> orders;
    std::vector<const SignalSchedule*> schedule_of;  // per node
    DenseSimplex lp;
  };

  FlowEngine(std::shared_ptr<const TrafficNetwork> net, TurningFractions turning, InteractionRule rule,
             PriorityHook priority_hook = {});

  [[nodiscard]] const TrafficNetwork& network() const noexcept { return *net_; }
  [[nodiscard]] const TurningFractions& turning() const noexcept { return turning_; }
  [[nodiscard]] const InteractionRule& rule() const noexcept { return rule_; }
  [[nodiscard]] std::span<const NodeId> signalized_nodes() const noexcept { return signalized_; }

  [[nodiscard]] Workspace make_workspace() const;

  /// Binds the light plans of a replicate to the workspace. Throws ConfigError
  /// when a signalized node has no plan (or two), or a plan targets another node.
  void bind_signals(const SignalBoard& board, Workspace& ws) const;

  /// One step t -> t+1: S/R evaluation, outflows, inflows, net flows, update.
  /// `env` may be null for a closed system. Increments state.t.
  void step(DensityState& state, FlowRecord& flows, NetFlowModel* env, Workspace& ws) const;

 private:
  void solve_link(std::size_t l, const LocalProblem& p, std::span<double> out, Workspace& ws) const;

  std::shared_ptr<const TrafficNetwork> net_;
  TurningFractions turning_;
  InteractionRule rule_;
  PriorityHook hook_;
  std::vector<NodeId> signalized_;
  std::vector<std::vector<double>> cpf_weights_;  // resolved per link
  std::vector<std::vector<std::size_t>> orders_;  // resolved per link
  const simd::KernelTable* kernels_;
};

/// Runs `steps` steps from `state`, notifying the observers after each one.
void run_simulation(const FlowEngine& engine, DensityState& state, long steps, const SignalBoard& board,
                    NetFlowModel* env, std::span<StepObserver* const> observers);

/// Stores the full density and flow history (for export).
class TrajectoryRecorder final : public StepObserver {
 public:
  void observe(long t, std::span<const double> rho_before, const FlowRecord& flows,
               std::span<const double> rho_after) override;

  std::vector<long> t;
  std::vector<std::vector<double>> rho;  // rho(t+1) per step
  std::vector<FlowRecord> flows;
};

/// Tracks total_mass before and after every step.
class MassRecorder final : public StepObserver {
 public:
  explicit MassRecorder(const TrafficNetwork& net) : len_{net.route_lengths()} {}
  void observe(long t, std::span<const double> rho_before, const FlowRecord& flows,
               std::span<const double> rho_after) override;

  double initial = 0.0;
  double last = 0.0;
  double max_drift = 0.0;  // max |mass(t) - mass(0)|
  bool started = false;

 private:
  std::span<const double> len_;
};

}  // namespace sctm

#endif  // SCTM_SIMULATOR_HPP
