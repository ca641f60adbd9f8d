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

#include "sctm/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "sctm/errors.hpp"

namespace sctm {

FlowEngine::FlowEngine(std::shared_ptr<const TrafficNetwork> net, TurningFractions turning, InteractionRule rule,
                       PriorityHook priority_hook)
    : net_{std::move(net)},
      turning_{std::move(turning)},
      rule_{std::move(rule)},
      hook_{std::move(priority_hook)},
      kernels_{&simd::active_kernels()} {
  if (!net_) throw std::invalid_argument("engine needs a network");
  turning_.validate(*net_);
  validate_rule(rule_, *net_);

  for (std::size_t v = 0; v < net_->node_count(); ++v) {
    if (net_->node(node_id(v)).cell.kind == CellKind::kSignalizedIntersection) signalized_.push_back(node_id(v));
    if (net_->node(node_id(v)).cell.kind == CellKind::kMultiPopRoundabout) {
      throw ConfigError("multi-population roundabouts cannot be simulated in a single-population network");
    }
  }

  const std::size_t nl = net_->link_count();
  if (const auto* cpf = std::get_if<CpfRule>(&rule_)) {
    cpf_weights_.resize(nl);
    for (std::size_t l = 0; l < nl; ++l) {
      const std::size_t m = net_->link(l).upstream.size();
      if (!cpf->weights.empty() && !cpf->weights[l].empty()) {
        cpf_weights_[l] = cpf->weights[l];
      } else {
        cpf_weights_[l].assign(m, m == 0 ? 0.0 : 1.0 / static_cast<double>(m));
      }
    }
  } else if (const auto* pr = std::get_if<PriorityRule>(&rule_)) {
    orders_.resize(nl);
    for (std::size_t l = 0; l < nl; ++l) {
      if (!pr->orders.empty() && !pr->orders[l].empty()) {
        orders_[l] = pr->orders[l];
      } else {
        orders_[l].resize(net_->link(l).upstream.size());
        std::iota(orders_[l].begin(), orders_[l].end(), std::size_t{0});
      }
    }
  }
}

FlowEngine::Workspace FlowEngine::make_workspace() const {
  Workspace ws;
  const std::size_t n = net_->route_count();
  ws.sending.assign(n, 0.0);
  ws.receiving.assign(n, 0.0);
  ws.next.assign(n, 0.0);
  std::size_t max_arms = 0, max_up = 0, max_down = 0;
  for (std::size_t v = 0; v < net_->node_count(); ++v) max_arms = std::max(max_arms, net_->node(node_id(v)).arms.size());
  for (const auto& link : net_->links()) {
    max_up = std::max(max_up, link.upstream.size());
    max_down = std::max(max_down, link.downstream.size());
  }
  ws.local.assign(max_arms * max_arms, 0.0);
  ws.la.assign(max_arms * max_arms, 0.0);
  ws.s_link.assign(max_up, 0.0);
  ws.r_link.assign(max_down, 0.0);
  ws.q_link.assign(max_up, 0.0);
  ws.orders = orders_;
  ws.schedule_of.assign(net_->node_count(), nullptr);
  return ws;
}

void FlowEngine::bind_signals(const SignalBoard& board, Workspace& ws) const {
  ws.schedule_of.assign(net_->node_count(), nullptr);
  for (const SignalPlan& plan : board) {
    const auto& node = net_->node(plan.node);
    if (node.cell.kind != CellKind::kSignalizedIntersection) {
      throw ConfigError("signal plan for node " + std::to_string(node.label) + ", which is not signalized");
    }
    if (ws.schedule_of[to_index(plan.node)] != nullptr) {
      throw ConfigError("node " + std::to_string(node.label) + " has two signal plans");
    }
    plan.schedule.validate(node.arms.size());
    ws.schedule_of[to_index(plan.node)] = &plan.schedule;
  }
  for (NodeId v : signalized_) {
    if (ws.schedule_of[to_index(v)] == nullptr) {
      throw ConfigError("signalized node " + std::to_string(net_->node(v).label) + " has no signal plan");
    }
  }
}

void FlowEngine::solve_link(std::size_t l, const LocalProblem& p, std::span<double> out, Workspace& ws) const {
  switch (rule_.index()) {
    case 0:
      solve_dpf(p, out);
      break;
    case 1:
      solve_cpf(p, cpf_weights_[l], out);
      break;
    case 2:
      solve_priority(p, ws.orders[l], out);
      break;
    default:
      solve_cooperative(p, out, ws.lp);
      break;
  }
}

void FlowEngine::step(DensityState& state, FlowRecord& flows, NetFlowModel* env, Workspace& ws) const {
  const TrafficNetwork& net = *net_;
  const std::size_t nr = net.route_count();
  if (state.rho.size() != nr) throw std::invalid_argument("state does not match the network");
  if (flows.q_out.size() != nr || flows.q_aux.size() != nr) flows.resize(nr);
  const long t = state.t;
  const std::span<const double> rho = state.rho;

  // Phase 1: sending and receiving of every route, node by node.
  for (std::size_t v = 0; v < net.node_count(); ++v) {
    const auto& node = net.node(node_id(v));
    const std::size_t k = node.arms.size();
    if (k == 0) continue;
    std::span<double> local(ws.local.data(), k * k);
    for (std::size_t i = 0; i < k * k; ++i) {
      const RouteId r = node.local[i];
      local[i] = r == kNoRoute ? 0.0 : rho[r];
    }
    const LocalDensities dens(k, local);
    const LightAdjust* light = nullptr;
    std::optional<LightAdjust> la;
    if (node.cell.kind == CellKind::kSignalizedIntersection) {
      const SignalSchedule* sched = ws.schedule_of[v];
      if (sched == nullptr) throw ConfigError("signalized node " + std::to_string(node.label) + " has no signal plan");
      light_adjustments(*sched, k, t, ws.la.data());
      la.emplace(k, std::span<const double>(ws.la.data(), k * k));
      light = &*la;
    }
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t j = 0; j < k; ++j) {
        const RouteId r = node.local[i * k + j];
        if (r == kNoRoute) continue;
        ws.sending[r] = sending(node.cell, i, j, dens, light);
        ws.receiving[r] = receiving(node.cell, i, j, dens);
      }
    }
  }

  // Phase 2: outflows per link (u, v) from the local problems.
  if (hook_ && rule_.index() == 2) {
    hook_(t, ws.orders);
    validate_rule(PriorityRule{ws.orders}, net);
  }
  for (std::size_t l = 0; l < net.link_count(); ++l) {
    const auto& link = net.link(l);
    const std::size_t m = link.upstream.size(), kd = link.downstream.size();
    if (m == 0) continue;
    for (std::size_t x = 0; x < m; ++x) ws.s_link[x] = ws.sending[link.upstream[x]];
    for (std::size_t w = 0; w < kd; ++w) ws.r_link[w] = ws.receiving[link.downstream[w]];
    const LocalProblem p{std::span<const double>(ws.s_link.data(), m), std::span<const double>(ws.r_link.data(), kd),
                         turning_.matrix(l)};
    std::span<double> q(ws.q_link.data(), m);
    solve_link(l, p, q, ws);
    for (std::size_t x = 0; x < m; ++x) flows.q_out[link.upstream[x]] = q[x];
  }

  // Phase 3: inflows through the turning fractions.
  for (std::size_t l = 0; l < net.link_count(); ++l) {
    const auto& link = net.link(l);
    const auto f = turning_.matrix(l);
    const std::size_t kd = link.downstream.size();
    for (std::size_t w = 0; w < kd; ++w) {
      double acc = 0.0;
      for (std::size_t x = 0; x < link.upstream.size(); ++x) acc += f[x * kd + w] * flows.q_out[link.upstream[x]];
      flows.q_in[link.downstream[w]] = acc;
    }
  }

  // Phase 4: exogenous net flows.
  if (env != nullptr) {
    env->net_flows(NetFlowContext{net, t, rho, flows.q_in, flows.q_out}, flows.q_net, flows.q_aux);
  } else {
    std::fill(flows.q_net.begin(), flows.q_net.end(), 0.0);
    std::fill(flows.q_aux.begin(), flows.q_aux.end(), 0.0);
  }

  // Phase 5: density update.
  const double worst = kernels_->density_update(rho.data(), net.route_lengths().data(), flows.q_in.data(),
                                                flows.q_out.data(), flows.q_net.data(), ws.next.data(), nr);
  if (!std::isfinite(worst)) throw NumericalError("non-finite density at step " + std::to_string(t + 1));
  if (worst < 0.0) {
    if (worst < -1e-12) {
      throw NumericalError("density " + std::to_string(worst) + " below zero at step " + std::to_string(t + 1));
    }
    for (double& x : ws.next) x = std::max(x, 0.0);
  }
  for (double x : ws.next) {
    if (!std::isfinite(x)) throw NumericalError("non-finite density at step " + std::to_string(t + 1));
  }
  state.rho.swap(ws.next);
  state.t = t + 1;
}

void run_simulation(const FlowEngine& engine, DensityState& state, long steps, const SignalBoard& board,
                    NetFlowModel* env, std::span<StepObserver* const> observers) {
  auto ws = engine.make_workspace();
  engine.bind_signals(board, ws);
  FlowRecord flows;
  flows.resize(engine.network().route_count());
  std::vector<double> before;
  for (long s = 0; s < steps; ++s) {
    const long t = state.t;
    if (!observers.empty()) before = state.rho;
    engine.step(state, flows, env, ws);
    for (StepObserver* o : observers) o->observe(t, before, flows, state.rho);
  }
}

void TrajectoryRecorder::observe(long step, std::span<const double>, const FlowRecord& f,
                                 std::span<const double> rho_after) {
  t.push_back(step);
  rho.emplace_back(rho_after.begin(), rho_after.end());
  flows.push_back(f);
}

void MassRecorder::observe(long, std::span<const double> rho_before, const FlowRecord&,
                           std::span<const double> rho_after) {
  auto mass = [&](std::span<const double> r) {
    double m = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) m += len_[i] * r[i];
    return m;
  };
  if (!started) {
    initial = mass(rho_before);
    started = true;
  }
  last = mass(rho_after);
  max_drift = std::max(max_drift, std::abs(last - initial));
}

}  // namespace sctm
