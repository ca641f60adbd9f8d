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

#include "sctm/scenario.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <numbers>
#include <string>

#include "sctm/errors.hpp"

namespace sctm {
namespace {

const CellTypeConfig& type_of(const ScenarioConfig& c, const std::string& name) {
  for (const auto& t : c.cell_types) {
    if (t.name == name) return t;
  }
  throw ConfigError("unknown cell type \"" + name + "\"");
}

std::string link_name(const std::array<int, 2>& l) {
  return "(" + std::to_string(l[0]) + "," + std::to_string(l[1]) + ")";
}

// Upstream position of route (x, u, v) inside link (u, v).
std::size_t upstream_position(const TrafficNetwork& net, std::size_t link, int x) {
  const auto& lk = net.link(link);
  const NodeId xn = net.node_by_label(x);
  for (std::size_t i = 0; i < lk.upstream.size(); ++i) {
    if (net.route(lk.upstream[i]).from == xn) return i;
  }
  throw ConfigError("no route from " + std::to_string(x) + " through link (" + std::to_string(net.node(lk.from).label) +
                    "," + std::to_string(net.node(lk.to).label) + ")");
}

std::size_t link_index(const TrafficNetwork& net, const std::array<int, 2>& l) {
  const std::size_t i = net.find_link(net.node_by_label(l[0]), net.node_by_label(l[1]));
  if (i == net.link_count()) throw ConfigError("unknown link " + link_name(l));
  return i;
}

}  // namespace

std::shared_ptr<const TrafficNetwork> build_network(const ScenarioConfig& c) {
  std::map<int, std::size_t> index;
  for (std::size_t i = 0; i < c.nodes.size(); ++i) index[c.nodes[i].id] = i;
  auto lookup = [&](int label) {
    auto it = index.find(label);
    if (it == index.end()) throw ConfigError("unknown node " + std::to_string(label));
    return it->second;
  };
  std::vector<NodeDef> defs;
  defs.reserve(c.nodes.size());
  for (const auto& n : c.nodes) {
    const auto& t = type_of(c, n.type);
    NodeDef d;
    d.label = n.id;
    d.length = n.length.value_or(t.length);
    for (int a : n.arms) d.arms.push_back(lookup(a));
    for (int e : n.exits) d.exits.push_back(lookup(e));
    d.allow_uturn = n.allow_uturn;
    d.cell = CellSpec{t.kind, t.params, std::nullopt};
    defs.push_back(std::move(d));
  }
  return std::make_shared<const TrafficNetwork>(std::move(defs));
}

TurningFractions build_turning(const ScenarioConfig& c, const TrafficNetwork& net) {
  if (c.turning == "uniform") return TurningFractions::uniform(net);
  std::vector<TurningFractions::Entry> entries;
  for (const auto& e : c.turning_table) {
    const Route r{net.node_by_label(e.route[0]), net.node_by_label(e.route[1]), net.node_by_label(e.route[2])};
    entries.push_back({r, net.node_by_label(e.to), e.fraction});
  }
  return TurningFractions::from_table(net, entries);
}

InteractionRule build_rule(const RuleConfig& rule, const TrafficNetwork& net) {
  if (rule.kind == "dpf") return DpfRule{};
  if (rule.kind == "cooperative") return CooperativeRule{};
  if (rule.kind == "cpf") {
    CpfRule r;
    if (!rule.cpf_weights.empty()) r.weights.resize(net.link_count());
    for (const auto& lw : rule.cpf_weights) {
      const std::size_t l = link_index(net, lw.link);
      auto& w = r.weights[l];
      w.assign(net.link(l).upstream.size(), 0.0);
      if (lw.from.size() != w.size()) throw ConfigError("CPF weights of link " + link_name(lw.link) + " need one entry per upstream route");
      for (std::size_t i = 0; i < lw.from.size(); ++i) w[upstream_position(net, l, lw.from[i])] = lw.weights[i];
    }
    return r;
  }
  if (rule.kind == "priority") {
    PriorityRule r;
    if (!rule.priority.empty()) r.orders.resize(net.link_count());
    for (const auto& lw : rule.priority) {
      const std::size_t l = link_index(net, lw.link);
      auto& o = r.orders[l];
      if (lw.from.size() != net.link(l).upstream.size()) {
        throw ConfigError("priority order of link " + link_name(lw.link) + " must list every upstream node");
      }
      for (int x : lw.from) o.push_back(upstream_position(net, l, x));
    }
    return r;
  }
  throw ConfigError("unknown interaction rule \"" + rule.kind + "\"");
}

// ---------------------------------------------------------------------------

Scenario::Scenario(ScenarioConfig config) : config_{std::move(config)} {
  if (config_.synthetic) return;
  net_ = build_network(config_);
  auto turning = build_turning(config_, *net_);
  engine_ = std::make_unique<FlowEngine>(net_, std::move(turning), build_rule(config_.run.rule, *net_));

  for (const auto& s : config_.signals) {
    const NodeId v = net_->node_by_label(s.node);
    signal_nodes_.push_back(to_index(v));
    const auto& node = net_->node(v);
    auto arm = [&](int label) {
      const NodeId a = net_->node_by_label(label);
      const auto it = std::find(node.arms.begin(), node.arms.end(), a);
      if (it == node.arms.end()) {
        throw ConfigError("signal at node " + std::to_string(s.node) + ": " + std::to_string(label) + " is not an arm");
      }
      return static_cast<std::size_t>(it - node.arms.begin());
    };
    for (int a : s.axis_i) arm(a);
    for (int a : s.axis_j) arm(a);
  }
  // Fail early on malformed plans and unresolvable sources.
  const auto k = default_design();
  auto ws = engine_->make_workspace();
  const auto board = signal_board(k);
  engine_->bind_signals(board, ws);
  environment(k).validate(*net_);
  PerformanceAccumulator check(*net_, measure());
  (void)initial_state();
}

const TrafficNetwork& Scenario::network() const {
  if (!net_) throw std::logic_error("synthetic scenarios have no network");
  return *net_;
}

const FlowEngine& Scenario::engine() const {
  if (!engine_) throw std::logic_error("synthetic scenarios have no engine");
  return *engine_;
}

std::vector<double> Scenario::default_design() const {
  std::vector<double> k;
  for (const auto& d : config_.design) k.push_back(d.value);
  return k;
}

std::vector<std::size_t> Scenario::vary_indices() const {
  std::vector<std::size_t> out;
  if (config_.learning.vary.empty()) {
    for (std::size_t i = 0; i < design_dim(); ++i) out.push_back(i);
  } else {
    for (const auto& n : config_.learning.vary) out.push_back(config_.design_index(n));
  }
  return out;
}

std::vector<double> Scenario::embed(std::span<const double> sub) const {
  const auto idx = vary_indices();
  if (sub.size() != idx.size()) throw std::invalid_argument("design slice has the wrong dimension");
  auto k = default_design();
  for (std::size_t i = 0; i < idx.size(); ++i) k[idx[i]] = sub[i];
  return k;
}

void Scenario::check_design(std::span<const double> k) const {
  if (k.size() != design_dim()) {
    throw ConfigError("design vector has " + std::to_string(k.size()) + " entries, expected " +
                      std::to_string(design_dim()));
  }
  for (std::size_t i = 0; i < k.size(); ++i) {
    const auto& d = config_.design[i];
    if (!std::isfinite(k[i])) throw ConfigError("design coordinate " + d.name + " is not finite");
    if (k[i] < d.lower || k[i] > d.upper) {
      throw ConfigError("design coordinate " + d.name + " = " + std::to_string(k[i]) + " lies outside [" +
                        std::to_string(d.lower) + ", " + std::to_string(d.upper) + "]");
    }
  }
}

std::vector<double> Scenario::realize(std::span<const double> k, RngStream& rng) const {
  std::vector<double> out(k.begin(), k.end());
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!config_.design[i].integer) continue;
    const double lo = std::floor(out[i]);
    const double u = rng.uniform();
    out[i] = lo + (u < out[i] - lo ? 1.0 : 0.0);
  }
  return out;
}

double Scenario::resolve(const ParamRef& p, std::span<const double> k) const {
  if (p.is_constant()) return p.value;
  return p.scale * k[config_.design_index(p.design)];
}

SignalBoard Scenario::signal_board(std::span<const double> realized) const {
  SignalBoard board;
  for (std::size_t s = 0; s < config_.signals.size(); ++s) {
    const auto& sc = config_.signals[s];
    const auto& node = net_->node(node_id(signal_nodes_[s]));
    auto arm = [&](int label) {
      const NodeId a = net_->node_by_label(label);
      return static_cast<std::size_t>(std::find(node.arms.begin(), node.arms.end(), a) - node.arms.begin());
    };
    SignalSchedule sched;
    sched.green_steps = std::max(1L, std::lround(resolve(sc.green, realized)));
    sched.shift_steps = std::max(0L, std::lround(resolve(sc.shift, realized)));
    for (int a : sc.axis_i) sched.axis_i.push_back(arm(a));
    for (int a : sc.axis_j) sched.axis_j.push_back(arm(a));
    sched.a_real = sc.a_real;
    sched.t_safe = sc.t_safe;
    sched.t_real = config_.run.t_real;
    sched.v_real = sc.v_real;
    board.push_back({node_id(signal_nodes_[s]), std::move(sched)});
  }
  return board;
}

EnvironmentSpec Scenario::environment(std::span<const double> realized) const {
  EnvironmentSpec spec;
  if (config_.copula_r) spec.copula = FrankCopula{resolve(*config_.copula_r, realized)};
  for (const auto& sc : config_.sources) {
    SourceSpec s;
    s.route = net_->route_by_labels(sc.route[0], sc.route[1], sc.route[2]);
    const double rho_max = net_->node(net_->route(s.route).via).cell.params.rho_max;
    s.rho_cap = sc.cap == "half_rho_max" ? 0.5 * rho_max : rho_max;
    if (sc.kind == "random_walk") {
      s.kind = SourceSpec::Kind::kRandomWalk;
      s.sigma = resolve(sc.sigma, realized);
      s.copula_slot = sc.copula_slot;
    } else if (sc.kind == "gaussian") {
      s.kind = SourceSpec::Kind::kGaussian;
      s.mean = resolve(sc.mean, realized);
      s.cv = resolve(sc.cv, realized);
    } else if (sc.kind == "copy") {
      s.kind = SourceSpec::Kind::kCopy;
      s.scale = sc.scale;
      const RouteId of = net_->route_by_labels((*sc.of)[0], (*sc.of)[1], (*sc.of)[2]);
      const auto it = std::find_if(spec.sources.begin(), spec.sources.end(),
                                   [&](const SourceSpec& o) { return o.route == of; });
      if (it == spec.sources.end()) {
        throw ConfigError("source on " + net_->describe(s.route) + " copies " + net_->describe(of) +
                          ", which is not an earlier source");
      }
      s.of = static_cast<std::size_t>(it - spec.sources.begin());
    } else {
      s.kind = SourceSpec::Kind::kConstant;
      s.value = resolve(sc.value, realized);
    }
    spec.sources.push_back(s);
  }
  return spec;
}

DensityState Scenario::initial_state() const {
  const auto& net = *net_;
  const auto& in = config_.run.initial;
  DensityState st;
  st.rho.assign(net.route_count(), 0.0);
  if (in.mode == "value") {
    std::fill(st.rho.begin(), st.rho.end(), in.value);
  } else if (in.mode == "per_type") {
    for (RouteId r = 0; r < net.route_count(); ++r) {
      const NodeId v = net.route(r).via;
      const auto& node = config_.nodes[to_index(v)];
      const auto it = in.per_type.find(node.type);
      st.rho[r] = it == in.per_type.end() ? 0.0 : it->second;
    }
  } else {
    // rho_max_v spread evenly over the routes through v, times the fraction.
    std::vector<std::size_t> count(net.node_count(), 0);
    for (const auto& r : net.routes()) ++count[to_index(r.via)];
    for (RouteId r = 0; r < net.route_count(); ++r) {
      const NodeId v = net.route(r).via;
      st.rho[r] = net.node(v).cell.params.rho_max / static_cast<double>(count[to_index(v)]) * in.value;
    }
  }
  return st;
}

PerformanceMeasure Scenario::measure() const {
  const auto& m = config_.evaluation.measure;
  if (m.kind == "Q") return AvgNetworkFlow{};
  auto route = [&](const RouteLabels& r) { return net_->route_by_labels(r[0], r[1], r[2]); };
  if (m.kind == "Qa") {
    Throughput t;
    if (m.routes.empty()) {
      for (const auto& s : config_.sources) t.routes.push_back(route(s.route));
    } else {
      for (const auto& r : m.routes) t.routes.push_back(route(r));
    }
    return t;
  }
  return AvgVelocity{route(m.routes.at(0)), route(m.routes.at(1))};
}

double Scenario::synthetic_mean(std::span<const double> k) const {
  if (!config_.synthetic) throw std::logic_error("not a synthetic scenario");
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  if (config_.synthetic->function == "sin") return std::sin(kTwoPi * k[0]);
  return std::sin(kTwoPi * k[0]) * std::cos(kTwoPi * k[1]);
}

double Scenario::sample(std::span<const double> k, std::uint64_t seed, std::uint64_t index,
                        std::span<StepObserver* const> extra) const {
  check_design(k);
  RngStream rng(seed, index);
  if (config_.synthetic) return synthetic_mean(k) + config_.synthetic->noise * rng.normal();

  const auto realized = realize(k, rng);
  const auto board = signal_board(realized);
  std::unique_ptr<SourceSinkModel> env;
  if (!config_.sources.empty()) env = std::make_unique<SourceSinkModel>(environment(realized), rng);
  auto state = initial_state();
  PerformanceAccumulator acc(*net_, measure());
  std::vector<StepObserver*> observers{&acc};
  observers.insert(observers.end(), extra.begin(), extra.end());
  run_simulation(*engine_, state, config_.run.steps, board, env.get(), observers);
  return acc.value();
}

ReplicateSampler Scenario::sampler(std::vector<double> k, std::uint64_t seed) const {
  check_design(k);
  return [this, k = std::move(k), seed](std::uint64_t index) { return sample(k, seed, index); };
}

std::uint64_t point_seed(std::uint64_t seed, std::span<const double> k) {
  std::uint64_t h = mix64(seed);
  for (double x : k) h = derive_seed(h, std::bit_cast<std::uint64_t>(x == 0.0 ? 0.0 : x));
  return h;
}

}  // namespace sctm
