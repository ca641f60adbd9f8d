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

#include "sctm/network.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "sctm/errors.hpp"

namespace sctm {
namespace {

std::string label_of(const std::vector<NodeDef>& defs, std::size_t i) { return std::to_string(defs[i].label); }

}  // namespace

TrafficNetwork::TrafficNetwork(std::vector<NodeDef> defs) {
  const std::size_t n = defs.size();
  adjacency_.assign(n * n, 0);

  std::map<int, std::size_t> labels;
  for (std::size_t i = 0; i < n; ++i) {
    if (!labels.emplace(defs[i].label, i).second) {
      throw ConfigError("duplicate node label " + label_of(defs, i));
    }
    if (!(defs[i].length > 0) || !std::isfinite(defs[i].length)) {
      throw ConfigError("node " + label_of(defs, i) + ": length must be positive");
    }
    auto& arms = defs[i].arms;
    for (std::size_t a : arms) {
      if (a >= n) throw ConfigError("node " + label_of(defs, i) + ": arm references a missing node");
      if (a == i) throw ConfigError("node " + label_of(defs, i) + ": self loops are not allowed");
    }
    std::vector<std::size_t> sorted = arms;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
      throw ConfigError("node " + label_of(defs, i) + ": repeated arm");
    }
    const auto& exits = defs[i].exits.empty() ? arms : defs[i].exits;
    for (std::size_t w : exits) {
      if (std::find(arms.begin(), arms.end(), w) == arms.end()) {
        throw ConfigError("node " + label_of(defs, i) + ": exit is not one of its arms");
      }
      adjacency_[i * n + w] = 1;
    }
  }
  // Every edge must also be known at its head, so the arm order there covers it.
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t v = 0; v < n; ++v) {
      if (adjacency_[u * n + v] && std::find(defs[v].arms.begin(), defs[v].arms.end(), u) == defs[v].arms.end()) {
        throw ConfigError("edge " + label_of(defs, u) + "->" + label_of(defs, v) + " is missing from the arms of node " +
                          label_of(defs, v));
      }
    }
  }

  nodes_.resize(n);
  for (std::size_t v = 0; v < n; ++v) {
    Node& node = nodes_[v];
    const NodeDef& def = defs[v];
    node.label = def.label;
    node.length = def.length;
    node.allow_uturn = def.allow_uturn;
    node.cell = def.cell;
    for (std::size_t a : def.arms) {
      node.arms.push_back(node_id(a));
      if (adjacency_[a * n + v]) node.in.push_back(node_id(a));
      if (adjacency_[v * n + a]) node.out.push_back(node_id(a));
    }
    try {
      node.cell.validate(def.arms.size());
    } catch (const ConfigError& e) {
      throw ConfigError("node " + label_of(defs, v) + ": " + e.what());
    }

    const std::size_t k = def.arms.size();
    node.local.assign(k * k, kNoRoute);
    for (std::size_t i = 0; i < k; ++i) {
      if (!adjacency_[def.arms[i] * n + v]) continue;
      for (std::size_t j = 0; j < k; ++j) {
        if (!adjacency_[v * n + def.arms[j]]) continue;
        if (i == j && !def.allow_uturn) continue;
        node.local[i * k + j] = static_cast<RouteId>(routes_.size());
        routes_.push_back({node_id(def.arms[i]), node_id(v), node_id(def.arms[j])});
        route_length_.push_back(def.length);
        arm_pos_.emplace_back(i, j);
      }
    }
  }

  // Links in (u, arm order of u) order; upstream routes (x,u,v) in arm order of u,
  // downstream routes (u,v,w) in arm order of v.
  link_of_.assign(routes_.size(), 0);
  for (std::size_t u = 0; u < n; ++u) {
    const Node& nu = nodes_[u];
    const std::size_t ku = nu.arms.size();
    for (std::size_t jv = 0; jv < ku; ++jv) {
      const std::size_t v = to_index(nu.arms[jv]);
      if (!adjacency_[u * n + v]) continue;
      Link link{node_id(u), node_id(v), {}, {}};
      for (std::size_t ix = 0; ix < ku; ++ix) {
        const RouteId r = nu.local[ix * ku + jv];
        if (r != kNoRoute) {
          link.upstream.push_back(r);
          link_of_[r] = links_.size();
        }
      }
      const Node& nv = nodes_[v];
      const std::size_t kv = nv.arms.size();
      const std::size_t iu = static_cast<std::size_t>(std::find(nv.arms.begin(), nv.arms.end(), node_id(u)) - nv.arms.begin());
      for (std::size_t jw = 0; jw < kv; ++jw) {
        const RouteId r = nv.local[iu * kv + jw];
        if (r != kNoRoute) link.downstream.push_back(r);
      }
      links_.push_back(std::move(link));
    }
  }
}

const TrafficNetwork::Node& TrafficNetwork::node(NodeId v) const {
  if (to_index(v) >= nodes_.size()) throw std::out_of_range("invalid node id " + std::to_string(to_index(v)));
  return nodes_[to_index(v)];
}

RouteId TrafficNetwork::find_route(const Route& r) const {
  if (to_index(r.via) >= nodes_.size()) return kNoRoute;
  const Node& nv = nodes_[to_index(r.via)];
  const auto i = std::find(nv.arms.begin(), nv.arms.end(), r.from);
  const auto j = std::find(nv.arms.begin(), nv.arms.end(), r.to);
  if (i == nv.arms.end() || j == nv.arms.end()) return kNoRoute;
  const std::size_t k = nv.arms.size();
  return nv.local[static_cast<std::size_t>(i - nv.arms.begin()) * k + static_cast<std::size_t>(j - nv.arms.begin())];
}

RouteId TrafficNetwork::route_id(const Route& r) const {
  const RouteId id = find_route(r);
  if (id == kNoRoute) throw std::out_of_range("route does not exist in the network");
  return id;
}

std::size_t TrafficNetwork::find_link(NodeId u, NodeId v) const {
  for (std::size_t i = 0; i < links_.size(); ++i) {
    if (links_[i].from == u && links_[i].to == v) return i;
  }
  return links_.size();
}

NodeId TrafficNetwork::node_by_label(int label) const {
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].label == label) return node_id(i);
  }
  throw ConfigError("unknown node " + std::to_string(label));
}

RouteId TrafficNetwork::route_by_labels(int u, int v, int w) const {
  const RouteId r = find_route({node_by_label(u), node_by_label(v), node_by_label(w)});
  if (r == kNoRoute) {
    throw ConfigError("route (" + std::to_string(u) + "," + std::to_string(v) + "," + std::to_string(w) +
                      ") does not exist");
  }
  return r;
}

std::string TrafficNetwork::describe(RouteId r) const {
  const Route& rt = routes_.at(r);
  return "(" + std::to_string(nodes_[to_index(rt.from)].label) + "," + std::to_string(nodes_[to_index(rt.via)].label) +
         "," + std::to_string(nodes_[to_index(rt.to)].label) + ")";
}

bool TrafficNetwork::has_edge(NodeId u, NodeId v) const {
  const std::size_t n = nodes_.size();
  if (to_index(u) >= n || to_index(v) >= n) throw std::out_of_range("invalid node id");
  return adjacency_[to_index(u) * n + to_index(v)] != 0;
}

std::span<const NodeId> neighbors_in(const TrafficNetwork& net, NodeId v) { return net.node(v).in; }
std::span<const NodeId> neighbors_out(const TrafficNetwork& net, NodeId v) { return net.node(v).out; }

// ---------------------------------------------------------------------------

TurningFractions TurningFractions::uniform(const TrafficNetwork& net) {
  TurningFractions tf;
  tf.values_.resize(net.link_count());
  for (std::size_t l = 0; l < net.link_count(); ++l) {
    const auto& link = net.link(l);
    const std::size_t m = link.upstream.size(), k = link.downstream.size();
    tf.values_[l].assign(m * k, k == 0 ? 0.0 : 1.0 / static_cast<double>(k));
    tf.cols_.push_back(k);
  }
  tf.validate(net);
  return tf;
}

TurningFractions TurningFractions::from_table(const TrafficNetwork& net, std::span<const Entry> entries) {
  TurningFractions tf;
  tf.values_.resize(net.link_count());
  for (std::size_t l = 0; l < net.link_count(); ++l) {
    tf.values_[l].assign(net.link(l).upstream.size() * net.link(l).downstream.size(), 0.0);
    tf.cols_.push_back(net.link(l).downstream.size());
  }
  for (const Entry& e : entries) {
    const RouteId up = net.find_route(e.route);
    if (up == kNoRoute) throw ConfigError("turning fraction for a route that does not exist");
    const RouteId down = net.find_route({e.route.via, e.route.to, e.to});
    if (down == kNoRoute) throw ConfigError("turning fraction " + net.describe(up) + " to a missing exit");
    const std::size_t l = net.link_of(up);
    const auto& link = net.link(l);
    const auto i = static_cast<std::size_t>(std::find(link.upstream.begin(), link.upstream.end(), up) - link.upstream.begin());
    const auto j = static_cast<std::size_t>(std::find(link.downstream.begin(), link.downstream.end(), down) -
                                            link.downstream.begin());
    tf.values_[l][i * link.downstream.size() + j] = e.fraction;
  }
  tf.validate(net);
  return tf;
}

double TurningFractions::at(std::size_t link, std::size_t up, std::size_t down) const {
  const std::size_t k = cols_.at(link);
  if (down >= k) throw std::out_of_range("turning fraction column");
  return values_.at(link).at(up * k + down);
}

void TurningFractions::validate(const TrafficNetwork& net, double tol) const {
  if (values_.size() != net.link_count()) throw ConfigError("turning fractions do not match the network");
  for (std::size_t l = 0; l < net.link_count(); ++l) {
    const auto& link = net.link(l);
    const std::size_t m = link.upstream.size(), k = link.downstream.size();
    if (values_[l].size() != m * k) throw ConfigError("turning fractions do not match the network");
    for (std::size_t i = 0; i < m; ++i) {
      if (k == 0) throw ConfigError("route " + net.describe(link.upstream[i]) + " has no continuation");
      double sum = 0.0;
      for (std::size_t j = 0; j < k; ++j) {
        const double f = values_[l][i * k + j];
        if (!(f >= 0.0 && f <= 1.0)) {
          throw ConfigError("turning fraction of " + net.describe(link.upstream[i]) + " outside [0, 1]");
        }
        sum += f;
      }
      if (std::abs(sum - 1.0) > tol) {
        throw ConfigError("turning fractions of " + net.describe(link.upstream[i]) + " sum to " + std::to_string(sum));
      }
    }
  }
}

void FlowRecord::resize(std::size_t routes) {
  q_in.assign(routes, 0.0);
  q_out.assign(routes, 0.0);
  q_net.assign(routes, 0.0);
  q_aux.assign(routes, 0.0);
}

double update_density(double rho, double l_v, double q_in, double q_out, double q_net) {
  if (!std::isfinite(rho) || !std::isfinite(l_v) || !std::isfinite(q_in) || !std::isfinite(q_out) ||
      !std::isfinite(q_net)) {
    throw NumericalError("non-finite input to the density update");
  }
  if (!(l_v > 0)) throw std::invalid_argument("cell length must be positive");
  return rho + ((q_in - q_out) + q_net) / l_v;
}

void aggregate_inflows(std::span<const double> outflows, const TurningFractions& turning, const TrafficNetwork& net,
                       std::span<double> inflows) {
  if (outflows.size() != net.route_count() || inflows.size() != net.route_count()) {
    throw std::invalid_argument("flow vectors must have one entry per route");
  }
  turning.validate(net);
  for (std::size_t l = 0; l < net.link_count(); ++l) {
    const auto& link = net.link(l);
    const auto f = turning.matrix(l);
    const std::size_t k = link.downstream.size();
    for (std::size_t j = 0; j < k; ++j) {
      double acc = 0.0;
      for (std::size_t i = 0; i < link.upstream.size(); ++i) acc += f[i * k + j] * outflows[link.upstream[i]];
      inflows[link.downstream[j]] = acc;
    }
  }
}

std::vector<double> aggregate_inflows(std::span<const double> outflows, const TurningFractions& turning,
                                      const TrafficNetwork& net) {
  std::vector<double> in(net.route_count(), 0.0);
  aggregate_inflows(outflows, turning, net, in);
  return in;
}

double total_mass(const DensityState& state, const TrafficNetwork& net) {
  if (state.rho.size() != net.route_count()) throw std::invalid_argument("state does not match the network");
  const auto len = net.route_lengths();
  double mass = 0.0;
  for (std::size_t r = 0; r < state.rho.size(); ++r) mass += len[r] * state.rho[r];
  return mass;
}

}  // namespace sctm
