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

#ifndef SCTM_NETWORK_HPP
#define SCTM_NETWORK_HPP

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sctm/cells.hpp"

namespace sctm {

/// Dense node index, 0 <= id < node_count(). External labels live on the node.
enum class NodeId : std::uint32_t {};

constexpr std::uint32_t to_index(NodeId v) noexcept { return static_cast<std::uint32_t>(v); }
constexpr NodeId node_id(std::size_t i) noexcept { return static_cast<NodeId>(i); }

/// Position of a route in the dense per-route arrays.
using RouteId = std::uint32_t;
inline constexpr RouteId kNoRoute = ~RouteId{0};

/// Direction of travel (u, v, w) through node v.
struct Route {
  NodeId from;
  NodeId via;
  NodeId to;
  bool operator==(const Route&) const = default;
};

/// Construction input for one node.
struct NodeDef {
  int label = 0;
  double length = 1.0;
  std::vector<std::size_t> arms;   // neighbour node indices in counter-clockwise order
  std::vector<std::size_t> exits;  // subset of arms that can be driven into; empty = all arms
  bool allow_uturn = false;
  CellSpec cell;
};

class TrafficNetwork {
 public:
  struct Node {
    int label = 0;
    double length = 1.0;
    std::vector<NodeId> arms;
    std::vector<NodeId> in;   // I(v), in arm order
    std::vector<NodeId> out;  // O(v), in arm order
    bool allow_uturn = false;
    CellSpec cell;
    std::vector<RouteId> local;  // arms x arms -> route id or kNoRoute
  };

  /// Directed edge (u, v) together with the routes it couples: upstream routes
  /// (x, u, v) at u and downstream routes (u, v, w) at v.
  struct Link {
    NodeId from;
    NodeId to;
    std::vector<RouteId> upstream;
    std::vector<RouteId> downstream;
  };

  explicit TrafficNetwork(std::vector<NodeDef> nodes);

  [[nodiscard]] std::size_t node_count() const noexcept { return nodes_.size(); }
  [[nodiscard]] std::size_t route_count() const noexcept { return routes_.size(); }
  [[nodiscard]] std::size_t link_count() const noexcept { return links_.size(); }

  [[nodiscard]] const Node& node(NodeId v) const;
  [[nodiscard]] const Route& route(RouteId r) const { return routes_.at(r); }
  [[nodiscard]] const Link& link(std::size_t i) const { return links_.at(i); }
  [[nodiscard]] std::span<const Route> routes() const noexcept { return routes_; }
  [[nodiscard]] std::span<const Link> links() const noexcept { return links_; }

  /// l_v of the node each route passes through, one entry per route.
  [[nodiscard]] std::span<const double> route_lengths() const noexcept { return route_length_; }
  /// Arm positions (entry, exit) of a route inside its node.
  [[nodiscard]] std::pair<std::size_t, std::size_t> arm_positions(RouteId r) const { return arm_pos_.at(r); }
  /// Index of the link whose upstream side contains route r = (x, u, v), i.e. link (u, v).
  [[nodiscard]] std::size_t link_of(RouteId r) const { return link_of_.at(r); }

  [[nodiscard]] RouteId find_route(const Route& r) const;
  [[nodiscard]] RouteId route_id(const Route& r) const;  // throws if absent
  [[nodiscard]] std::size_t find_link(NodeId u, NodeId v) const;  // link_count() if absent

  [[nodiscard]] NodeId node_by_label(int label) const;  // throws if absent
  [[nodiscard]] RouteId route_by_labels(int u, int v, int w) const;
  [[nodiscard]] std::string describe(RouteId r) const;  // "(u,v,w)" in labels

  [[nodiscard]] bool has_edge(NodeId u, NodeId v) const;

 private:
  std::vector<Node> nodes_;
  std::vector<Route> routes_;
  std::vector<Link> links_;
  std::vector<double> route_length_;
  std::vector<std::pair<std::size_t, std::size_t>> arm_pos_;
  std::vector<std::size_t> link_of_;
  std::vector<std::uint8_t> adjacency_;
};

std::span<const NodeId> neighbors_in(const TrafficNetwork& net, NodeId v);
std::span<const NodeId> neighbors_out(const TrafficNetwork& net, NodeId v);

/// f_{(x,u,v)->w}: for each link a row-major matrix upstream x downstream.
class TurningFractions {
 public:
  /// Uniform split over the available exits, never back to the entry arm
  /// unless the node allows U-turns.
  static TurningFractions uniform(const TrafficNetwork& net);

  struct Entry {
    Route route;  // (x, u, v)
    NodeId to;    // w
    double fraction;
  };
  /// Explicit table; unspecified pairs are 0. Throws if a row does not sum to 1.
  static TurningFractions from_table(const TrafficNetwork& net, std::span<const Entry> entries);

  [[nodiscard]] std::span<const double> matrix(std::size_t link) const { return values_.at(link); }
  [[nodiscard]] double at(std::size_t link, std::size_t up, std::size_t down) const;
  /// Mutable access for time-varying fractions; call validate() afterwards.
  [[nodiscard]] std::span<double> matrix_mut(std::size_t link) { return values_.at(link); }

  /// Checks every row of every link sums to one within `tol` and lies in [0, 1].
  void validate(const TrafficNetwork& net, double tol = 1e-12) const;

 private:
  std::vector<std::vector<double>> values_;
  std::vector<std::size_t> cols_;
};

struct DensityState {
  std::vector<double> rho;
  long t = 0;
};

struct FlowRecord {
  std::vector<double> q_in;
  std::vector<double> q_out;
  std::vector<double> q_net;
  std::vector<double> q_aux;  // attempted exogenous flow before clamping

  void resize(std::size_t routes);
};

/// rho + (q_in - q_out + q_net) / l_v.
double update_density(double rho, double l_v, double q_in, double q_out, double q_net);

/// q_in(u,v,w) = sum_x f_{(x,u,v)->w} q_out(x,u,v) for every route.
std::vector<double> aggregate_inflows(std::span<const double> outflows, const TurningFractions& turning,
                                      const TrafficNetwork& net);
void aggregate_inflows(std::span<const double> outflows, const TurningFractions& turning, const TrafficNetwork& net,
                       std::span<double> inflows);

double total_mass(const DensityState& state, const TrafficNetwork& net);

}  // namespace sctm

#endif  // SCTM_NETWORK_HPP
