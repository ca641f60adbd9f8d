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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <map>
#include <random>
#include <set>

#include "sctm/errors.hpp"
#include "sctm/network.hpp"
#include "sctm/scenario.hpp"
#include "test_util.hpp"

using namespace sctm;

namespace {

std::set<int> labels_of(const TrafficNetwork& net, std::span<const NodeId> ids) {
  std::set<int> out;
  for (NodeId v : ids) out.insert(net.node(v).label);
  return out;
}

NodeDef junction(int label, std::vector<std::size_t> arms) {
  NodeDef d;
  d.label = label;
  d.arms = std::move(arms);
  d.allow_uturn = d.arms.size() == 1;  // dead ends turn around
  d.cell.kind = CellKind::kSimplifiedIntersection;
  return d;
}

// u = 0 joins x1 = 1, x2 = 2 and v = 3; v continues to w1 = 4 and w2 = 5.
TrafficNetwork merge_split() {
  return TrafficNetwork({junction(0, {1, 2, 3}), junction(1, {0}), junction(2, {0}), junction(3, {0, 4, 5}),
                         junction(4, {3}), junction(5, {3})});
}

}  // namespace

TEST_CASE("neighbours of a two-node graph and an isolated node") {
  const TrafficNetwork pair({junction(0, {1}), junction(1, {0})});
  CHECK(labels_of(pair, neighbors_in(pair, node_id(0))) == std::set<int>{1});
  CHECK(labels_of(pair, neighbors_out(pair, node_id(1))) == std::set<int>{0});
  CHECK(pair.route_count() == 2);  // (1,0,1) and (0,1,0)

  const TrafficNetwork lone({junction(9, {})});
  CHECK(neighbors_in(lone, node_id(0)).empty());
  CHECK(lone.route_count() == 0);
  CHECK_THROWS(neighbors_in(lone, node_id(3)));
}

TEST_CASE("urban node 14 is reached from 13, 20, 15 and 9") {
  const auto net = build_network(load_config(testing::scenario_path("urban.json")));
  const NodeId v = net->node_by_label(14);
  CHECK(labels_of(*net, neighbors_in(*net, v)) == std::set<int>{13, 20, 15, 9});
  CHECK(labels_of(*net, neighbors_out(*net, v)) == std::set<int>{13, 20, 15, 9});
  CHECK(net->node_count() == 29);
}

TEST_CASE("routes exclude U-turns unless allowed and sit on edges") {
  const auto net = testing::ring(5);
  CHECK(net->route_count() == 10);
  for (const Route& r : net->routes()) {
    CHECK(r.from != r.to);
    CHECK(net->has_edge(r.from, r.via));
    CHECK(net->has_edge(r.via, r.to));
    CHECK(net->route_id(r) == net->find_route(r));
  }
  CHECK(net->find_route({node_id(0), node_id(1), node_id(0)}) == kNoRoute);
  CHECK(net->describe(net->route_by_labels(1, 2, 3)) == "(1,2,3)");
}

TEST_CASE("malformed networks are rejected") {
  CHECK_THROWS_AS(TrafficNetwork({junction(1, {1}), junction(1, {0})}), ConfigError);  // duplicate label
  CHECK_THROWS_AS(TrafficNetwork({junction(1, {5}), junction(2, {0})}), ConfigError);  // missing node
  CHECK_THROWS_AS(TrafficNetwork({junction(1, {1}), junction(2, {})}), ConfigError);   // edge unknown at head
  auto bad = junction(1, {1});
  bad.length = 0.0;
  CHECK_THROWS_AS(TrafficNetwork({bad, junction(2, {0})}), ConfigError);
  auto hw = junction(1, {1});
  hw.cell.kind = CellKind::kHighway;  // highways need two arms
  CHECK_THROWS_AS(TrafficNetwork({hw, junction(2, {0})}), ConfigError);
}

TEST_CASE("density update") {
  CHECK(update_density(5, 1, 1, 2, 0) == 4);
  CHECK(update_density(5, 3, 3, 0, 0) == 6);
  CHECK(update_density(0, 1, 0, 0, 0) == 0);
  CHECK(update_density(2, 4, 0, 0, -4) == doctest::Approx(1));
  CHECK_THROWS_AS(update_density(std::nan(""), 1, 0, 0, 0), NumericalError);
  CHECK_THROWS_AS(update_density(1, 1, INFINITY, 0, 0), NumericalError);
}

TEST_CASE("inflow aggregation") {
  SUBCASE("one predecessor, f = 1") {
    const auto net = testing::ring(3);
    const auto tf = TurningFractions::uniform(*net);
    std::vector<double> out(net->route_count(), 0.0);
    out[net->route_by_labels(1, 2, 3)] = 2.0;
    const auto in = aggregate_inflows(out, tf, *net);
    CHECK(in[net->route_by_labels(2, 3, 1)] == 2.0);
    double total = 0.0;
    for (double x : in) total += x;
    CHECK(total == 2.0);
  }
  SUBCASE("two predecessors, f = 0.5 each") {
    const TrafficNetwork net = merge_split();
    const auto tf = TurningFractions::uniform(net);
    std::vector<double> out(net.route_count(), 0.0);
    out[net.route_by_labels(1, 0, 3)] = 2.0;
    out[net.route_by_labels(2, 0, 3)] = 4.0;
    const auto in = aggregate_inflows(out, tf, net);
    CHECK(in[net.route_by_labels(0, 3, 4)] == doctest::Approx(3.0));
    CHECK(in[net.route_by_labels(0, 3, 5)] == doctest::Approx(3.0));
  }
  SUBCASE("rows that do not sum to one are rejected") {
    const auto net = testing::ring(3);
    std::vector<TurningFractions::Entry> entries;
    for (const Route& r : net->routes()) {
      // In a 3-ring without U-turns every route has exactly one continuation.
      const Route next_route = [&] {
        for (const Route& s : net->routes())
          if (s.from == r.via && s.via == r.to) return s;
        return r;
      }();
      entries.push_back({r, next_route.to, 1.0});
    }
    CHECK_NOTHROW(TurningFractions::from_table(*net, entries));
    entries[0].fraction = 0.9;
    CHECK_THROWS_AS(TurningFractions::from_table(*net, entries), ConfigError);
  }
}

TEST_CASE("inflow aggregation is linear") {
  const auto net = build_network(load_config(testing::scenario_path("urban.json")));
  const auto tf = TurningFractions::uniform(*net);
  tf.validate(*net);
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> U(0.0, 3.0);
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<double> a(net->route_count()), b(net->route_count()), ab(net->route_count());
    const double alpha = U(gen), beta = U(gen);
    for (std::size_t r = 0; r < a.size(); ++r) {
      a[r] = U(gen);
      b[r] = U(gen);
      ab[r] = alpha * a[r] + beta * b[r];
    }
    const auto ia = aggregate_inflows(a, tf, *net), ib = aggregate_inflows(b, tf, *net),
               iab = aggregate_inflows(ab, tf, *net);
    for (std::size_t r = 0; r < a.size(); ++r) CHECK(iab[r] == doctest::Approx(alpha * ia[r] + beta * ib[r]).epsilon(1e-12));
  }
}

TEST_CASE("total mass") {
  const auto net = testing::ring(4, 3.0);
  DensityState s{std::vector<double>(net->route_count(), 0.0), 0};
  CHECK(total_mass(s, *net) == 0.0);
  s.rho[net->route_by_labels(1, 2, 3)] = 5.0;
  CHECK(total_mass(s, *net) == 15.0);
  s.rho.pop_back();
  CHECK_THROWS(total_mass(s, *net));
}

TEST_CASE("urban initial mass equals the route count times the initial densities") {
  const auto cfg = load_config(testing::scenario_path("urban.json"));
  const Scenario sc(cfg);
  const auto state = sc.initial_state();
  // Independent count from the node table: k arms give k(k-1) routes.
  std::map<std::string, std::pair<double, double>> by_type;  // length, rho0
  for (const auto& t : cfg.cell_types) by_type[t.name].first = t.length;
  for (const auto& [name, rho] : cfg.run.initial.per_type) by_type[name].second = rho;
  double expected = 0.0;
  std::size_t routes = 0;
  for (const auto& n : cfg.nodes) {
    const double k = static_cast<double>(n.arms.size());
    expected += k * (k - 1) * by_type[n.type].first * by_type[n.type].second;
    routes += n.arms.size() * (n.arms.size() - 1);
  }
  CHECK(routes == sc.network().route_count());
  // 21 roads x 2 routes x 3 x 5 + 6 Y x 6 routes x 1 x 1 + 2 signals x 12 routes x 1 x 1
  CHECK(expected == doctest::Approx(21 * 2 * 3 * 5 + 6 * 6 + 2 * 12));
  CHECK(total_mass(state, sc.network()) == doctest::Approx(expected).epsilon(1e-14));
}
