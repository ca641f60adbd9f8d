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

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <random>
#include <vector>

#include "sctm/cells.hpp"
#include "sctm/config.hpp"
#include "sctm/environment.hpp"
#include "sctm/network.hpp"
#include "sctm/rng.hpp"
#include "sctm/scenario.hpp"
#include "sctm/signals.hpp"
#include "sctm/simulator.hpp"
#include "sctm/solvers.hpp"
#include "solver_oracles.hpp"
#include "test_util.hpp"

using namespace sctm;
using namespace sctm::testing;

TEST_CASE("demand-proportional examples") {
  std::vector<double> q(1);
  Instance a{{4}, {2}, {1}};
  CHECK(solve_dpf(a.problem(), q) == 0.5);
  CHECK(q[0] == 2);
  // Grid search over lambda agrees with the closed form.
  double best = 0.0;
  for (int i = 0; i <= 100000; ++i) {
    const double lam = i / 100000.0;
    if (lam * 4 <= 2) best = lam;
  }
  CHECK(best == doctest::Approx(0.5));
  Instance b{{1}, {5}, {1}};
  CHECK(solve_dpf(b.problem(), q) == 1.0);
  CHECK(q[0] == 1);
  Instance c{{0, 0}, {0}, {1, 1}};
  std::vector<double> q2(2, 7.0);
  CHECK(solve_dpf(c.problem(), q2) == 1.0);
  CHECK(q2[0] == 0);
  CHECK(q2[1] == 0);
}

TEST_CASE("demand-proportional lambda matches brute force") {
  std::mt19937_64 gen(11);
  for (int rep = 0; rep < 1000; ++rep) {
    const auto in = random_instance(gen, 1 + rep % 4, 1 + (rep / 4) % 4);
    std::vector<double> q(in.m());
    const double lam = solve_dpf(in.problem(), q);
    CHECK(lam == doctest::Approx(dpf_oracle(in)).epsilon(1e-8));
    CHECK(infeasibility(in, q) <= 1e-9);
  }
}

TEST_CASE("capacity-proportional examples") {
  Instance in{{4, 4}, {2}, {1, 1}};
  const std::vector<double> d{0.5, 0.5};
  std::vector<double> q(2);
  CHECK(solve_cpf(in.problem(), d, q) == doctest::Approx(0.5));
  CHECK(q[0] == doctest::Approx(1.0));
  CHECK(q[1] == doctest::Approx(1.0));
  const auto oracle = cpf_oracle(in, d);
  CHECK(oracle[0] == doctest::Approx(1.0));

  Instance free{{4, 4}, {9}, {1, 1}};
  solve_cpf(free.problem(), d, q);
  CHECK(q[0] == 4);
  CHECK(q[1] == 4);

  const std::vector<double> d0{1.0, 0.0};
  solve_cpf(in.problem(), d0, q);
  CHECK(q[0] == doctest::Approx(2.0));
  CHECK(q[1] == 0.0);
}

TEST_CASE("capacity-proportional breakpoint walk matches bisection") {
  std::mt19937_64 gen(12);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int rep = 0; rep < 1000; ++rep) {
    const auto in = random_instance(gen, 1 + rep % 4, 1 + (rep / 4) % 3);
    std::vector<double> d(in.m());
    double sum = 0.0;
    for (auto& v : d) sum += v = U(gen);
    for (auto& v : d) v /= sum;
    std::vector<double> q(in.m());
    solve_cpf(in.problem(), d, q);
    const auto oracle = cpf_oracle(in, d);
    for (std::size_t x = 0; x < in.m(); ++x) CHECK(q[x] == doctest::Approx(oracle[x]).epsilon(1e-8).scale(1.0));
    CHECK(infeasibility(in, q) <= 1e-9);
  }
}

TEST_CASE("priority examples and recursion") {
  Instance in{{4, 3}, {3}, {1, 1}};
  std::vector<double> q(2);
  const std::vector<std::size_t> first{0, 1}, second{1, 0};
  solve_priority(in.problem(), first, q);
  CHECK(q == std::vector<double>{3, 0});
  solve_priority(in.problem(), second, q);
  CHECK(q == std::vector<double>{0, 3});
  Instance wide{{4, 3}, {10}, {1, 1}};
  solve_priority(wide.problem(), first, q);
  CHECK(q == std::vector<double>{4, 3});

  std::mt19937_64 gen(13);
  for (int rep = 0; rep < 500; ++rep) {
    const auto inst = random_instance(gen, 1 + rep % 4, 1 + (rep / 4) % 3);
    std::vector<std::size_t> order(inst.m());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::shuffle(order.begin(), order.end(), gen);
    std::vector<double> out(inst.m());
    solve_priority(inst.problem(), order, out);
    const auto oracle = priority_oracle(inst, order);
    for (std::size_t x = 0; x < inst.m(); ++x) CHECK(out[x] == doctest::Approx(oracle[x]).epsilon(1e-12).scale(1.0));
    CHECK(infeasibility(inst, out) <= 1e-9);
  }
}

TEST_CASE("cooperative examples and vertex enumeration") {
  Instance in{{4, 3}, {3}, {1, 1}};
  std::vector<double> q(2);
  solve_cooperative(in.problem(), q);
  CHECK(q[0] == doctest::Approx(3.0));
  CHECK(q[1] == doctest::Approx(0.0));
  Instance wide{{4, 3}, {10}, {1, 1}};
  solve_cooperative(wide.problem(), q);
  CHECK(q[0] == doctest::Approx(4.0));
  CHECK(q[1] == doctest::Approx(3.0));

  std::mt19937_64 gen(14);
  DenseSimplex lp;
  for (int rep = 0; rep < 300; ++rep) {
    const auto inst = random_instance(gen, 1 + rep % 4, 1 + (rep / 4) % 3);
    std::vector<double> out(inst.m());
    solve_cooperative(inst.problem(), out, lp);
    const auto oracle = cooperative_oracle(inst);
    CHECK(total(out) == doctest::Approx(total(oracle)).epsilon(1e-9));
    for (std::size_t x = 0; x < inst.m(); ++x) CHECK(out[x] == doctest::Approx(oracle[x]).epsilon(1e-7).scale(1.0));
    CHECK(infeasibility(inst, out) <= 1e-9);
  }
}

TEST_CASE("cooperative dominates the other rules") {
  std::mt19937_64 gen(15);
  DenseSimplex lp;
  for (int rep = 0; rep < 1000; ++rep) {
    const auto in = random_instance(gen, 1 + rep % 5, 1 + (rep / 5) % 4);
    const std::size_t m = in.m();
    std::vector<double> coop(m), other(m), d(m, 1.0 / static_cast<double>(m));
    std::vector<std::size_t> order(m);
    for (std::size_t i = 0; i < m; ++i) order[i] = m - 1 - i;
    solve_cooperative(in.problem(), coop, lp);
    const double best = total(coop);
    solve_dpf(in.problem(), other);
    CHECK(best >= total(other) - 1e-9);
    solve_cpf(in.problem(), d, other);
    CHECK(best >= total(other) - 1e-9);
    solve_priority(in.problem(), order, other);
    CHECK(best >= total(other) - 1e-9);
  }
}

TEST_CASE("outflows scale with the inputs") {
  std::mt19937_64 gen(16);
  DenseSimplex lp;
  for (int rep = 0; rep < 200; ++rep) {
    const auto in = random_instance(gen, 1 + rep % 4, 1 + (rep / 4) % 3);
    const double alpha = 0.1 + 10.0 * static_cast<double>(rep % 7) / 7.0;
    Instance sc = in;
    for (auto& v : sc.s) v *= alpha;
    for (auto& v : sc.r) v *= alpha;
    const std::size_t m = in.m();
    std::vector<double> a(m), b(m), d(m, 1.0 / static_cast<double>(m));
    std::vector<std::size_t> order(m);
    for (std::size_t i = 0; i < m; ++i) order[i] = i;
    auto check = [&] {
      for (std::size_t x = 0; x < m; ++x) CHECK(b[x] == doctest::Approx(alpha * a[x]).epsilon(1e-9).scale(1.0));
    };
    solve_dpf(in.problem(), a);
    solve_dpf(sc.problem(), b);
    check();
    solve_cpf(in.problem(), d, a);
    solve_cpf(sc.problem(), d, b);
    check();
    solve_priority(in.problem(), order, a);
    solve_priority(sc.problem(), order, b);
    check();
    solve_cooperative(in.problem(), a, lp);
    solve_cooperative(sc.problem(), b, lp);
    check();
  }
}

TEST_CASE("invalid rules and problems are rejected") {
  const auto net = sctm::testing::ring(4);
  std::vector<std::vector<double>> weights(net->link_count(), std::vector<double>{0.7, 0.7});
  CHECK_THROWS(validate_rule(CpfRule{weights}, *net));
  std::vector<std::vector<std::size_t>> orders(net->link_count(), std::vector<std::size_t>{0, 0});
  CHECK_THROWS(validate_rule(PriorityRule{orders}, *net));
  CHECK_NOTHROW(validate_rule(CpfRule{}, *net));
  Instance bad{{-1}, {1}, {1}};
  CHECK_THROWS(bad.problem().validate());
}

// ---- the step ----------------------------------------------------------------

TEST_CASE("closed ring conserves mass under every rule") {
  const auto net = sctm::testing::ring(6, 0.5);
  const auto turning = TurningFractions::uniform(*net);
  for (InteractionRule rule : {InteractionRule{DpfRule{}}, InteractionRule{CpfRule{}}, InteractionRule{PriorityRule{}},
                               InteractionRule{CooperativeRule{}}}) {
    FlowEngine engine(net, turning, rule);
    auto ws = engine.make_workspace();
    DensityState state;
    state.rho.resize(net->route_count());
    std::mt19937_64 gen(21);
    std::uniform_real_distribution<double> U(0.0, 14.0);
    for (auto& v : state.rho) v = U(gen);
    const double m0 = total_mass(state, *net);
    FlowRecord flows;
    for (int t = 0; t < 300; ++t) engine.step(state, flows, nullptr, ws);
    CHECK(total_mass(state, *net) == doctest::Approx(m0).epsilon(1e-12));
    for (double v : state.rho) CHECK(v >= 0.0);
    CHECK(state.t == 300);
  }
}

TEST_CASE("empty network stays empty") {
  const auto net = sctm::testing::ring(5);
  FlowEngine engine(net, TurningFractions::uniform(*net), DpfRule{});
  auto ws = engine.make_workspace();
  DensityState state;
  state.rho.assign(net->route_count(), 0.0);
  FlowRecord flows;
  for (int t = 0; t < 10; ++t) {
    engine.step(state, flows, nullptr, ws);
    for (std::size_t r = 0; r < net->route_count(); ++r) {
      CHECK(state.rho[r] == 0.0);
      CHECK(flows.q_out[r] == 0.0);
      CHECK(flows.q_in[r] == 0.0);
    }
  }
}

TEST_CASE("one urban step equals the composition of its phases") {
  for (const char* variant : {"", "cooperative"}) {
    const Scenario sc(load_config(sctm::testing::scenario_path("urban.json"), variant));
    const auto& net = sc.network();
    const auto k = sc.default_design();
    const std::uint64_t seed = 4242;

    // Engine.
    RngStream rng_a(seed, 0);
    const auto realized_a = sc.realize(k, rng_a);
    SourceSinkModel env_a(sc.environment(realized_a), rng_a);
    auto state = sc.initial_state();
    TrajectoryRecorder rec;
    StepObserver* obs[] = {&rec};
    run_simulation(sc.engine(), state, 3, sc.signal_board(realized_a), &env_a, obs);

    // Independent recomputation from the sub-operations.
    RngStream rng_b(seed, 0);
    const auto realized_b = sc.realize(k, rng_b);
    SourceSinkModel env_b(sc.environment(realized_b), rng_b);
    const auto board = sc.signal_board(realized_b);
    const auto turning = build_turning(sc.config(), net);
    auto rho = sc.initial_state().rho;
    const std::size_t nr = net.route_count();
    for (long t = 0; t < 3; ++t) {
      std::vector<double> S(nr), R(nr);
      for (std::size_t v = 0; v < net.node_count(); ++v) {
        const auto& node = net.node(node_id(v));
        const std::size_t a = node.arms.size();
        std::vector<double> local(a * a, 0.0);
        for (std::size_t i = 0; i < a * a; ++i)
          if (node.local[i] != kNoRoute) local[i] = rho[node.local[i]];
        std::optional<SignalState> sig;
        for (const auto& plan : board)
          if (to_index(plan.node) == v) sig = advance_signal(plan.schedule, a, t);
        std::optional<LightAdjust> la;
        if (sig) la.emplace(a, sig->la);
        for (std::size_t i = 0; i < a; ++i)
          for (std::size_t j = 0; j < a; ++j) {
            const RouteId r = node.local[i * a + j];
            if (r == kNoRoute) continue;
            S[r] = sending(node.cell, i, j, LocalDensities(a, local), la ? &*la : nullptr);
            R[r] = receiving(node.cell, i, j, LocalDensities(a, local));
          }
      }
      std::vector<double> q_out(nr, 0.0);
      for (std::size_t l = 0; l < net.link_count(); ++l) {
        const auto& link = net.link(l);
        if (link.upstream.empty()) continue;
        std::vector<double> s, r, q(link.upstream.size());
        for (auto id : link.upstream) s.push_back(S[id]);
        for (auto id : link.downstream) r.push_back(R[id]);
        const auto m = turning.matrix(l);
        const LocalProblem p{s, r, m};
        if (*variant == 0) solve_dpf(p, q);
        else solve_cooperative(p, q);
        for (std::size_t x = 0; x < q.size(); ++x) q_out[link.upstream[x]] = q[x];
      }
      const auto q_in = aggregate_inflows(q_out, turning, net);
      std::vector<double> q_net(nr), q_aux(nr);
      env_b.net_flows(NetFlowContext{net, t, rho, q_in, q_out}, q_net, q_aux);
      const auto len = net.route_lengths();
      for (std::size_t r = 0; r < nr; ++r) {
        CHECK(rec.flows[static_cast<std::size_t>(t)].q_out[r] == doctest::Approx(q_out[r]).epsilon(1e-12).scale(1.0));
        CHECK(rec.flows[static_cast<std::size_t>(t)].q_net[r] == doctest::Approx(q_net[r]).epsilon(1e-12).scale(1.0));
        rho[r] = update_density(rho[r], len[r], q_in[r], q_out[r], q_net[r]);
        CHECK(rec.rho[static_cast<std::size_t>(t)][r] == doctest::Approx(rho[r]).epsilon(1e-12).scale(1.0));
      }
    }
  }
}
