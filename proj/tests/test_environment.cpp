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

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "sctm/environment.hpp"
#include "sctm/network.hpp"
#include "sctm/rng.hpp"
#include "copula_oracle.hpp"
#include "test_util.hpp"

using namespace sctm;
using namespace sctm::testing;

namespace {

// Kolmogorov-Smirnov distance to U(0, 1).
double ks_uniform(std::vector<double> u) {
  std::sort(u.begin(), u.end());
  const double n = static_cast<double>(u.size());
  double d = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    d = std::max(d, static_cast<double>(i + 1) / n - u[i]);
    d = std::max(d, u[i] - static_cast<double>(i) / n);
  }
  return d;
}

std::vector<std::pair<double, double>> draw(double r, std::size_t n, std::uint64_t seed) {
  RngStream rng(seed, 0);
  std::vector<std::pair<double, double>> xy(n);
  for (auto& p : xy) p = frank_sample(FrankCopula{r}, rng);
  return xy;
}

}  // namespace

TEST_CASE("Kendall tau helpers") {
  CHECK(frank_tau(5.0) == doctest::Approx(0.457).epsilon(2e-3));
  CHECK(kendall_tau({{1, 1}, {2, 2}, {3, 3}}) == 1.0);
  CHECK(kendall_tau({{1, 3}, {2, 2}, {3, 1}}) == -1.0);
}

TEST_CASE("Frank copula dependence") {
  const std::size_t n = 100000;
  CHECK(std::abs(kendall_tau(draw(0.0, n, 1))) < 0.02);
  CHECK(std::abs(kendall_tau(draw(1e-9, n, 2))) < 0.02);
  CHECK(kendall_tau(draw(5.0, n, 3)) == doctest::Approx(frank_tau(5.0)).epsilon(0.02 / 0.457));
  CHECK(kendall_tau(draw(-5.0, n, 4)) == doctest::Approx(-frank_tau(5.0)).epsilon(0.02 / 0.457));
  CHECK(kendall_tau(draw(50.0, n, 5)) > 0.85);
}

TEST_CASE("Frank copula marginals are uniform") {
  const std::size_t n = 20000;
  const double critical = 1.628 / std::sqrt(static_cast<double>(n));  // 1% level
  for (double r : {-8.0, 0.0, 3.0, 20.0}) {
    const auto xy = draw(r, n, 77);
    std::vector<double> u1(n), u2(n);
    for (std::size_t i = 0; i < n; ++i) {
      u1[i] = xy[i].first;
      u2[i] = xy[i].second;
      CHECK(u2[i] > 0.0);
      CHECK(u2[i] < 1.0);
    }
    CHECK(ks_uniform(u1) < critical);
    CHECK(ks_uniform(u2) < critical);
  }
}

TEST_CASE("conditional inverse inverts the conditional distribution") {
  // dC/du1 for the Frank copula, evaluated at the returned u2, gives back v.
  for (double r : {-4.0, 0.5, 7.0}) {
    for (double u1 : {0.1, 0.5, 0.93}) {
      for (double v : {0.05, 0.5, 0.99}) {
        const double u2 = frank_conditional_inverse(r, u1, v);
        const double a = std::exp(-r * u1), b = std::exp(-r * u2), e = std::exp(-r);
        const double cond = a * (b - 1.0) / ((e - 1.0) + (a - 1.0) * (b - 1.0));
        CHECK(cond == doctest::Approx(v).epsilon(1e-10));
      }
    }
  }
}

TEST_CASE("random-walk source") {
  ArSourceSink src;
  CHECK(ar_step(src, 0.3) == 0.3);
  ArSourceSink still;
  for (int t = 0; t < 50; ++t) CHECK(ar_step(still, 0.0 * 1.7) == 0.0);

  const double sigma = 0.5;
  const int steps = 100, reps = 4000;
  std::vector<double> finals;
  for (int rep = 0; rep < reps; ++rep) {
    RngStream rng(99, static_cast<std::uint64_t>(rep));
    ArSourceSink w;
    w.sigma = sigma;
    for (int t = 0; t < steps; ++t) ar_step(w, sigma * rng.normal());
    finals.push_back(w.value);
  }
  const double mean = std::accumulate(finals.begin(), finals.end(), 0.0) / reps;
  double var = 0.0;
  for (double x : finals) var += (x - mean) * (x - mean);
  var /= reps - 1;
  CHECK(var == doctest::Approx(sigma * sigma * steps).epsilon(0.1));
}

TEST_CASE("net-flow clamp keeps densities admissible") {
  const double l = 0.8, cap = 30;
  // Lower clamp: the cell empties.
  double q = clamp_net_flow(-100, 2.0, 1.0, 0.5, cap, l);
  CHECK(update_density(2.0, l, 1.0, 0.5, q) == doctest::Approx(0.0).scale(1.0).epsilon(1e-14));
  // Upper clamp: the cell fills to the cap.
  q = clamp_net_flow(100, 2.0, 1.0, 0.5, cap, l);
  CHECK(update_density(2.0, l, 1.0, 0.5, q) == doctest::Approx(cap).epsilon(1e-14));
  // Interior: untouched.
  CHECK(clamp_net_flow(0.7, 2.0, 1.0, 0.5, cap, l) == 0.7);

  std::mt19937_64 gen(8);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int rep = 0; rep < 10000; ++rep) {
    const double rho = 30 * U(gen), qi = 5 * U(gen), qo = std::min(5 * U(gen), rho), len = 0.2 + U(gen);
    const double aux = 40 * (U(gen) - 0.5);
    const double net = clamp_net_flow(aux, rho, qi, qo, cap, len);
    const double next = update_density(rho, len, qi, qo, net);
    CHECK(next >= -1e-12);
    CHECK(next <= cap + 1e-12);
    // From a state that is admissible without exogenous flow, the clamp only shrinks |q_aux|.
    const double free_next = update_density(rho, len, qi, qo, 0.0);
    if (free_next >= 0.0 && free_next <= cap) CHECK(std::abs(net) <= std::abs(aux));
  }
}

TEST_CASE("source/sink process is reproducible and clamped") {
  const auto net = sctm::testing::ring(4);
  EnvironmentSpec spec;
  SourceSpec a;
  a.kind = SourceSpec::Kind::kRandomWalk;
  a.route = 0;
  a.sigma = 1.0;
  a.copula_slot = 0;
  a.rho_cap = 30;
  SourceSpec b = a;
  b.route = 3;
  b.copula_slot = 1;
  SourceSpec g;
  g.kind = SourceSpec::Kind::kGaussian;
  g.route = 5;
  g.mean = 2.0;
  g.cv = 0.1;
  g.rho_cap = 15;
  SourceSpec c;
  c.kind = SourceSpec::Kind::kCopy;
  c.route = 6;
  c.of = 2;
  c.scale = -1.0;
  c.rho_cap = 15;
  spec.sources = {a, b, g, c};
  spec.copula = FrankCopula{5.0};
  CHECK_NOTHROW(spec.validate(*net));

  const std::size_t nr = net->route_count();
  std::vector<double> rho(nr, 1.0), zero(nr, 0.0);
  auto run = [&](std::uint64_t seed) {
    RngStream rng(seed, 3);
    SourceSinkModel model(spec, rng);
    std::vector<double> trace, qn(nr), qa(nr);
    for (long t = 0; t < 200; ++t) {
      model.net_flows(NetFlowContext{*net, t, rho, zero, zero}, qn, qa);
      trace.insert(trace.end(), qn.begin(), qn.end());
      for (std::size_t r = 0; r < nr; ++r) {
        const double next = update_density(rho[r], net->route_lengths()[r], 0, 0, qn[r]);
        CHECK(next >= -1e-12);
      }
      CHECK(qa[6] == doctest::Approx(-qa[5]));
      CHECK(qn[1] == 0.0);
    }
    return trace;
  };
  CHECK(run(5) == run(5));
  CHECK(run(5) != run(6));

  SourceSpec dup = a;
  spec.sources.push_back(dup);
  CHECK_THROWS(spec.validate(*net));
}
