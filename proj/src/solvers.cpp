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

#include "sctm/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "sctm/errors.hpp"
#include "sctm/network.hpp"

namespace sctm {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_out(const LocalProblem& p, std::span<double> outflows) {
  if (outflows.size() != p.upstream()) throw std::invalid_argument("outflow span must match upstream size");
}

// Sum_x f_{x->w} S_x.
double demand_on(const LocalProblem& p, std::size_t w) {
  double s = 0.0;
  for (std::size_t x = 0; x < p.upstream(); ++x) s += p.f(x, w) * p.sending[x];
  return s;
}

bool unconstrained(const LocalProblem& p) {
  for (std::size_t w = 0; w < p.downstream(); ++w) {
    if (p.receiving[w] < demand_on(p, w)) return false;
  }
  return true;
}

// Smallest lambda with g(lambda) = R for the piecewise-linear, non-decreasing
// g(lambda) = sum_x f_x min(lambda d_x, 1) S_x. +inf if R exceeds sup g.
double cpf_root(const LocalProblem& p, std::size_t w, std::span<const double> d, std::vector<std::size_t>& order) {
  const double target = p.receiving[w];
  if (target <= 0.0) return 0.0;
  order.clear();
  double slope = 0.0, sup = 0.0;
  for (std::size_t x = 0; x < p.upstream(); ++x) {
    const double mass = p.f(x, w) * p.sending[x];
    if (d[x] > 0.0 && mass > 0.0) {
      order.push_back(x);
      slope += mass * d[x];
      sup += mass;
    }
  }
  if (target >= sup) return kInf;
  // Breakpoints 1/d_x in ascending order (largest weight saturates first).
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return d[a] > d[b]; });
  double lam = 0.0, g = 0.0;
  for (std::size_t x : order) {
    const double next = 1.0 / d[x];
    const double g_next = g + slope * (next - lam);
    if (g_next >= target) return lam + (target - g) / slope;
    g = g_next;
    lam = next;
    slope -= p.f(x, w) * p.sending[x] * d[x];
    if (slope < 0.0) slope = 0.0;
  }
  return lam;
}

}  // namespace

void LocalProblem::validate() const {
  if (fractions.size() != sending.size() * receiving.size()) {
    throw std::invalid_argument("fractions must be upstream x downstream");
  }
  for (double s : sending) {
    if (!(s >= 0.0) || !std::isfinite(s)) throw std::invalid_argument("sending values must be finite and >= 0");
  }
  for (double r : receiving) {
    if (!(r >= 0.0) || !std::isfinite(r)) throw std::invalid_argument("receiving values must be finite and >= 0");
  }
}

double solve_dpf(const LocalProblem& p, std::span<double> outflows) {
  check_out(p, outflows);
  double lambda = 1.0;
  for (std::size_t w = 0; w < p.downstream(); ++w) {
    const double demand = demand_on(p, w);
    if (demand > 0.0) lambda = std::min(lambda, p.receiving[w] / demand);
  }
  for (std::size_t x = 0; x < p.upstream(); ++x) outflows[x] = lambda * p.sending[x];
  return lambda;
}

double solve_cpf(const LocalProblem& p, std::span<const double> weights, std::span<double> outflows) {
  check_out(p, outflows);
  if (weights.size() != p.upstream()) throw std::invalid_argument("one capacity weight per upstream route");
  if (unconstrained(p)) {
    std::copy(p.sending.begin(), p.sending.end(), outflows.begin());
    return kInf;
  }
  thread_local std::vector<std::size_t> order;
  double lambda = kInf;
  for (std::size_t w = 0; w < p.downstream(); ++w) lambda = std::min(lambda, cpf_root(p, w, weights, order));
  for (std::size_t x = 0; x < p.upstream(); ++x) {
    if (weights[x] <= 0.0) {
      outflows[x] = 0.0;
    } else if (lambda == kInf) {
      outflows[x] = p.sending[x];
    } else {
      outflows[x] = std::min(lambda * weights[x], 1.0) * p.sending[x];
    }
  }
  return lambda;
}

void solve_priority(const LocalProblem& p, std::span<const std::size_t> order, std::span<double> outflows) {
  check_out(p, outflows);
  if (order.size() != p.upstream()) throw std::invalid_argument("priority order must list every upstream route");
  thread_local std::vector<double> residual;
  residual.assign(p.receiving.begin(), p.receiving.end());
  std::fill(outflows.begin(), outflows.end(), 0.0);
  for (std::size_t x : order) {
    if (x >= p.upstream()) throw std::invalid_argument("priority order index out of range");
    double q = p.sending[x];
    for (std::size_t w = 0; w < p.downstream(); ++w) {
      const double f = p.f(x, w);
      if (f > 0.0) q = std::min(q, residual[w] / f);
    }
    q = std::max(q, 0.0);
    outflows[x] = q;
    for (std::size_t w = 0; w < p.downstream(); ++w) {
      residual[w] = std::max(residual[w] - p.f(x, w) * q, 0.0);
    }
  }
}

void solve_cooperative(const LocalProblem& p, std::span<double> outflows, DenseSimplex& lp) {
  check_out(p, outflows);
  const std::size_t m = p.upstream();
  if (unconstrained(p)) {
    std::copy(p.sending.begin(), p.sending.end(), outflows.begin());
    return;
  }
  if (m == 1) {
    double q = p.sending[0];
    for (std::size_t w = 0; w < p.downstream(); ++w) {
      const double f = p.f(0, w);
      if (f > 0.0) q = std::min(q, p.receiving[w] / f);
    }
    outflows[0] = std::max(q, 0.0);
    return;
  }

  // Only receiving constraints that can bind need a row.
  thread_local std::vector<std::size_t> binding;
  binding.clear();
  for (std::size_t w = 0; w < p.downstream(); ++w) {
    if (p.receiving[w] < demand_on(p, w)) binding.push_back(w);
  }
  lp.reset(m, binding.size() + m);
  for (std::size_t w : binding) {
    lp.begin_row(p.receiving[w]);
    for (std::size_t x = 0; x < m; ++x) lp.set(x, p.f(x, w));
  }
  for (std::size_t x = 0; x < m; ++x) {
    lp.begin_row(p.sending[x]);
    lp.set(x, 1.0);
  }

  thread_local std::vector<double> objective;
  objective.assign(m, 1.0);
  double value = 0.0;
  auto run = [&] {
    if (lp.maximize(objective, value) != LpStatus::kOptimal) {
      throw NumericalError("cooperative LP did not converge");
    }
  };
  run();
  for (std::size_t x = 0; x + 1 < m; ++x) {
    std::fill(objective.begin(), objective.end(), 0.0);
    objective[x] = 1.0;
    run();
  }
  lp.solution(outflows);
  for (std::size_t x = 0; x < m; ++x) outflows[x] = std::min(outflows[x], p.sending[x]);
}

void solve_cooperative(const LocalProblem& p, std::span<double> outflows) {
  DenseSimplex lp;
  solve_cooperative(p, outflows, lp);
}

std::string_view rule_name(const InteractionRule& rule) {
  switch (rule.index()) {
    case 0:
      return "dpf";
    case 1:
      return "cpf";
    case 2:
      return "priority";
    default:
      return "cooperative";
  }
}

void validate_rule(const InteractionRule& rule, const TrafficNetwork& net) {
  if (const auto* cpf = std::get_if<CpfRule>(&rule)) {
    if (cpf->weights.empty()) return;
    if (cpf->weights.size() != net.link_count()) throw ConfigError("cpf weights need one group per link");
    for (std::size_t l = 0; l < net.link_count(); ++l) {
      const auto& w = cpf->weights[l];
      if (w.empty()) continue;
      if (w.size() != net.link(l).upstream.size()) throw ConfigError("cpf weight group size mismatch");
      double sum = 0.0;
      for (double x : w) {
        if (!(x >= 0.0)) throw ConfigError("cpf weights must be >= 0");
        sum += x;
      }
      if (std::abs(sum - 1.0) > 1e-12) throw ConfigError("cpf weights must sum to 1 per link");
    }
  } else if (const auto* pr = std::get_if<PriorityRule>(&rule)) {
    if (pr->orders.empty()) return;
    if (pr->orders.size() != net.link_count()) throw ConfigError("priority orders need one entry per link");
    for (std::size_t l = 0; l < net.link_count(); ++l) {
      auto o = pr->orders[l];
      if (o.empty()) continue;
      std::sort(o.begin(), o.end());
      for (std::size_t i = 0; i < o.size(); ++i) {
        if (o[i] != i || o.size() != net.link(l).upstream.size()) {
          throw ConfigError("priority order must be a permutation of the upstream routes");
        }
      }
    }
  }
}

}  // namespace sctm
