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

#ifndef SCTM_SOLVERS_HPP
#define SCTM_SOLVERS_HPP

#include <cstddef>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "sctm/lp.hpp"

namespace sctm {

class TrafficNetwork;

/// Flow allocation on one link (u, v): upstream routes x = (x, u, v) compete
/// for the receiving capacity of the downstream routes w = (u, v, w).
struct LocalProblem {
  std::span<const double> sending;    // S_x, size m
  std::span<const double> receiving;  // R_w, size k
  std::span<const double> fractions;  // f_{x->w}, row-major m x k

  [[nodiscard]] std::size_t upstream() const noexcept { return sending.size(); }
  [[nodiscard]] std::size_t downstream() const noexcept { return receiving.size(); }
  [[nodiscard]] double f(std::size_t x, std::size_t w) const { return fractions[x * receiving.size() + w]; }
  void validate() const;
};

/// Demand-proportional flows q_x = lambda * S_x with the largest feasible
/// lambda in [0, 1]. Returns lambda.
double solve_dpf(const LocalProblem& p, std::span<double> outflows);

/// Capacity-proportional flows q_x = min(lambda * d_x, 1) * S_x where lambda is
/// the smallest value at which a receiving constraint binds (+inf if none).
/// Returns lambda.
double solve_cpf(const LocalProblem& p, std::span<const double> weights, std::span<double> outflows);

/// Hierarchical claims: upstream routes in `order` each take what is left.
void solve_priority(const LocalProblem& p, std::span<const std::size_t> order, std::span<double> outflows);

/// Maximizes total outflow; ties broken by lexicographically maximizing
/// (q_0, q_1, ...). `lp` is scratch space reused across calls.
void solve_cooperative(const LocalProblem& p, std::span<double> outflows, DenseSimplex& lp);
void solve_cooperative(const LocalProblem& p, std::span<double> outflows);

// ---------------------------------------------------------------------------
// Rule selection for a whole network.

struct DpfRule {};

struct CpfRule {
  // Per link, one weight per upstream route; empty means uniform weights.
  std::vector<std::vector<double>> weights;
};

struct PriorityRule {
  // Per link, a permutation of the upstream positions; empty means canonical order.
  std::vector<std::vector<std::size_t>> orders;
};

struct CooperativeRule {};

using InteractionRule = std::variant<DpfRule, CpfRule, PriorityRule, CooperativeRule>;

std::string_view rule_name(const InteractionRule& rule);

/// Checks weights/orderings against the network's links (empty tables pass).
void validate_rule(const InteractionRule& rule, const TrafficNetwork& net);

}  // namespace sctm

#endif  // SCTM_SOLVERS_HPP
