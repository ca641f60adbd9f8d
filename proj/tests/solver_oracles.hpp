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

// Brute-force references for the local flow problems.

#ifndef SCTM_TESTS_SOLVER_ORACLES_HPP
#define SCTM_TESTS_SOLVER_ORACLES_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <random>
#include <vector>

#include "sctm/solvers.hpp"

namespace sctm::testing {

struct Instance {
  std::vector<double> s, r, f;
  [[nodiscard]] LocalProblem problem() const { return {s, r, f}; }
  [[nodiscard]] std::size_t m() const { return s.size(); }
  [[nodiscard]] std::size_t k() const { return r.size(); }
};

inline Instance random_instance(std::mt19937_64& gen, std::size_t m, std::size_t k) {
  std::uniform_real_distribution<double> U(0.0, 1.0);
  Instance in;
  for (std::size_t x = 0; x < m; ++x) in.s.push_back(5 * U(gen));
  for (std::size_t w = 0; w < k; ++w) in.r.push_back(6 * U(gen));
  for (std::size_t x = 0; x < m; ++x) {
    std::vector<double> row(k);
    double sum = 0.0;
    for (auto& v : row) sum += v = U(gen) + 0.05;
    for (auto v : row) in.f.push_back(v / sum);
  }
  return in;
}

// Largest violation of 0 <= q <= S and sum_x f q <= R.
inline double infeasibility(const Instance& in, const std::vector<double>& q) {
  double worst = 0.0;
  for (std::size_t x = 0; x < in.m(); ++x) worst = std::max({worst, -q[x], q[x] - in.s[x]});
  for (std::size_t w = 0; w < in.k(); ++w) {
    double load = 0.0;
    for (std::size_t x = 0; x < in.m(); ++x) load += in.f[x * in.k() + w] * q[x];
    worst = std::max(worst, load - in.r[w]);
  }
  return worst;
}

inline double total(const std::vector<double>& q) {
  double s = 0.0;
  for (double v : q) s += v;
  return s;
}

// Largest lambda in [0, 1] with lambda*S feasible, by bisection on feasibility.
inline double dpf_oracle(const Instance& in) {
  auto ok = [&](double lam) {
    std::vector<double> q(in.s);
    for (auto& v : q) v *= lam;
    return infeasibility(in, q) <= 0.0;
  };
  if (ok(1.0)) return 1.0;
  double lo = 0.0, hi = 1.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (ok(mid) ? lo : hi) = mid;
  }
  return lo;
}

// Smallest lambda at which a receiving constraint binds, by bisection.
inline std::vector<double> cpf_oracle(const Instance& in, const std::vector<double>& d) {
  auto q_of = [&](double lam) {
    std::vector<double> q(in.m());
    for (std::size_t x = 0; x < in.m(); ++x) q[x] = std::min(lam * d[x], 1.0) * in.s[x];
    return q;
  };
  double hi = 1.0;
  for (double dx : d)
    if (dx > 0) hi = std::max(hi, 1.0 / dx);
  if (infeasibility(in, q_of(hi)) <= 0.0) return q_of(hi);  // never binds
  double lo = 0.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (infeasibility(in, q_of(mid)) <= 0.0 ? lo : hi) = mid;
  }
  return q_of(lo);
}

inline std::vector<double> priority_oracle(const Instance& in, const std::vector<std::size_t>& order) {
  std::vector<double> q(in.m(), 0.0), left(in.r);
  for (std::size_t x : order) {
    double take = in.s[x];
    for (std::size_t w = 0; w < in.k(); ++w) {
      const double f = in.f[x * in.k() + w];
      if (f > 0) take = std::min(take, std::max(left[w], 0.0) / f);
    }
    q[x] = take;
    for (std::size_t w = 0; w < in.k(); ++w) left[w] -= in.f[x * in.k() + w] * take;
  }
  return q;
}

// Enumerates every vertex of the feasible polytope; returns the lexicographic
// maximum among the vertices of maximal total.
inline std::vector<double> cooperative_oracle(const Instance& in) {
  const std::size_t m = in.m(), k = in.k(), nc = 2 * m + k;
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(nc), static_cast<Eigen::Index>(m));
  Eigen::VectorXd b(static_cast<Eigen::Index>(nc));
  for (std::size_t x = 0; x < m; ++x) {
    A(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(x)) = -1;
    b(static_cast<Eigen::Index>(x)) = 0;
    A(static_cast<Eigen::Index>(m + x), static_cast<Eigen::Index>(x)) = 1;
    b(static_cast<Eigen::Index>(m + x)) = in.s[x];
  }
  for (std::size_t w = 0; w < k; ++w) {
    for (std::size_t x = 0; x < m; ++x) A(static_cast<Eigen::Index>(2 * m + w), static_cast<Eigen::Index>(x)) = in.f[x * k + w];
    b(static_cast<Eigen::Index>(2 * m + w)) = in.r[w];
  }
  std::vector<std::vector<double>> vertices;
  std::vector<std::size_t> pick(m);
  std::vector<bool> mask(nc, false);
  std::fill(mask.begin(), mask.begin() + static_cast<std::ptrdiff_t>(m), true);
  do {
    Eigen::MatrixXd As(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
    Eigen::VectorXd bs(static_cast<Eigen::Index>(m));
    Eigen::Index row = 0;
    for (std::size_t c = 0; c < nc; ++c)
      if (mask[c]) {
        As.row(row) = A.row(static_cast<Eigen::Index>(c));
        bs(row++) = b(static_cast<Eigen::Index>(c));
      }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(As);
    if (lu.rank() < static_cast<Eigen::Index>(m)) continue;
    const Eigen::VectorXd q = lu.solve(bs);
    if (((A * q - b).array() <= 1e-10).all()) vertices.emplace_back(q.data(), q.data() + m);
  } while (std::prev_permutation(mask.begin(), mask.end()));
  double best = -1.0;
  for (const auto& v : vertices) best = std::max(best, total(v));
  std::vector<double> lex;
  for (const auto& v : vertices) {
    if (total(v) < best - 1e-10) continue;
    bool better = lex.empty();
    for (std::size_t x = 0; !better && x < m; ++x) {
      if (v[x] > lex[x] + 1e-10) better = true;
      else if (v[x] < lex[x] - 1e-10) break;
    }
    if (better) lex = v;
  }
  return lex;
}

}  // namespace sctm::testing

#endif  // SCTM_TESTS_SOLVER_ORACLES_HPP
