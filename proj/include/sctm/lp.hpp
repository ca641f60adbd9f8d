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

#ifndef SCTM_LP_HPP
#define SCTM_LP_HPP

#include <cstddef>
#include <span>
#include <vector>

namespace sctm {

enum class LpStatus { kOptimal, kUnbounded, kIterationLimit };

/// Dense tableau simplex for   max c.x  s.t.  A x <= b,  x >= 0,  b >= 0.
///
/// Because b >= 0 the origin is feasible and no phase one is needed. Several
/// objectives can be optimized in sequence: after each one, every non-basic
/// column with a strictly positive reduced cost is frozen at zero, which
/// confines later objectives to the optimal face (lexicographic optimization).
/// Bland's rule prevents cycling on the degenerate problems that arise when
/// capacities are exactly zero. The workspace is reused between solves.
class DenseSimplex {
 public:
  /// Starts a problem with `vars` variables and exactly `rows` constraints,
  /// which are then supplied with add_row(). The tableau starts zeroed.
  void reset(std::size_t vars, std::size_t rows);
  /// Appends a constraint; rhs must be >= 0. `coefficients` has `vars` entries.
  void add_row(std::span<const double> coefficients, double rhs);
  /// Starts a constraint with all-zero coefficients; fill it with set().
  void begin_row(double rhs);
  /// Sets one coefficient of the row most recently started.
  void set(std::size_t var, double coefficient);

  /// Optimizes the objective on the current face. Returns the status; on
  /// success the objective value is returned through `value`.
  LpStatus maximize(std::span<const double> objective, double& value);

  /// Current primal solution (structural variables only).
  void solution(std::span<double> x) const;

  std::size_t iteration_limit = 500;
  double tolerance = 1e-12;

 private:
  double& at(std::size_t r, std::size_t c) { return tab_[r * width_ + c]; }
  [[nodiscard]] double at(std::size_t r, std::size_t c) const { return tab_[r * width_ + c]; }
  void pivot(std::size_t row, std::size_t col);

  std::size_t vars_ = 0;
  std::size_t rows_ = 0;      // rows added so far
  std::size_t max_rows_ = 0;
  std::size_t width_ = 0;     // vars + one slack per row + rhs
  std::vector<double> tab_;
  std::vector<std::size_t> basis_;
  std::vector<char> frozen_;
  std::vector<double> reduced_;
  std::vector<char> is_basic_;
};

}  // namespace sctm

#endif  // SCTM_LP_HPP
