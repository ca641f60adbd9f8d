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

#include "sctm/lp.hpp"

#include <algorithm>
#include <stdexcept>

namespace sctm {

void DenseSimplex::reset(std::size_t vars, std::size_t rows) {
  vars_ = vars;
  rows_ = 0;
  max_rows_ = rows;
  width_ = vars + rows + 1;
  tab_.assign(rows * width_, 0.0);
  basis_.assign(rows, 0);
  frozen_.assign(vars + rows, 0);
  reduced_.assign(vars + rows, 0.0);
}

void DenseSimplex::begin_row(double rhs) {
  if (rows_ >= max_rows_) throw std::logic_error("too many LP rows");
  if (!(rhs >= 0.0)) throw std::invalid_argument("LP right-hand side must be non-negative");
  const std::size_t r = rows_++;
  at(r, vars_ + r) = 1.0;
  at(r, width_ - 1) = rhs;
  basis_[r] = vars_ + r;
}

void DenseSimplex::set(std::size_t var, double coefficient) {
  if (rows_ == 0 || var >= vars_) throw std::out_of_range("LP coefficient index");
  at(rows_ - 1, var) = coefficient;
}

void DenseSimplex::add_row(std::span<const double> coefficients, double rhs) {
  if (coefficients.size() != vars_) throw std::invalid_argument("LP row width");
  begin_row(rhs);
  for (std::size_t j = 0; j < vars_; ++j) at(rows_ - 1, j) = coefficients[j];
}

void DenseSimplex::pivot(std::size_t row, std::size_t col) {
  const std::size_t cols = width_;
  double* pr = &tab_[row * cols];
  const double inv = 1.0 / pr[col];
  for (std::size_t c = 0; c < cols; ++c) pr[c] *= inv;
  pr[col] = 1.0;
  for (std::size_t r = 0; r < rows_; ++r) {
    if (r == row) continue;
    double* rr = &tab_[r * cols];
    const double factor = rr[col];
    if (factor == 0.0) continue;
    for (std::size_t c = 0; c < cols; ++c) rr[c] -= factor * pr[c];
    rr[col] = 0.0;
  }
  const double dfac = reduced_[col];
  if (dfac != 0.0) {
    for (std::size_t c = 0; c + 1 < cols; ++c) reduced_[c] -= dfac * pr[c];
    reduced_[col] = 0.0;
  }
  basis_[row] = col;
}

LpStatus DenseSimplex::maximize(std::span<const double> objective, double& value) {
  if (rows_ != max_rows_) throw std::logic_error("LP rows not fully specified");
  if (objective.size() != vars_) throw std::invalid_argument("LP objective width");
  const std::size_t ncols = vars_ + rows_;
  auto cost = [&](std::size_t j) { return j < vars_ ? objective[j] : 0.0; };

  // Reduced costs d_j = c_B . B^-1 A_j - c_j of the current basis.
  for (std::size_t j = 0; j < ncols; ++j) {
    double d = -cost(j);
    for (std::size_t r = 0; r < rows_; ++r) d += cost(basis_[r]) * at(r, j);
    reduced_[j] = d;
  }

  std::vector<char>& is_basic = is_basic_;
  is_basic.assign(ncols, 0);
  for (std::size_t r = 0; r < rows_; ++r) is_basic[basis_[r]] = 1;

  for (std::size_t iter = 0;; ++iter) {
    std::size_t enter = ncols;
    for (std::size_t j = 0; j < ncols; ++j) {
      if (!is_basic[j] && !frozen_[j] && reduced_[j] < -tolerance) {
        enter = j;
        break;
      }
    }
    if (enter == ncols) break;
    if (iter >= iteration_limit) return LpStatus::kIterationLimit;

    std::size_t leave = rows_;
    double best = 0.0;
    for (std::size_t r = 0; r < rows_; ++r) {
      const double a = at(r, enter);
      if (a <= tolerance) continue;
      const double ratio = at(r, width_ - 1) / a;
      if (leave == rows_ || ratio < best || (ratio == best && basis_[r] < basis_[leave])) {
        leave = r;
        best = ratio;
      }
    }
    if (leave == rows_) return LpStatus::kUnbounded;
    is_basic[basis_[leave]] = 0;
    pivot(leave, enter);
    is_basic[enter] = 1;
  }

  value = 0.0;
  for (std::size_t r = 0; r < rows_; ++r) value += cost(basis_[r]) * at(r, width_ - 1);
  // Stay on the optimal face for any later objective.
  for (std::size_t j = 0; j < ncols; ++j) {
    if (!is_basic[j] && reduced_[j] > tolerance) frozen_[j] = 1;
  }
  return LpStatus::kOptimal;
}

void DenseSimplex::solution(std::span<double> x) const {
  if (x.size() != vars_) throw std::invalid_argument("LP solution width");
  std::fill(x.begin(), x.end(), 0.0);
  for (std::size_t r = 0; r < rows_; ++r) {
    if (basis_[r] < vars_) x[basis_[r]] = std::max(0.0, at(r, width_ - 1));
  }
}

}  // namespace sctm
