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

#include "sctm/gpr.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include "sctm/errors.hpp"
#include "sctm/rng.hpp"
#include "sctm/simd.hpp"

namespace sctm {

std::string_view to_string(KernelKind kind) {
  switch (kind) {
    case KernelKind::kSquaredExponential:
      return "se";
    case KernelKind::kMatern12:
      return "matern12";
    case KernelKind::kMatern32:
      return "matern32";
    case KernelKind::kMatern52:
      return "matern52";
  }
  return "unknown";
}

std::optional<KernelKind> parse_kernel_kind(std::string_view name) {
  for (auto k : {KernelKind::kSquaredExponential, KernelKind::kMatern12, KernelKind::kMatern32, KernelKind::kMatern52}) {
    if (to_string(k) == name) return k;
  }
  return std::nullopt;
}

namespace {

int matern_order(KernelKind k) {
  switch (k) {
    case KernelKind::kMatern12:
      return 0;
    case KernelKind::kMatern32:
      return 1;
    default:
      return 2;
  }
}

// sqrt(2 nu) for the half-integer Matérn kernels.
double matern_rate(KernelKind k) {
  switch (k) {
    case KernelKind::kMatern12:
      return 1.0;
    case KernelKind::kMatern32:
      return std::sqrt(3.0);
    default:
      return std::sqrt(5.0);
  }
}

}  // namespace

double Kernel::of_distance(double r) const {
  const double s2 = sigma_c * sigma_c;
  if (kind == KernelKind::kSquaredExponential) return s2 * std::exp(-0.5 * (r / length) * (r / length));
  const double s = matern_rate(kind) * r / length;
  switch (kind) {
    case KernelKind::kMatern12:
      return s2 * std::exp(-s);
    case KernelKind::kMatern32:
      return s2 * (1.0 + s) * std::exp(-s);
    default:
      return s2 * (1.0 + s + s * s / 3.0) * std::exp(-s);
  }
}

double Kernel::operator()(std::span<const double> a, std::span<const double> b) const {
  if (a.size() != b.size()) throw std::invalid_argument("kernel arguments differ in dimension");
  if (!input_scale.empty() && input_scale.size() != a.size()) throw std::invalid_argument("kernel input scale has the wrong dimension");
  double d2 = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double e = input_scale.empty() ? a[i] - b[i] : (a[i] - b[i]) / input_scale[i];
    d2 += e * e;
  }
  return of_distance(std::sqrt(d2));
}

void Kernel::rescale(const double* x, std::size_t dim, double* out) const {
  for (std::size_t i = 0; i < dim; ++i) out[i] = input_scale.empty() ? x[i] : x[i] / input_scale[i];
}

void Kernel::row(const double* x, const double* points, std::size_t dim, std::size_t n, double* out) const {
  const auto& kt = simd::active_kernels();
  kt.squared_distances(x, points, dim, out, n);
  const double s2 = sigma_c * sigma_c;
  if (kind == KernelKind::kSquaredExponential) {
    kt.scaled_exp(out, -0.5 / (length * length), s2, n);
  } else {
    kt.matern(out, matern_rate(kind) / length, s2, matern_order(kind), n);
  }
}

void Kernel::validate() const {
  if (!(sigma_c > 0.0) || !std::isfinite(sigma_c)) throw std::invalid_argument("kernel sigma_c must be > 0");
  if (!(length > 0.0) || !std::isfinite(length)) throw std::invalid_argument("kernel length scale must be > 0");
  for (double s : input_scale) {
    if (!(s > 0.0) || !std::isfinite(s)) throw std::invalid_argument("kernel input scales must be > 0");
  }
}

// ---------------------------------------------------------------------------

Standardization Standardization::of(std::span<const double> values) {
  Standardization s;
  if (values.empty()) return s;
  double m = 0.0;
  for (double v : values) m += v;
  m /= static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - m) * (v - m);
  s.mean = m;
  const double sd = values.size() > 1 ? std::sqrt(ss / static_cast<double>(values.size() - 1)) : 0.0;
  if (sd > 0.0 && std::isfinite(sd)) {
    s.scale = sd;
  } else {
    warn("observed values have no spread; using unit scale");
  }
  return s;
}

void GprDataset::add(std::span<const double> k, double mu, double tau2) {
  if (k.size() != dim_) throw std::invalid_argument("observation has the wrong dimension");
  if (!std::isfinite(mu)) throw std::invalid_argument("observation value must be finite");
  if (!(tau2 >= 0.0) || !std::isfinite(tau2)) throw std::invalid_argument("noise variance must be >= 0");
  points_.insert(points_.end(), k.begin(), k.end());
  values_.push_back(mu);
  noises_.push_back(tau2);
}

// ---------------------------------------------------------------------------

GprPosterior::GprPosterior(const GprDataset& data, Kernel kernel, std::optional<Standardization> fixed)
    : kernel_{std::move(kernel)}, n_{data.size()}, dim_{data.dim()}, points_(data.points().size()) {
  kernel_.validate();
  if (n_ == 0) throw std::invalid_argument("GPR needs at least one observation");
  if (!kernel_.input_scale.empty() && kernel_.input_scale.size() != dim_) {
    throw std::invalid_argument("kernel input scale has the wrong dimension");
  }
  for (std::size_t i = 0; i < n_; ++i) kernel_.rescale(data.points().data() + i * dim_, dim_, points_.data() + i * dim_);
  std_ = fixed ? *fixed : Standardization::of(data.values());
  if (!(std_.scale > 0.0) || !std::isfinite(std_.mean)) throw std::invalid_argument("invalid standardization");

  Eigen::VectorXd nu(static_cast<Eigen::Index>(n_));
  for (std::size_t i = 0; i < n_; ++i) nu[static_cast<Eigen::Index>(i)] = std_.forward(data.values()[i]);

  Eigen::MatrixXd gram(n_, n_);
  std::vector<double> row(n_);
  for (std::size_t i = 0; i < n_; ++i) {
    kernel_.row(points_.data() + i * dim_, points_.data(), dim_, n_, row.data());
    for (std::size_t j = 0; j < n_; ++j) gram(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = row[j];
  }
  const double inv_s2 = 1.0 / (std_.scale * std_.scale);
  for (std::size_t i = 0; i < n_; ++i) gram(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) += data.noises()[i] * inv_s2;

  const double s2 = kernel_.sigma_c * kernel_.sigma_c;
  llt_.compute(gram);
  for (double j = 1e-10; llt_.info() != Eigen::Success; j *= 10.0) {
    if (j > 1.5e-6) throw NumericalError("GPR covariance is not positive definite even with jitter 1e-6");
    jitter_ = j;
    Eigen::MatrixXd g = gram;
    g.diagonal().array() += j * s2;
    llt_.compute(g);
  }
  alpha_ = llt_.solve(nu);

  const auto& l = llt_.matrixLLT();
  double logdet = 0.0;
  for (Eigen::Index i = 0; i < l.rows(); ++i) logdet += 2.0 * std::log(l(i, i));
  loglik_ = -0.5 * nu.dot(alpha_) - 0.5 * logdet - 0.5 * static_cast<double>(n_) * std::log(2.0 * std::numbers::pi);
}

Prediction GprPosterior::predict(std::span<const double> k) const {
  if (k.size() != dim_) throw std::invalid_argument("query has the wrong dimension");
  Prediction p;
  predict(k.data(), 1, &p.mean, &p.sd);
  return p;
}

void GprPosterior::predict(const double* queries, std::size_t m, double* mean, double* sd) const {
  const auto n = static_cast<Eigen::Index>(n_);
  Eigen::MatrixXd ks(n, static_cast<Eigen::Index>(m));
  std::vector<double> x(dim_);
  for (std::size_t q = 0; q < m; ++q) {
    kernel_.rescale(queries + q * dim_, dim_, x.data());
    kernel_.row(x.data(), points_.data(), dim_, n_, ks.col(static_cast<Eigen::Index>(q)).data());
  }
  const Eigen::VectorXd mu = ks.transpose() * alpha_;
  llt_.matrixL().solveInPlace(ks);
  const double s2 = kernel_.sigma_c * kernel_.sigma_c;
  for (std::size_t q = 0; q < m; ++q) {
    const auto qi = static_cast<Eigen::Index>(q);
    const double var = std::max(s2 - ks.col(qi).squaredNorm(), 0.0);
    mean[q] = std_.backward(mu[qi]);
    sd[q] = std::sqrt(var) * std_.scale;
  }
}

void GprPosterior::predict_mean(const double* queries, std::size_t m, double* mean) const {
  std::vector<double> x(dim_), row(n_);
  for (std::size_t q = 0; q < m; ++q) {
    kernel_.rescale(queries + q * dim_, dim_, x.data());
    kernel_.row(x.data(), points_.data(), dim_, n_, row.data());
    double acc = 0.0;
    for (std::size_t j = 0; j < n_; ++j) acc += row[j] * alpha_[static_cast<Eigen::Index>(j)];
    mean[q] = std_.backward(acc);
  }
}

double log_marginal_likelihood(const GprDataset& data, const Kernel& kernel) {
  return GprPosterior(data, kernel).log_marginal_likelihood();
}

// ---------------------------------------------------------------------------

std::pair<std::vector<double>, double> nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                                                   std::vector<double> x0, double step, double tol,
                                                   std::size_t max_evals) {
  const std::size_t d = x0.size();
  std::vector<std::vector<double>> simplex(d + 1, x0);
  std::vector<double> fv(d + 1);
  for (std::size_t i = 0; i < d; ++i) simplex[i + 1][i] += step;
  std::size_t evals = 0;
  auto eval = [&](const std::vector<double>& x) {
    ++evals;
    const double v = f(x);
    return std::isnan(v) ? std::numeric_limits<double>::infinity() : v;
  };
  for (std::size_t i = 0; i <= d; ++i) fv[i] = eval(simplex[i]);

  std::vector<std::size_t> order(d + 1);
  std::vector<double> centroid(d), xr(d), xe(d), xc(d);
  while (evals < max_evals) {
    for (std::size_t i = 0; i <= d; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
    const std::size_t best = order.front(), worst = order.back(), second = order[d - 1];

    double diameter = 0.0;
    for (std::size_t i = 0; i <= d; ++i) {
      for (std::size_t j = 0; j < d; ++j) diameter = std::max(diameter, std::abs(simplex[i][j] - simplex[best][j]));
    }
    if (diameter < tol && std::abs(fv[worst] - fv[best]) < tol * (1.0 + std::abs(fv[best]))) break;

    std::fill(centroid.begin(), centroid.end(), 0.0);
    for (std::size_t i = 0; i <= d; ++i) {
      if (i == worst) continue;
      for (std::size_t j = 0; j < d; ++j) centroid[j] += simplex[i][j] / static_cast<double>(d);
    }
    for (std::size_t j = 0; j < d; ++j) xr[j] = centroid[j] + (centroid[j] - simplex[worst][j]);
    const double fr = eval(xr);
    if (fr < fv[best]) {
      for (std::size_t j = 0; j < d; ++j) xe[j] = centroid[j] + 2.0 * (centroid[j] - simplex[worst][j]);
      const double fe = eval(xe);
      if (fe < fr) {
        simplex[worst] = xe;
        fv[worst] = fe;
      } else {
        simplex[worst] = xr;
        fv[worst] = fr;
      }
      continue;
    }
    if (fr < fv[second]) {
      simplex[worst] = xr;
      fv[worst] = fr;
      continue;
    }
    const bool outside = fr < fv[worst];
    for (std::size_t j = 0; j < d; ++j) {
      xc[j] = outside ? centroid[j] + 0.5 * (xr[j] - centroid[j]) : centroid[j] + 0.5 * (simplex[worst][j] - centroid[j]);
    }
    const double fc = eval(xc);
    if (fc < (outside ? fr : fv[worst])) {
      simplex[worst] = xc;
      fv[worst] = fc;
      continue;
    }
    for (std::size_t i = 0; i <= d; ++i) {  // shrink toward the best vertex
      if (i == best) continue;
      for (std::size_t j = 0; j < d; ++j) simplex[i][j] = simplex[best][j] + 0.5 * (simplex[i][j] - simplex[best][j]);
      fv[i] = eval(simplex[i]);
    }
  }
  const auto it = std::min_element(fv.begin(), fv.end());
  return {simplex[static_cast<std::size_t>(it - fv.begin())], *it};
}

FitResult fit_hyperparameters(const GprDataset& data, KernelKind kind, const FitOptions& opt) {
  const std::size_t n = data.size(), dim = data.dim();
  if (!opt.input_scale.empty() && opt.input_scale.size() != dim) {
    throw std::invalid_argument("input scale has the wrong dimension");
  }
  // Distinct points and cloud diameter.
  std::size_t distinct = 0;
  double diameter = 0.0;
  std::vector<double> dists;
  for (std::size_t i = 0; i < n; ++i) {
    bool dup = false;
    for (std::size_t j = 0; j < i; ++j) {
      double d2 = 0.0;
      for (std::size_t c = 0; c < dim; ++c) {
        double e = data.point(i)[c] - data.point(j)[c];
        if (!opt.input_scale.empty()) e /= opt.input_scale[c];
        d2 += e * e;
      }
      const double d = std::sqrt(d2);
      if (d == 0.0) dup = true;
      diameter = std::max(diameter, d);
      dists.push_back(d);
    }
    if (!dup) ++distinct;
  }
  if (distinct < 3) throw std::invalid_argument("hyperparameter fitting needs at least 3 distinct points");

  const double lo_s = std::log(opt.lower), hi_s = std::log(opt.upper);
  const double lo_l = std::log(opt.lower * diameter), hi_l = std::log(opt.upper * diameter);
  // Searches may wander a little past the start box but not into degenerate scales.
  const double margin = std::log(100.0);

  auto objective = [&](const std::vector<double>& x) {
    if (x[0] < lo_s - margin || x[0] > hi_s + margin || x[1] < lo_l - margin || x[1] > hi_l + margin) {
      return std::numeric_limits<double>::infinity();
    }
    try {
      const double ll = log_marginal_likelihood(data, Kernel{kind, std::exp(x[0]), std::exp(x[1]), opt.input_scale});
      return std::isfinite(ll) ? -ll : std::numeric_limits<double>::infinity();
    } catch (const NumericalError&) {
      return std::numeric_limits<double>::infinity();
    }
  };

  FitResult best;
  best.log_likelihood = -std::numeric_limits<double>::infinity();
  bool any = false;
  RngStream rng(opt.seed, n);
  for (std::size_t s = 0; s < opt.starts; ++s) {
    std::vector<double> x0{lo_s + (hi_s - lo_s) * rng.uniform(), lo_l + (hi_l - lo_l) * rng.uniform()};
    if (!std::isfinite(objective(x0))) {
      ++best.failed_starts;
      continue;
    }
    const auto [x, fx] = nelder_mead(objective, x0, 0.5, opt.tolerance, opt.max_evaluations);
    if (!std::isfinite(fx)) {
      ++best.failed_starts;
      continue;
    }
    if (-fx > best.log_likelihood) {
      best.log_likelihood = -fx;
      best.kernel = Kernel{kind, std::exp(x[0]), std::exp(x[1]), opt.input_scale};
      any = true;
    }
  }
  if (!any) {
    std::nth_element(dists.begin(), dists.begin() + static_cast<std::ptrdiff_t>(dists.size() / 2), dists.end());
    const double median = dists[dists.size() / 2];
    best.kernel = Kernel{kind, 1.0, median > 0.0 ? median : 1.0, opt.input_scale};  // unit sd of standardized data
    best.fallback = true;
    warn("hyperparameter search failed from every start; using sample spread and median distance");
    try {
      best.log_likelihood = log_marginal_likelihood(data, best.kernel);
    } catch (const NumericalError&) {
      best.log_likelihood = -std::numeric_limits<double>::infinity();
    }
  }
  return best;
}

}  // namespace sctm
