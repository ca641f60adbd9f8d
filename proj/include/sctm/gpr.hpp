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

#ifndef SCTM_GPR_HPP
#define SCTM_GPR_HPP

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

namespace sctm {

enum class KernelKind { kSquaredExponential, kMatern12, kMatern32, kMatern52 };

std::string_view to_string(KernelKind kind);
std::optional<KernelKind> parse_kernel_kind(std::string_view name);  // se, matern12, matern32, matern52

/// Stationary covariance with signal std-dev sigma_c and length scale l. The
/// distance is Euclidean after dividing coordinate d by input_scale[d] (empty:
/// no rescaling), so boxes with unequal sides can share one length scale.
struct Kernel {
  KernelKind kind = KernelKind::kMatern32;
  double sigma_c = 1.0;
  double length = 1.0;
  std::vector<double> input_scale;

  /// Covariance as a function of the (rescaled) distance r.
  [[nodiscard]] double of_distance(double r) const;
  double operator()(std::span<const double> a, std::span<const double> b) const;

  /// Coordinates divided by input_scale, written to out.
  void rescale(const double* x, std::size_t dim, double* out) const;
  /// out[j] = c(x, points_j) for n row-major points that are already rescaled.
  void row(const double* x, const double* points, std::size_t dim, std::size_t n, double* out) const;

  void validate() const;
  bool operator==(const Kernel&) const = default;
};

/// Affine map nu = (mu - mean) / scale of the observed values.
struct Standardization {
  double mean = 0.0;
  double scale = 1.0;

  /// Sample mean and (n-1) sample std-dev; a zero spread gives scale 1 and a warning.
  static Standardization of(std::span<const double> values);
  [[nodiscard]] double forward(double mu) const noexcept { return (mu - mean) / scale; }
  [[nodiscard]] double backward(double nu) const noexcept { return nu * scale + mean; }
};

class GprDataset {
 public:
  explicit GprDataset(std::size_t dim) : dim_{dim} {}

  /// Adds an observation mu at k with noise variance tau2 >= 0.
  void add(std::span<const double> k, double mu, double tau2);

  [[nodiscard]] std::size_t dim() const noexcept { return dim_; }
  [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }
  [[nodiscard]] std::span<const double> point(std::size_t i) const { return {points_.data() + i * dim_, dim_}; }
  [[nodiscard]] const std::vector<double>& points() const noexcept { return points_; }  // row-major
  [[nodiscard]] const std::vector<double>& values() const noexcept { return values_; }
  [[nodiscard]] const std::vector<double>& noises() const noexcept { return noises_; }

 private:
  std::size_t dim_;
  std::vector<double> points_;
  std::vector<double> values_;
  std::vector<double> noises_;
};

struct Prediction {
  double mean = 0.0;
  double sd = 0.0;
};

/// Posterior of a zero-mean GP on standardized data with heteroscedastic noise,
/// reported in the original units. Immutable once built.
class GprPosterior {
 public:
  /// `fixed` reuses earlier standardization constants instead of those of `data`.
  GprPosterior(const GprDataset& data, Kernel kernel, std::optional<Standardization> fixed = {});

  [[nodiscard]] Prediction predict(std::span<const double> k) const;
  /// Batch form over m row-major queries.
  void predict(const double* queries, std::size_t m, double* mean, double* sd) const;
  /// Mean only; O(n) per query instead of O(n^2).
  void predict_mean(const double* queries, std::size_t m, double* mean) const;
  [[nodiscard]] double mean(std::span<const double> k) const { return predict(k).mean; }
  [[nodiscard]] double stddev(std::span<const double> k) const { return predict(k).sd; }

  /// log p(nu | sigma_c, l) of the standardized data.
  [[nodiscard]] double log_marginal_likelihood() const noexcept { return loglik_; }

  [[nodiscard]] const Kernel& kernel() const noexcept { return kernel_; }
  [[nodiscard]] const Standardization& standardization() const noexcept { return std_; }
  [[nodiscard]] std::size_t size() const noexcept { return n_; }
  [[nodiscard]] std::size_t dim() const noexcept { return dim_; }
  /// Diagonal jitter (relative to sigma_c^2) that was needed, 0 if none.
  [[nodiscard]] double jitter() const noexcept { return jitter_; }

 private:
  Kernel kernel_;
  Standardization std_;
  std::size_t n_, dim_;
  std::vector<double> points_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
  Eigen::VectorXd alpha_;
  double loglik_ = 0.0;
  double jitter_ = 0.0;
};

double log_marginal_likelihood(const GprDataset& data, const Kernel& kernel);

struct FitOptions {
  std::size_t starts = 10;
  double lower = 1e-2;  // multiplier of the data scale
  double upper = 1e2;
  double tolerance = 1e-6;  // simplex size in log-parameters
  std::size_t max_evaluations = 4000;
  std::uint64_t seed = 0x5eed;
  std::vector<double> input_scale;  // passed through to the kernel
};

struct FitResult {
  Kernel kernel;
  double log_likelihood = 0.0;
  bool fallback = false;
  std::size_t failed_starts = 0;
};

/// Maximizes the log marginal likelihood over (sigma_c, l) by Nelder-Mead in
/// log space from log-uniform starts; sigma_c is scaled by 1 (standardized
/// data) and l by the diameter of the (rescaled) point cloud. Needs >= 3 distinct points.
FitResult fit_hyperparameters(const GprDataset& data, KernelKind kind, const FitOptions& options = {});

/// Minimizes f by Nelder-Mead from x0 with initial step `step`. Stops when the
/// simplex diameter and value spread drop below tol or after max_evals calls.
std::pair<std::vector<double>, double> nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                                                   std::vector<double> x0, double step, double tol,
                                                   std::size_t max_evals);

}  // namespace sctm

#endif  // SCTM_GPR_HPP
