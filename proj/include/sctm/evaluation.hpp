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

#ifndef SCTM_EVALUATION_HPP
#define SCTM_EVALUATION_HPP

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "sctm/network.hpp"
#include "sctm/simulator.hpp"

namespace sctm {

// ---- utilities ----------------------------------------------------------------

struct Utility {
  enum class Kind { kIdentity, kPolynomial, kExpectile, kSquareRoot };
  Kind kind = Kind::kIdentity;
  double c = 0.0;      // c_p or c_e
  double alpha = 1.0;  // polynomial: >= 1; expectile: in (0, 1/2]

  static Utility identity() { return {}; }
  static Utility polynomial(double c_p, double alpha) { return {Kind::kPolynomial, c_p, alpha}; }
  static Utility expectile(double c_e, double alpha) { return {Kind::kExpectile, c_e, alpha}; }
  static Utility square_root() { return {Kind::kSquareRoot, 0.0, 1.0}; }

  double operator()(double x) const;
  /// Point where the utility is not smooth, if any.
  [[nodiscard]] std::optional<double> kink() const;
  void validate() const;

  bool operator==(const Utility&) const = default;
};

std::string_view to_string(Utility::Kind kind);
std::optional<Utility::Kind> parse_utility_kind(std::string_view name);

// ---- benchmark thresholds ----------------------------------------------------------

/// Benchmark flow e * 2X with X ~ Beta(beta, beta) and sd(X) = sigma_target.
struct BenchmarkSpec {
  double e = 60.0;
  double sigma_target = 0.1;

  /// Solves 1/sqrt(8 beta + 4) = sigma_target.
  [[nodiscard]] double beta() const;
};

double beta_for_sigma(double sigma_target);

/// gamma = E[u(e * 2X)] by adaptive Gauss-Kronrod quadrature (relative
/// tolerance 1e-8), split at the utility's kink. Throws NumericalError if the
/// quadrature does not reach the tolerance.
double calibrate_threshold(const BenchmarkSpec& bench, const Utility& u);

// ---- performance measures ----------------------------------------------------------

/// Q: time average of the total outflow over all routes.
struct AvgNetworkFlow {};

/// Q^a: realized removal by the sinks over attempted inflow of the sources,
/// both summed over the routes in N.
struct Throughput {
  std::vector<RouteId> routes;
};

/// Q^b: time average of q_out / rho on two routes. When rho < 1e-12 the
/// summand is the free-flow factor a of the route's cell (the free-flow limit).
struct AvgVelocity {
  RouteId first = kNoRoute;
  RouteId second = kNoRoute;
};

using PerformanceMeasure = std::variant<AvgNetworkFlow, Throughput, AvgVelocity>;

std::string_view measure_name(const PerformanceMeasure& m);

class PerformanceAccumulator final : public StepObserver {
 public:
  PerformanceAccumulator(const TrafficNetwork& net, PerformanceMeasure measure);

  void observe(long t, std::span<const double> rho_before, const FlowRecord& flows,
               std::span<const double> rho_after) override;

  /// Statistic over the steps seen so far (0 before any step).
  [[nodiscard]] double value() const;
  [[nodiscard]] long steps() const noexcept { return steps_; }

 private:
  PerformanceMeasure measure_;
  double a_first_ = 1.0, a_second_ = 1.0;
  double sum_ = 0.0;
  double removed_ = 0.0, attempted_ = 0.0;
  long steps_ = 0;
};

// ---- Monte Carlo estimation ----------------------------------------------------------

/// One-pass mean/variance (Welford).
class RunningStats {
 public:
  void add(double x);
  [[nodiscard]] std::size_t count() const noexcept { return n_; }
  [[nodiscard]] double mean() const noexcept { return mean_; }
  /// Unbiased sample variance; 0 for fewer than two samples.
  [[nodiscard]] double variance() const noexcept { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }

 private:
  std::size_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

struct SequentialOptions {
  double tau_target = 0.0;  // target standard deviation of the estimate
  std::size_t n_min = 20;
  std::size_t n_max = 500;
  double c3 = 2.0;          // discard when sigma_hat/sqrt(n) >= c3 * tau; <= 0 disables
  unsigned workers = 1;

  void validate() const;
};

struct SequentialEstimate {
  double mu_hat = 0.0;
  double tau_sq = 0.0;  // sigma_hat^2 / n
  double sigma_hat = 0.0;
  std::size_t n = 0;
  bool discarded = false;
};

/// Draws replicate `index` of Q_k; must be a deterministic function of index.
using ReplicateSampler = std::function<double(std::uint64_t index)>;

/// Samples u(Q) for replicate indices 0, 1, ... and stops at
/// n = min(min{n >= n_min : s^2/n <= tau^2}, n_max). With several workers the
/// replicates are computed in batches but consumed in index order, so the
/// result does not depend on the worker count.
SequentialEstimate sequential_mc(const ReplicateSampler& sample, const Utility& u, const SequentialOptions& opt);

struct BayesianEstimate {
  double t_post = 0.0;
  double s2_post = 0.0;
  std::size_t n = 0;
  double sample_mean = 0.0;
  double sample_variance = 0.0;
};

/// Normal-mean posterior given prior N(m, s2) and the CLT sampling model.
BayesianEstimate normal_posterior(double prior_mean, double prior_var, double sample_mean, double sample_var,
                                  std::size_t n);

/// As sequential_mc but stops once the posterior variance drops below tau^2.
BayesianEstimate bayesian_sequential_mc(double prior_mean, double prior_var, const ReplicateSampler& sample,
                                        const Utility& u, const SequentialOptions& opt);

// ---- parallel helper ----------------------------------------------------------

/// Calls fn(i) for i in [begin, end) on up to `workers` threads. Exceptions are
/// rethrown (the one with the smallest index wins).
void parallel_for(std::size_t begin, std::size_t end, unsigned workers, const std::function<void(std::size_t)>& fn);

}  // namespace sctm

#endif  // SCTM_EVALUATION_HPP
