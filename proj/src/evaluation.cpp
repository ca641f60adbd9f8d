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

#include "sctm/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

#include <boost/math/distributions/beta.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "sctm/errors.hpp"

namespace sctm {

double Utility::operator()(double x) const {
  switch (kind) {
    case Kind::kIdentity:
      return x;
    case Kind::kPolynomial:
      return x <= c ? -std::pow(c - x, alpha) : 0.0;
    case Kind::kExpectile:
      return x >= c ? alpha * (x - c) : -(1.0 - alpha) * (c - x);
    case Kind::kSquareRoot:
      if (x < 0.0) throw std::domain_error("square-root utility needs x >= 0");
      return std::sqrt(x);
  }
  return x;
}

std::optional<double> Utility::kink() const {
  if (kind == Kind::kPolynomial || kind == Kind::kExpectile) return c;
  if (kind == Kind::kSquareRoot) return 0.0;
  return std::nullopt;
}

void Utility::validate() const {
  if (!std::isfinite(c)) throw ConfigError("utility constant must be finite");
  if (kind == Kind::kPolynomial && !(alpha >= 1.0)) throw ConfigError("polynomial utility needs alpha >= 1");
  if (kind == Kind::kExpectile && !(alpha > 0.0 && alpha <= 0.5)) {
    throw ConfigError("expectile utility needs alpha in (0, 1/2]");
  }
}

std::string_view to_string(Utility::Kind kind) {
  switch (kind) {
    case Utility::Kind::kIdentity:
      return "identity";
    case Utility::Kind::kPolynomial:
      return "polynomial";
    case Utility::Kind::kExpectile:
      return "expectile";
    case Utility::Kind::kSquareRoot:
      return "square_root";
  }
  return "unknown";
}

std::optional<Utility::Kind> parse_utility_kind(std::string_view name) {
  for (auto k : {Utility::Kind::kIdentity, Utility::Kind::kPolynomial, Utility::Kind::kExpectile,
                 Utility::Kind::kSquareRoot}) {
    if (to_string(k) == name) return k;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------

double beta_for_sigma(double sigma_target) {
  if (!(sigma_target > 0.0 && sigma_target < 0.5)) {
    throw ConfigError("benchmark sigma must lie in (0, 1/2)");
  }
  return (1.0 / (sigma_target * sigma_target) - 4.0) / 8.0;
}

double BenchmarkSpec::beta() const { return beta_for_sigma(sigma_target); }

double calibrate_threshold(const BenchmarkSpec& bench, const Utility& u) {
  if (!(bench.e > 0.0)) throw ConfigError("benchmark expectation must be > 0");
  u.validate();
  const double beta = bench.beta();
  const boost::math::beta_distribution<double> dist(beta, beta);
  auto integrand = [&](double x) { return u(bench.e * 2.0 * x) * boost::math::pdf(dist, x); };

  std::vector<double> cuts{0.0};
  if (auto k = u.kink()) {
    const double xk = *k / (2.0 * bench.e);
    if (xk > 0.0 && xk < 1.0) cuts.push_back(xk);
  }
  cuts.push_back(1.0);

  constexpr double kRelTol = 1e-8;
  double total = 0.0, err_total = 0.0, l1_total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    double err = 0.0, l1 = 0.0;
    const double piece = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(integrand, cuts[i], cuts[i + 1],
                                                                                     20, 1e-12, &err, &l1);
    total += piece;
    err_total += err;
    l1_total += l1;
  }
  // Relative to the L1 norm so that sign cancellation (expectile) cannot make
  // the check unreachable.
  if (!std::isfinite(total) || err_total > kRelTol * l1_total) {
    throw NumericalError("threshold quadrature did not reach the requested tolerance");
  }
  return total;
}

// ---------------------------------------------------------------------------

std::string_view measure_name(const PerformanceMeasure& m) {
  switch (m.index()) {
    case 0:
      return "Q";
    case 1:
      return "Qa";
    default:
      return "Qb";
  }
}

PerformanceAccumulator::PerformanceAccumulator(const TrafficNetwork& net, PerformanceMeasure measure)
    : measure_{std::move(measure)} {
  if (const auto* tp = std::get_if<Throughput>(&measure_)) {
    for (RouteId r : tp->routes) {
      if (r >= net.route_count()) throw ConfigError("throughput route out of range");
    }
  } else if (const auto* av = std::get_if<AvgVelocity>(&measure_)) {
    if (av->first >= net.route_count() || av->second >= net.route_count()) {
      throw ConfigError("velocity measure needs two existing routes");
    }
    a_first_ = net.node(net.route(av->first).via).cell.params.a;
    a_second_ = net.node(net.route(av->second).via).cell.params.a;
  }
}

void PerformanceAccumulator::observe(long, std::span<const double> rho_before, const FlowRecord& flows,
                                     std::span<const double>) {
  ++steps_;
  switch (measure_.index()) {
    case 0: {
      double s = 0.0;
      for (double q : flows.q_out) s += q;
      sum_ += s;
      break;
    }
    case 1:
      for (RouteId r : std::get<Throughput>(measure_).routes) {
        removed_ += std::max(-flows.q_net[r], 0.0);
        attempted_ += std::max(flows.q_aux[r], 0.0);
      }
      break;
    default: {
      const auto& av = std::get<AvgVelocity>(measure_);
      auto ratio = [&](RouteId r, double a) {
        const double rho = rho_before[r];
        return rho < 1e-12 ? a : flows.q_out[r] / rho;
      };
      sum_ += ratio(av.first, a_first_) + ratio(av.second, a_second_);
      break;
    }
  }
}

double PerformanceAccumulator::value() const {
  if (steps_ == 0) return 0.0;
  if (measure_.index() == 1) return attempted_ > 0.0 ? removed_ / attempted_ : 0.0;
  return sum_ / static_cast<double>(steps_);
}

// ---------------------------------------------------------------------------

void RunningStats::add(double x) {
  ++n_;
  const double delta = x - mean_;
  mean_ += delta / static_cast<double>(n_);
  m2_ += delta * (x - mean_);
}

void SequentialOptions::validate() const {
  if (n_min < 2) throw ConfigError("n_min must be >= 2");
  if (n_max < n_min) throw ConfigError("n_max must be >= n_min");
  if (!(tau_target >= 0.0)) throw ConfigError("target noise must be >= 0");
}

namespace {

// Streams u(Q_index) in index order, computing batches ahead when parallel.
class OrderedStream {
 public:
  OrderedStream(const ReplicateSampler& sample, const Utility& u, unsigned workers, std::size_t n_max)
      : sample_{sample}, u_{u}, workers_{std::max(1u, workers)}, n_max_{n_max} {}

  double next() {
    if (pos_ == buf_.size()) refill();
    ++consumed_;
    return buf_[pos_++];
  }

 private:
  void refill() {
    const std::size_t batch = std::min<std::size_t>(workers_ == 1 ? 1 : 2 * workers_, n_max_ - consumed_);
    buf_.assign(batch, 0.0);
    const std::size_t base = consumed_;
    parallel_for(0, batch, workers_, [&](std::size_t i) { buf_[i] = u_(sample_(base + i)); });
    pos_ = 0;
  }

  const ReplicateSampler& sample_;
  const Utility& u_;
  unsigned workers_;
  std::size_t n_max_;
  std::vector<double> buf_;
  std::size_t pos_ = 0;
  std::size_t consumed_ = 0;
};

}  // namespace

SequentialEstimate sequential_mc(const ReplicateSampler& sample, const Utility& u, const SequentialOptions& opt) {
  opt.validate();
  OrderedStream stream(sample, u, opt.workers, opt.n_max);
  RunningStats stats;
  const double tau2 = opt.tau_target * opt.tau_target;
  while (stats.count() < opt.n_max) {
    const double y = stream.next();
    if (!std::isfinite(y)) throw NumericalError("replicate produced a non-finite value");
    stats.add(y);
    const std::size_t n = stats.count();
    if (n >= opt.n_min && stats.variance() / static_cast<double>(n) <= tau2) break;
  }
  SequentialEstimate est;
  est.n = stats.count();
  est.mu_hat = stats.mean();
  est.sigma_hat = std::sqrt(stats.variance());
  est.tau_sq = stats.variance() / static_cast<double>(est.n);
  est.discarded = opt.c3 > 0.0 && est.sigma_hat / std::sqrt(static_cast<double>(est.n)) >= opt.c3 * opt.tau_target;
  return est;
}

BayesianEstimate normal_posterior(double prior_mean, double prior_var, double sample_mean, double sample_var,
                                  std::size_t n) {
  if (!(prior_var > 0.0)) throw std::invalid_argument("prior variance must be > 0");
  BayesianEstimate b;
  b.n = n;
  b.sample_mean = sample_mean;
  b.sample_variance = sample_var;
  if (n == 0) {
    b.t_post = prior_mean;
    b.s2_post = prior_var;
    return b;
  }
  if (sample_var <= 0.0) {  // infinite sampling precision
    b.t_post = sample_mean;
    b.s2_post = 0.0;
    return b;
  }
  const double prior_prec = 1.0 / prior_var;
  const double data_prec = static_cast<double>(n) / sample_var;
  b.s2_post = 1.0 / (prior_prec + data_prec);
  b.t_post = (prior_prec * prior_mean + data_prec * sample_mean) * b.s2_post;
  return b;
}

BayesianEstimate bayesian_sequential_mc(double prior_mean, double prior_var, const ReplicateSampler& sample,
                                        const Utility& u, const SequentialOptions& opt) {
  opt.validate();
  if (!(prior_var > 0.0)) throw std::invalid_argument("prior variance must be > 0");
  OrderedStream stream(sample, u, opt.workers, opt.n_max);
  RunningStats stats;
  const double tau2 = opt.tau_target * opt.tau_target;
  BayesianEstimate b;
  while (stats.count() < opt.n_max) {
    const double y = stream.next();
    if (!std::isfinite(y)) throw NumericalError("replicate produced a non-finite value");
    stats.add(y);
    b = normal_posterior(prior_mean, prior_var, stats.mean(), stats.variance(), stats.count());
    if (stats.count() >= opt.n_min && b.s2_post <= tau2) break;
  }
  return b;
}

void parallel_for(std::size_t begin, std::size_t end, unsigned workers, const std::function<void(std::size_t)>& fn) {
  if (end <= begin) return;
  const std::size_t n = end - begin;
  const unsigned threads = static_cast<unsigned>(std::min<std::size_t>(std::max(1u, workers), n));
  if (threads == 1) {
    for (std::size_t i = begin; i < end; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{begin};
  std::mutex mu;
  std::exception_ptr first_error;
  std::size_t first_index = std::numeric_limits<std::size_t>::max();
  auto worker = [&] {
    for (std::size_t i = next++; i < end; i = next++) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (i < first_index) {
          first_index = i;
          first_error = std::current_exception();
        }
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace sctm
