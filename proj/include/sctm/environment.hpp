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

#ifndef SCTM_ENVIRONMENT_HPP
#define SCTM_ENVIRONMENT_HPP

#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "sctm/network.hpp"
#include "sctm/rng.hpp"

namespace sctm {

/// Frank copula C_r. |r| <= 1e-8 is treated as the independence copula.
struct FrankCopula {
  double r = 0.0;
  [[nodiscard]] bool independent() const noexcept { return r > -1e-8 && r < 1e-8; }
};

/// Draws (u1, u2) by conditional inversion; consumes exactly two uniforms.
std::pair<double, double> frank_sample(const FrankCopula& cop, RngStream& rng);

/// Inverse of u2 -> dC_r(u1, u2)/du1 evaluated at probability v.
double frank_conditional_inverse(double r, double u1, double v);

/// Random-walk source/sink q(t+1) = q(t) + eps(t+1).
struct ArSourceSink {
  RouteId route = kNoRoute;
  double sigma = 0.0;
  double value = 0.0;
};

double ar_step(ArSourceSink& src, double eps);

/// q_aux ~ N(mean, (cv * mean)^2).
struct GaussianSourceSink {
  RouteId route = kNoRoute;
  double mean = 0.0;
  double cv = 0.0;
};

/// Truncates q_aux so that rho + (q_in - q_out + q_net)/l_v lands in [0, rho_cap].
double clamp_net_flow(double q_aux, double rho, double q_in, double q_out, double rho_cap, double l_v);

// ---------------------------------------------------------------------------

struct NetFlowContext {
  const TrafficNetwork& net;
  long t;                          // the step being computed is t -> t+1
  std::span<const double> rho;     // rho(t)
  std::span<const double> q_in;    // q_in(t+1)
  std::span<const double> q_out;   // q_out(t+1)
};

/// Phase-four hook: exogenous traffic entering/leaving the network.
class NetFlowModel {
 public:
  virtual ~NetFlowModel() = default;
  /// Fills q_net (realized) and q_aux (attempted) for every route; routes
  /// without a source or sink get 0 in both.
  virtual void net_flows(const NetFlowContext& ctx, std::span<double> q_net, std::span<double> q_aux) = 0;
  /// Routes carrying a source or sink (the set N of the throughput measure).
  [[nodiscard]] virtual std::span<const RouteId> source_routes() const = 0;
};

/// One exogenous flow attached to a route.
struct SourceSpec {
  enum class Kind {
    kRandomWalk,  // AR(1) with unit coefficient and N(0, sigma^2) innovations
    kGaussian,    // i.i.d. N(mean, (cv*mean)^2) each step
    kCopy,        // scale * (attempted flow of an earlier source in the list)
    kConstant,
  };
  Kind kind = Kind::kConstant;
  RouteId route = kNoRoute;
  double rho_cap = 1.0;     // clamp bound for the route density
  double sigma = 0.0;       // random walk
  int copula_slot = -1;     // random walk: take innovations from copula slot 0/1
  double mean = 0.0;        // gaussian
  double cv = 0.0;          // gaussian
  std::size_t of = 0;       // copy
  double scale = 1.0;       // copy
  double value = 0.0;       // constant
};

struct EnvironmentSpec {
  std::vector<SourceSpec> sources;
  std::optional<FrankCopula> copula;  // couples the two random-walk slots

  void validate(const TrafficNetwork& net) const;
};

/// Stateful per-replicate source/sink process. Per step the draws happen in a
/// fixed order (copula pair first, then sources in list order), so the
/// consumption of random numbers never depends on the traffic state.
class SourceSinkModel final : public NetFlowModel {
 public:
  SourceSinkModel(EnvironmentSpec spec, RngStream& rng);

  void net_flows(const NetFlowContext& ctx, std::span<double> q_net, std::span<double> q_aux) override;
  [[nodiscard]] std::span<const RouteId> source_routes() const override { return routes_; }

 private:
  EnvironmentSpec spec_;
  RngStream& rng_;
  std::vector<double> state_;  // random-walk values
  std::vector<double> aux_;    // attempted flow per source this step
  std::vector<RouteId> routes_;
};

}  // namespace sctm

#endif  // SCTM_ENVIRONMENT_HPP
