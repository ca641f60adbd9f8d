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

#include "sctm/environment.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <boost/math/special_functions/erf.hpp>

#include "sctm/errors.hpp"

namespace sctm {

// ---- rng.hpp helpers -------------------------------------------------------

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    if (p == 0.0) return -INFINITY;
    if (p == 1.0) return INFINITY;
    throw std::domain_error("normal quantile needs p in [0, 1]");
  }
  return -M_SQRT2 * boost::math::erfc_inv(2.0 * p);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / M_SQRT2); }

double RngStream::normal() { return normal_quantile(uniform()); }

std::uint64_t RngStream::below(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("below(0)");
  // Rejection keeps the result exactly uniform.
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
  std::uint64_t x = engine_();
  while (x >= limit) x = engine_();
  return x % n;
}

// ---- copula ----------------------------------------------------------------

double frank_conditional_inverse(double r, double u1, double v) {
  if (FrankCopula{r}.independent()) return v;
  const double d = std::expm1(-r);  // e^{-r} - 1
  const double a = std::exp(-r * u1);
  const double u2 = -std::log1p(v * d / (v + (1.0 - v) * a)) / r;
  return std::clamp(u2, 0x1.0p-60, 1.0 - 0x1.0p-53);
}

std::pair<double, double> frank_sample(const FrankCopula& cop, RngStream& rng) {
  const double u1 = rng.uniform();
  const double v = rng.uniform();
  return {u1, frank_conditional_inverse(cop.r, u1, v)};
}

double ar_step(ArSourceSink& src, double eps) {
  src.value += eps;
  return src.value;
}

double clamp_net_flow(double q_aux, double rho, double q_in, double q_out, double rho_cap, double l_v) {
  const double base = q_out - q_in - l_v * rho;
  const double lo = base;                  // lands exactly on rho(t+1) = 0
  const double hi = l_v * rho_cap + base;  // lands exactly on rho(t+1) = rho_cap
  return std::min(std::max(q_aux, lo), hi);
}

// ---- source/sink process -------------------------------------------------------

void EnvironmentSpec::validate(const TrafficNetwork& net) const {
  std::vector<RouteId> seen;
  for (std::size_t i = 0; i < sources.size(); ++i) {
    const SourceSpec& s = sources[i];
    const std::string where = "source " + std::to_string(i);
    if (s.route >= net.route_count()) throw ConfigError(where + ": unknown route");
    if (std::find(seen.begin(), seen.end(), s.route) != seen.end()) {
      throw ConfigError(where + ": route " + net.describe(s.route) + " already has a source");
    }
    seen.push_back(s.route);
    if (!(s.rho_cap > 0)) throw ConfigError(where + ": rho_cap must be > 0");
    switch (s.kind) {
      case SourceSpec::Kind::kRandomWalk:
        if (!(s.sigma >= 0)) throw ConfigError(where + ": sigma must be >= 0");
        if (s.copula_slot > 1) throw ConfigError(where + ": copula slot must be 0 or 1");
        if (s.copula_slot >= 0 && !copula) throw ConfigError(where + ": copula slot without a copula");
        break;
      case SourceSpec::Kind::kGaussian:
        if (!(s.cv >= 0)) throw ConfigError(where + ": cv must be >= 0");
        break;
      case SourceSpec::Kind::kCopy:
        if (s.of >= i) throw ConfigError(where + ": copies must refer to an earlier source");
        break;
      case SourceSpec::Kind::kConstant:
        break;
    }
  }
}

SourceSinkModel::SourceSinkModel(EnvironmentSpec spec, RngStream& rng)
    : spec_{std::move(spec)}, rng_{rng}, state_(spec_.sources.size(), 0.0), aux_(spec_.sources.size(), 0.0) {
  for (const auto& s : spec_.sources) routes_.push_back(s.route);
}

void SourceSinkModel::net_flows(const NetFlowContext& ctx, std::span<double> q_net, std::span<double> q_aux) {
  std::fill(q_net.begin(), q_net.end(), 0.0);
  std::fill(q_aux.begin(), q_aux.end(), 0.0);

  double z[2] = {0.0, 0.0};
  if (spec_.copula) {
    const auto [u1, u2] = frank_sample(*spec_.copula, rng_);
    z[0] = normal_quantile(u1);
    z[1] = normal_quantile(u2);
  }
  const auto len = ctx.net.route_lengths();
  for (std::size_t i = 0; i < spec_.sources.size(); ++i) {
    const SourceSpec& s = spec_.sources[i];
    double a = 0.0;
    switch (s.kind) {
      case SourceSpec::Kind::kRandomWalk: {
        const double zz = s.copula_slot >= 0 ? z[s.copula_slot] : rng_.normal();
        state_[i] += s.sigma * zz;
        a = state_[i];
        break;
      }
      case SourceSpec::Kind::kGaussian:
        a = s.mean + s.cv * std::abs(s.mean) * rng_.normal();
        break;
      case SourceSpec::Kind::kCopy:
        a = s.scale * aux_[s.of];
        break;
      case SourceSpec::Kind::kConstant:
        a = s.value;
        break;
    }
    aux_[i] = a;
    const RouteId r = s.route;
    q_aux[r] = a;
    q_net[r] = clamp_net_flow(a, ctx.rho[r], ctx.q_in[r], ctx.q_out[r], s.rho_cap, len[r]);
  }
}

}  // namespace sctm
