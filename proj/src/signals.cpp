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

#include "sctm/signals.hpp"

#include <algorithm>

#include "sctm/errors.hpp"

namespace sctm {
namespace {

bool contains(const std::vector<std::size_t>& v, std::size_t x) { return std::find(v.begin(), v.end(), x) != v.end(); }

struct Phase {
  bool i_green;
  long t_switch;
};

Phase phase_at(const SignalSchedule& s, long t) {
  const long cycle = 2 * s.green_steps;
  long p = (t + s.shift_steps) % cycle;
  if (p < 0) p += cycle;
  if (p < s.green_steps) return {true, p + 1};
  return {false, p - s.green_steps + 1};
}

double ramp(const SignalSchedule& s, long t_switch) {
  const double x = (static_cast<double>(t_switch) - s.t_safe) * s.t_real * s.a_real / s.v_real;
  return std::clamp(x, 0.0, 1.0);
}

}  // namespace

void SignalSchedule::validate(std::size_t arms) const {
  if (green_steps < 1) throw ConfigError("signal green duration must be >= 1 step");
  if (shift_steps < 0) throw ConfigError("signal shift must be >= 0");
  for (std::size_t a : axis_i) {
    if (a >= arms) throw ConfigError("signal axis references a missing arm");
    if (contains(axis_j, a)) throw ConfigError("signal axes must be disjoint");
  }
  for (std::size_t a : axis_j) {
    if (a >= arms) throw ConfigError("signal axis references a missing arm");
  }
  if (!(t_real > 0) || !(v_real > 0) || !(a_real > 0)) throw ConfigError("signal t_real, v_real, a_real must be > 0");
}

void light_adjustments(const SignalSchedule& schedule, std::size_t arms, long t, double* la) {
  const Phase ph = phase_at(schedule, t);
  const double adjust = ramp(schedule, ph.t_switch);
  for (std::size_t u = 0; u < arms; ++u) {
    const bool green = ph.i_green ? contains(schedule.axis_i, u) : contains(schedule.axis_j, u);
    for (std::size_t w = 0; w < arms; ++w) la[u * arms + w] = (green && w != u) ? adjust : 0.0;
  }
}

SignalState advance_signal(const SignalSchedule& schedule, std::size_t arms, long t) {
  SignalState s;
  s.arms = arms;
  s.ls.assign(arms * arms, 0);
  s.t_switch.assign(arms * arms, 0);
  s.la.assign(arms * arms, 0.0);
  const Phase ph = phase_at(schedule, t);
  light_adjustments(schedule, arms, t, s.la.data());
  for (std::size_t u = 0; u < arms; ++u) {
    const bool green = ph.i_green ? contains(schedule.axis_i, u) : contains(schedule.axis_j, u);
    for (std::size_t w = 0; w < arms; ++w) {
      if (w == u) continue;
      s.ls[u * arms + w] = green ? 1 : 0;
      s.t_switch[u * arms + w] = ph.t_switch;
    }
  }
  return s;
}

}  // namespace sctm
