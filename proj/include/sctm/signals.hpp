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

#ifndef SCTM_SIGNALS_HPP
#define SCTM_SIGNALS_HPP

#include <cstddef>
#include <cstdint>
#include <vector>

namespace sctm {

/// Fixed-time two-phase plan. Approaches in axis_i are green while
/// (t + shift) mod 2*green < green, approaches in axis_j the rest of the cycle.
struct SignalSchedule {
  long green_steps = 1;
  long shift_steps = 0;
  std::vector<std::size_t> axis_i;  // arm indices
  std::vector<std::size_t> axis_j;
  double a_real = 1.5;    // m/s^2
  double t_safe = 2.0;    // steps
  double t_real = 1.0;    // seconds per step
  double v_real = 13.9;   // m/s

  /// Throws ConfigError if the plan is malformed for a node with `arms` arms.
  void validate(std::size_t arms) const;
};

/// Light state of every route through one node at one time step, arms x arms.
struct SignalState {
  std::size_t arms = 0;
  std::vector<std::uint8_t> ls;     // 1 = green
  std::vector<long> t_switch;       // steps since the last change, >= 1
  std::vector<double> la;           // adjustment in [0, 1], 0 when red

  [[nodiscard]] double light_adjust(std::size_t from, std::size_t to) const { return la[from * arms + to]; }
};

/// Evaluates the plan at step t >= 0. The plan is taken to have been running
/// since the infinite past, so t_switch counts from the start of the current
/// half cycle: the first green step has t_switch = 1.
SignalState advance_signal(const SignalSchedule& schedule, std::size_t arms, long t);

/// Fills `la` (arms x arms) with the adjustments at step t without allocating.
void light_adjustments(const SignalSchedule& schedule, std::size_t arms, long t, double* la);

}  // namespace sctm

#endif  // SCTM_SIGNALS_HPP
