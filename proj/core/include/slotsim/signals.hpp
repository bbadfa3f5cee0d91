// Copyright 2026 The slotsim Authors
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

#pragma once

#include <vector>

#include "slotsim/road_network.hpp"

namespace slotsim {

enum class SignalPhase { Green, Yellow, Red };

const char* to_string(SignalPhase p);

/// Fixed-time two-phase plan: north-south green and yellow, then east-west
/// green and yellow. The cycle is 2 * (green + yellow + all_red).
struct SignalTiming {
  double green{30.0};
  double yellow{3.0};
  double all_red{0.0};
  /// Per-intersection start offsets (s); missing entries are zero.
  std::vector<double> offsets;

  void validate() const;
  double cycle() const { return 2.0 * (green + yellow + all_red); }
  double offset(IntersectionId node) const;
};

/// Phase shown to traffic travelling `heading` at `node` at time `t`.
SignalPhase signal_phase(double t, const SignalTiming& timing, IntersectionId node,
                         Heading heading);

/// Whether a driver facing a yellow at distance `d` from the stop line with
/// speed `v` should stop, given a comfortable deceleration `decel`.
bool should_stop_on_yellow(double v, double d, double decel = 3.0);

}  // namespace slotsim
