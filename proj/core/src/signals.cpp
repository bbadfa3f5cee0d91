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

#include "slotsim/signals.hpp"

#include <cmath>

#include "slotsim/errors.hpp"

namespace slotsim {

const char* to_string(SignalPhase p) {
  switch (p) {
    case SignalPhase::Green:
      return "green";
    case SignalPhase::Yellow:
      return "yellow";
    case SignalPhase::Red:
      return "red";
  }
  return "?";
}

void SignalTiming::validate() const {
  if (!(green > 0.0)) throw ConfigError("signals.green", "must be positive");
  if (!(yellow > 0.0)) throw ConfigError("signals.yellow", "must be positive");
  if (!(all_red >= 0.0)) throw ConfigError("signals.all_red", "must be non-negative");
  for (double o : offsets) {
    if (!std::isfinite(o)) throw ConfigError("signals.offsets", "must be finite");
  }
}

double SignalTiming::offset(IntersectionId node) const {
  if (node < 0 || static_cast<std::size_t>(node) >= offsets.size()) return 0.0;
  return offsets[static_cast<std::size_t>(node)];
}

SignalPhase signal_phase(double t, const SignalTiming& timing, IntersectionId node,
                         Heading heading) {
  const double cycle = timing.cycle();
  const double half = cycle / 2.0;
  double local = std::fmod(t - timing.offset(node), cycle);
  if (local < 0.0) local += cycle;
  const bool ns = heading == Heading::North || heading == Heading::South;
  if (!ns) {
    local -= half;
    if (local < 0.0) local += cycle;
  }
  if (local < timing.green) return SignalPhase::Green;
  if (local < timing.green + timing.yellow) return SignalPhase::Yellow;
  return SignalPhase::Red;
}

bool should_stop_on_yellow(double v, double d, double decel) {
  return v * v / (2.0 * decel) <= d;
}

}  // namespace slotsim
