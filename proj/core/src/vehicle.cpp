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

#include "slotsim/vehicle.hpp"

#include <algorithm>
#include <cmath>

#include <spdlog/spdlog.h>

namespace slotsim {

namespace {

bool command_is_finite(const DriveCommand& cmd) {
  return std::visit([](const auto& t) { return std::isfinite(t.value); }, cmd.target);
}

}  // namespace

double resolve_acceleration(const VehicleState& state, const DriveCommand& cmd, double dt,
                            const ActuatorLimits& limits) {
  if (!command_is_finite(cmd)) {
    return 0.0;
  }
  const double raw = std::holds_alternative<TargetAccel>(cmd.target)
                         ? std::get<TargetAccel>(cmd.target).value
                         : (std::get<TargetSpeed>(cmd.target).value - state.v) / dt;
  return std::clamp(raw, limits.a_min, limits.a_max);
}

VehicleState step_vehicle(const VehicleState& state, const DriveCommand& cmd, double dt,
                          const ActuatorLimits& limits) {
  if (!command_is_finite(cmd)) {
    spdlog::warn("vehicle {}: non-finite drive command rejected, coasting", state.id);
  }
  const double a = resolve_acceleration(state, cmd, dt, limits);

  VehicleState next = state;
  const double v = state.v;
  double v_next = v + a * dt;
  double advance = v * dt + 0.5 * a * dt * dt;
  if (v_next < 0.0) {
    // Stops inside the step: only the distance to standstill is covered.
    advance = a < 0.0 ? v * v / (-2.0 * a) : 0.0;
    v_next = 0.0;
  } else if (v_next > limits.v_max) {
    const double t_cap = a > 0.0 ? std::max(0.0, (limits.v_max - v) / a) : 0.0;
    advance = v * t_cap + 0.5 * a * t_cap * t_cap + limits.v_max * (dt - t_cap);
    v_next = limits.v_max;
  }
  next.v = v_next;
  next.r = state.r + std::max(0.0, advance);
  next.a = (v_next - v) / dt;
  return next;
}

DriveCommand human_input_adapter(PedalInput raw, const ActuatorLimits& limits) {
  auto clamp_unit = [](double value, const char* name) {
    if (!std::isfinite(value)) {
      spdlog::warn("pedal input {} is not finite, treating as 0", name);
      return 0.0;
    }
    if (value < 0.0 || value > 1.0) {
      spdlog::warn("pedal input {}={} outside [0,1], clamped", name, value);
    }
    return std::clamp(value, 0.0, 1.0);
  };
  const double throttle = clamp_unit(raw.throttle, "throttle");
  const double brake = clamp_unit(raw.brake, "brake");
  return DriveCommand::accel(throttle * limits.a_max - brake * std::abs(limits.a_min),
                             CommandSource::Human);
}

double safe_follow_speed(double gap, double v_leader, const FollowGuard& guard) {
  const double b = guard.decel;
  const double bt = b * guard.reaction_time;
  const double radicand = bt * bt + v_leader * v_leader + 2.0 * b * (gap - guard.standstill_gap);
  if (radicand <= 0.0) {
    return 0.0;
  }
  return std::max(0.0, -bt + std::sqrt(radicand));
}

}  // namespace slotsim
