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

#include <variant>

#include "slotsim/road_network.hpp"

namespace slotsim {

using VehicleId = int;

enum class VehicleKind { Human, Cav };

/// Kinematic truth of one vehicle. `r` is the arclength of the vehicle centre
/// along its current path; `x` the lateral offset from the lane centre.
struct VehicleState {
  VehicleId id{-1};
  PathId path{-1};
  double r{0.0};
  double x{0.0};
  double v{0.0};
  double a{0.0};
  double length{4.5};
  double width{1.8};
  VehicleKind kind{VehicleKind::Cav};
};

struct ActuatorLimits {
  double a_min{-4.0};
  double a_max{3.0};
  double v_max{15.0};
};

enum class CommandSource { Controller, Human, Script };

struct TargetAccel {
  double value{0.0};
};
struct TargetSpeed {
  double value{0.0};
};

/// Exactly one of a target acceleration or a target speed.
struct DriveCommand {
  std::variant<TargetAccel, TargetSpeed> target{TargetAccel{}};
  CommandSource source{CommandSource::Controller};

  static DriveCommand accel(double a, CommandSource src = CommandSource::Controller) {
    return {TargetAccel{a}, src};
  }
  static DriveCommand speed(double v, CommandSource src = CommandSource::Controller) {
    return {TargetSpeed{v}, src};
  }
};

/// Acceleration the integrator will apply for `cmd`, clamped to the limits.
/// Non-finite commands resolve to zero (coast).
double resolve_acceleration(const VehicleState& state, const DriveCommand& cmd, double dt,
                            const ActuatorLimits& limits);

/// Advances one fixed step. Speed stays within [0, v_max] and the vehicle
/// never reverses; a non-finite command is rejected (coast) and logged.
VehicleState step_vehicle(const VehicleState& state, const DriveCommand& cmd, double dt,
                          const ActuatorLimits& limits);

struct PedalInput {
  double throttle{0.0};
  double brake{0.0};
  double steering{0.0};  // accepted, ignored: longitudinal model only
};

/// Linear pedal map: a = throttle * a_max - brake * |a_min|.
DriveCommand human_input_adapter(PedalInput raw, const ActuatorLimits& limits);

/// Gap-based safe-speed bound used underneath every automated and scripted
/// driver. Follows the Krauss safe-speed form.
struct FollowGuard {
  double decel{4.0};
  double reaction_time{0.5};
  double standstill_gap{2.0};
};

/// Highest speed from which the follower can still stop behind a leader that
/// brakes at `guard.decel`. `gap` is the bumper-to-bumper distance.
double safe_follow_speed(double gap, double v_leader, const FollowGuard& guard);

}  // namespace slotsim
