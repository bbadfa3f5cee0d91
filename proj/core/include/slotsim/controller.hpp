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

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "slotsim/planner.hpp"
#include "slotsim/slot_geometry.hpp"
#include "slotsim/vehicle.hpp"

namespace slotsim {

struct ControllerParams {
  double alpha{1.0};
  double k{0.45};
  double gamma{1.0};
  double t_h{1.2};
  double dt{0.05};
  double v_max{15.0};

  void validate() const;
};

struct Gains {
  double k{0.45};
  double gamma{1.0};
};

/// Newest delivered state of the slot being followed, in the ego path frame.
struct LeaderSample {
  double r_slot{0.0};
  double v{0.0};
  double tau{0.0};
};

struct SpeedTarget {
  double value{0.0};  // clamped to [0, v_max]
  double raw{0.0};    // before clamping
};

/// Delayed consensus law:
///   v + (-alpha*k*((r - r_slot + v*(t_h + tau)) + gamma*(v - v_j))) * dt
SpeedTarget target_speed(double r, double v, const LeaderSample& leader,
                         const ControllerParams& params, const Gains& gains);

/// Gap term r - r_slot + v*(t_h + tau); zero at the desired spacing.
double position_error(double r, double v, const LeaderSample& leader, double t_h);

/// (k, gamma) over a 3-D grid of initial conditions, trilinearly
/// interpolated. Values are stored with the gap axis varying fastest.
class GainTable {
 public:
  GainTable() = default;
  GainTable(std::vector<double> v_ego, std::vector<double> v_leader, std::vector<double> gap,
            std::vector<Gains> values);

  /// Reads {"v_ego": [...], "v_leader": [...], "gap": [...], "k": [...],
  /// "gamma": [...]}. Throws ConfigError.
  static GainTable from_json_text(const std::string& text);
  static GainTable load(const std::string& path);

  bool empty() const { return values_.empty(); }
  const std::vector<double>& v_ego_axis() const { return axes_[0]; }
  const std::vector<double>& v_leader_axis() const { return axes_[1]; }
  const std::vector<double>& gap_axis() const { return axes_[2]; }
  const Gains& at(std::size_t i, std::size_t j, std::size_t g) const;
  Gains interpolate(double v_ego, double v_leader, double gap) const;

 private:
  std::array<std::vector<double>, 3> axes_;
  std::vector<Gains> values_;
};

/// Clamped trilinear lookup; an empty table yields `fallback` with a warning.
Gains lookup_gains(const GainTable& table, double v_ego0, double v_leader0, double gap0,
                   const Gains& fallback);

enum class ControlMode { FreeDrive, Follow, Hold };

const char* to_string(ControlMode m);

struct ControlDecision {
  DriveCommand command;
  ControlMode mode{ControlMode::FreeDrive};
  SpeedTarget target;
  std::optional<VehicleId> leader;
  double r_slot{0.0};
  Gains gains;
  /// Set when the initial conditions were captured on this call.
  std::optional<InitialConditions> captured;
  bool fault{false};
};

/// Speed command of a reserved CAV. Follows the leading reference (highest
/// slot among uncrossed references, ties toward the nearest slot); every
/// other uncrossed reference slot also bounds the target. No reference left
/// means free driving at v_max. A missing leader sample or an inconsistent
/// pool holds the current speed and raises `fault`.
ControlDecision step_controller(const VehicleState& ego, const ReservationRecord& record,
                                const ReferenceSlots& refs, const ControllerParams& params,
                                const GainTable& table);

}  // namespace slotsim
