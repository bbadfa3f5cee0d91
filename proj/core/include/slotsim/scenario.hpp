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
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "slotsim/controller.hpp"
#include "slotsim/fuel.hpp"
#include "slotsim/planner.hpp"
#include "slotsim/road_network.hpp"
#include "slotsim/signals.hpp"
#include "slotsim/v2x_bus.hpp"
#include "slotsim/vehicle.hpp"

namespace slotsim {

inline constexpr int kScenarioSchemaVersion = 1;

enum class Mode { Unsignalized, Baseline };

const char* to_string(Mode m);
Mode parse_mode(const std::string& text);

/// Turn probabilities, indexed by static_cast<int>(Turn).
using TurnMix = std::array<double, 3>;

struct DemandConfig {
  /// Poisson arrival rate per entry approach (veh/s).
  double rate{0.08};
  TurnMix corridor_turns{0.1, 0.8, 0.1};
  TurnMix cross_turns{0.2, 0.6, 0.2};
  /// Spawns are dropped while another vehicle is within this many vehicle
  /// lengths of the entry.
  double clearance_lengths{2.0};
  /// No new NPC spawns after this time (s); unset means the whole run.
  std::optional<double> until;
  VehicleKind npc_kind{VehicleKind::Cav};
};

struct EgoConfig {
  bool enabled{true};
  VehicleKind kind{VehicleKind::Cav};
  /// Spawn time drawn uniformly from [window[0], window[1]].
  std::array<double, 2> spawn_window{10.0, 15.0};
  Heading heading{Heading::North};
  /// Intersection whose approach the ego enters on.
  IntersectionId entry{0};
  double speed{0.0};
  /// Turn at each successive intersection; missing entries go straight.
  std::vector<Turn> turns;
};

/// A vehicle placed explicitly on an approach at a given distance from the
/// stop line.
struct ScriptedVehicle {
  VehicleId id{-1};
  IntersectionId node{0};
  Heading heading{Heading::North};
  std::vector<Turn> turns{Turn::Straight};
  double distance{100.0};
  double speed{0.0};
  double spawn_time{0.0};
  VehicleKind kind{VehicleKind::Cav};
  bool ego{false};
};

struct ScenarioConfig {
  int schema_version{kScenarioSchemaVersion};
  std::string name{"unnamed"};
  Mode mode{Mode::Unsignalized};
  double duration{300.0};
  double dt{0.05};
  std::uint64_t seed{1};
  bool end_on_ego_exit{false};

  NetworkConfig network;
  SignalTiming signals;
  DemandConfig demand;
  PlannerParams planner;
  ControllerParams controller;
  /// Resolved gain table path; empty means the fallback constants.
  std::string gain_table;
  DelayModel delay;
  FollowGuard guard;
  ActuatorLimits limits;
  FuelModel fuel;
  double stale_after{0.5};
  EgoConfig ego;
  std::vector<ScriptedVehicle> vehicles;

  /// Throws ConfigError naming the first offending field.
  void validate() const;
};

/// Parses a scenario document. Relative file references are resolved
/// against `base_dir`. Throws ConfigError.
ScenarioConfig parse_scenario(const std::string& text, const std::string& base_dir = ".");

/// Reads and parses a scenario file. Throws std::runtime_error when the file
/// cannot be opened and ConfigError when its content is invalid.
ScenarioConfig load_scenario(const std::string& path);

/// Serializes back to the file schema (gain table path kept as resolved).
std::string dump_scenario(const ScenarioConfig& config);

/// Built-in presets.
ScenarioConfig corridor_preset();
ScenarioConfig seven_vehicle_preset();
ScenarioConfig two_vehicle_preset();

}  // namespace slotsim
