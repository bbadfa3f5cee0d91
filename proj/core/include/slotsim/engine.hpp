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

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <vector>

#include "slotsim/ar_projection.hpp"
#include "slotsim/controller.hpp"
#include "slotsim/metrics.hpp"
#include "slotsim/planner.hpp"
#include "slotsim/road_network.hpp"
#include "slotsim/scenario.hpp"
#include "slotsim/signals.hpp"
#include "slotsim/slot_geometry.hpp"
#include "slotsim/v2x_bus.hpp"
#include "slotsim/vehicle.hpp"

namespace slotsim {

inline constexpr VehicleId kEgoId = 0;

struct TraceRow {
  double t{0.0};
  VehicleId vehicle{-1};
  IntersectionId node{-1};
  double r{0.0};
  double v{0.0};
  double a{0.0};
  int slot{0};
  double d_arrival{0.0};
  double fuel_rate{0.0};
};

class TraceSink {
 public:
  virtual ~TraceSink() = default;
  virtual void write(const TraceRow& row) = 0;
  virtual void flush() {}
};

/// Collects rows in memory.
class TraceBuffer : public TraceSink {
 public:
  void write(const TraceRow& row) override { rows.push_back(row); }
  std::vector<TraceRow> rows;
};

enum class ReservationEventKind { Reserved, Released };

struct ReservationEvent {
  ReservationEventKind kind{ReservationEventKind::Reserved};
  double t{0.0};
  VehicleId vehicle{-1};
  IntersectionId node{-1};
  int slot{0};
  std::vector<VehicleId> references;
};

/// Who drives the ego.
enum class EgoDriver {
  Automated,  // same controller stack as the other CAVs
  Pedal,      // latched throttle/brake from `set_ego_input`
};

struct EngineOptions {
  EgoDriver ego_driver{EgoDriver::Automated};
  /// Id of the n-th randomly spawned vehicle. Defaults to consecutive ids
  /// above every scripted id.
  std::function<VehicleId(int)> labeler;
};

struct Agent {
  VehicleState state;
  int ordinal{0};  // spawn order
  bool ego{false};
  std::vector<Turn> route;  // turn at each successive intersection
  std::size_t leg{0};
  double spawned_at{0.0};
  double fuel_rate{0.0};
  ControlMode mode{ControlMode::FreeDrive};
  double target{0.0};
  double raw_target{0.0};
  std::optional<VehicleId> leader;
  bool fault{false};
  bool stale_reference{false};
  SlotSet slots;  // HMI slot set at the current intersection
};

/// Deterministic fixed-step corridor simulation. Owns all mutable state and
/// steps single-threaded; identical (config, seed, options, inputs) give
/// identical traces.
class Engine {
 public:
  /// Validates `config` and builds the network. Throws ConfigError.
  explicit Engine(const ScenarioConfig& config, std::optional<std::uint64_t> seed = std::nullopt,
                  EngineOptions options = {});

  void set_trace_sink(TraceSink* sink) { sink_ = sink; }
  /// Advances one tick; returns false if the run had already finished.
  bool step();
  void run();
  bool finished() const { return finished_; }

  long tick() const { return tick_; }
  double time() const { return static_cast<double>(tick_) * cfg_.dt; }
  long total_ticks() const { return total_ticks_; }
  std::uint64_t seed() const { return seed_; }

  const ScenarioConfig& config() const { return cfg_; }
  const RoadNetwork& network() const { return network_; }
  const SlotPool& pool() const { return pool_; }
  const std::vector<Agent>& agents() const { return agents_; }
  const Agent* agent(VehicleId id) const;
  const Agent* ego() const;
  bool ego_exited() const { return ego_exited_; }

  void set_ego_input(const PedalInput& input) { ego_input_ = input; }
  const PedalInput& ego_input() const { return ego_input_; }

  SignalPhase phase(IntersectionId node, Heading heading) const;
  /// World pose of a vehicle from its path position and lateral offset.
  Pose2 pose_of(const VehicleState& state) const;

  const std::vector<ReservationEvent>& reservation_log() const { return events_; }
  const SafetyReport& safety() const { return safety_; }
  MetricsSummary summary() const;

 private:
  struct Source {
    IntersectionId node{0};
    Heading heading{Heading::North};
    double next_arrival{0.0};
  };
  struct BoxConflict {
    PathId other{-1};
    double s{0.0};  // conflict arclength on this path
  };
  struct LaneEntry {
    std::size_t agent{0};
    double pos{0.0};
  };

  void spawn_due(double t);
  bool entry_clear(LinkId link, double length) const;
  double entry_speed(LinkId link, double v_limit) const;
  Agent& add_agent(VehicleId id, bool ego, PathId path, double r, double v, VehicleKind kind,
                   std::vector<Turn> route, double t);
  std::vector<Turn> draw_route(Heading heading);

  void index_lanes();
  void planner_tick(double t);
  std::optional<std::size_t> predecessor(std::size_t idx) const;
  DriveCommand decide(std::size_t idx, double t);
  double leader_guard(std::size_t idx) const;
  double signal_guard(const Agent& ag, double t) const;
  double slot_guard(const Agent& ag, const ReferenceSlot& rs) const;
  void record_passages(const Agent& ag, double r_prev, double t);
  void audit(double t);

  ScenarioConfig cfg_;
  EngineOptions options_;
  std::uint64_t seed_{0};
  RoadNetwork network_;
  GainTable gains_;
  V2xBus bus_;
  Inbox inbox_;
  SlotPool pool_;
  MetricsAccumulator metrics_;
  SafetyReport safety_;
  std::vector<ReservationEvent> events_;

  std::mt19937_64 spawn_rng_;
  std::mt19937_64 route_rng_;
  std::mt19937_64 bus_rng_;

  std::vector<Agent> agents_;
  std::vector<Source> sources_;
  std::vector<ScriptedVehicle> scripted_;  // pending, by spawn time
  std::optional<double> ego_spawn_at_;
  int next_ordinal_{0};
  int random_count_{0};
  VehicleId random_base_{1};
  int spawned_{0};
  int exited_{0};

  std::vector<std::vector<BoxConflict>> box_conflicts_;  // by path
  std::vector<std::vector<PathId>> paths_from_link_;
  std::vector<std::vector<PathId>> paths_to_link_;
  std::vector<std::vector<LaneEntry>> on_link_;
  std::vector<std::vector<LaneEntry>> in_box_;
  std::map<std::pair<PathId, PathId>, std::vector<double>> passages_;
  std::map<std::pair<VehicleId, VehicleId>, bool> co_occupied_;

  TraceSink* sink_{nullptr};
  PedalInput ego_input_;
  long tick_{0};
  long total_ticks_{0};
  bool finished_{false};
  bool ego_exited_{false};
  bool has_ego_{false};
};

struct RunResult {
  MetricsSummary summary;
  std::vector<ReservationEvent> events;
  long ticks{0};
};

/// Runs a scenario to completion.
RunResult run_scenario(const ScenarioConfig& config, std::optional<std::uint64_t> seed = {},
                       TraceSink* sink = nullptr, EngineOptions options = {});

}  // namespace slotsim
