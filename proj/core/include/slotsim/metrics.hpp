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
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "slotsim/vehicle.hpp"

namespace slotsim {

struct StopRule {
  double speed_threshold{0.1};
  double min_duration{1.0};
};

struct VehicleMetrics {
  VehicleId id{-1};
  bool ego{false};
  double spawn_time{0.0};
  std::optional<double> exit_time;
  double travel_time{0.0};
  int stops{0};
  double fuel{0.0};
  double distance{0.0};
  bool completed() const { return exit_time.has_value(); }
};

struct SafetyReport {
  long co_occupancy{0};
  long slot_conflicts{0};
  long release_violations{0};
  long conservation_violations{0};
  long crossings{0};
  double min_crossing_gap{std::numeric_limits<double>::infinity()};
  bool clean() const {
    return co_occupancy == 0 && slot_conflicts == 0 && release_violations == 0 &&
           conservation_violations == 0;
  }
};

struct MetricsSummary {
  std::vector<VehicleMetrics> vehicles;  // ordered by id
  int spawned{0};
  int completed{0};
  int truncated{0};
  double mean_travel_time{0.0};
  double mean_stops{0.0};
  double total_fuel{0.0};
  std::optional<VehicleMetrics> ego;
  SafetyReport safety;
};

/// Per-vehicle travel time, stop count and fuel. Used online by the engine
/// and offline over trace rows; both paths feed `observe` once per tick.
class MetricsAccumulator {
 public:
  explicit MetricsAccumulator(StopRule rule = {}) : rule_(rule) {}

  void spawn(VehicleId id, double t, bool ego = false);
  /// Sample of one vehicle at time `t`, integrated over the step `dt`.
  void observe(VehicleId id, double t, double v, double fuel_rate, double dt);
  void exit(VehicleId id, double t);

  const VehicleMetrics* find(VehicleId id) const;
  MetricsSummary summary() const;

 private:
  struct Track {
    VehicleMetrics m;
    std::optional<double> low_since;
    bool counted{false};
  };
  StopRule rule_;
  std::map<VehicleId, Track> tracks_;
};

/// Number of stops in a speed series sampled every `dt`: runs with
/// v < threshold lasting longer than `min_duration`, each sample held for `dt`.
int count_stops(const std::vector<double>& speeds, double dt, const StopRule& rule = {});

/// (base - treatment) / base; zero when base is zero.
double relative_reduction(double base, double treatment);

double mean(const std::vector<double>& x);
/// Sample standard deviation (n - 1); zero for fewer than two values.
double stddev(const std::vector<double>& x);

struct Interval {
  double lo{0.0};
  double hi{0.0};
};

/// Percentile bootstrap interval of the mean with a fixed resampling seed.
Interval bootstrap_mean_ci(const std::vector<double>& x, int resamples = 10000,
                           std::uint64_t seed = 7919, double level = 0.95);

}  // namespace slotsim
