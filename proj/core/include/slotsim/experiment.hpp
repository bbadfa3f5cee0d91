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
#include <optional>
#include <vector>

#include "slotsim/metrics.hpp"
#include "slotsim/scenario.hpp"

namespace slotsim {

/// Ego outcome of one seed under two modes.
struct PairedRun {
  std::uint64_t seed{0};
  VehicleMetrics treatment;
  VehicleMetrics baseline;
  bool complete{false};  // the ego finished the corridor in both runs
};

/// Runs every seed once per mode with otherwise identical configuration.
std::vector<PairedRun> run_paired(const ScenarioConfig& config,
                                  const std::vector<std::uint64_t>& seeds, Mode treatment,
                                  Mode baseline);

struct ReductionStats {
  int pairs{0};
  double travel_time{0.0};  // mean relative reduction
  double fuel{0.0};
  double stops_baseline{0.0};
  double stops_treatment{0.0};
  double fuel_lower_share{0.0};
  std::optional<Interval> travel_time_ci;
  std::optional<Interval> fuel_ci;
};

/// Mean reductions over the complete pairs with 95% bootstrap intervals
/// (omitted for a single pair).
ReductionStats summarize_pairs(const std::vector<PairedRun>& runs, int resamples = 10000);

}  // namespace slotsim
