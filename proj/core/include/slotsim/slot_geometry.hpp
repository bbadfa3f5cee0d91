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

#include <optional>
#include <utility>
#include <vector>

#include "slotsim/planner.hpp"
#include "slotsim/road_network.hpp"
#include "slotsim/v2x_bus.hpp"
#include "slotsim/vehicle.hpp"

namespace slotsim {

enum class SlotAvailability { UnavailableRed, AvailableGreen };

const char* to_string(SlotAvailability a);

/// A reference vehicle's reserved slot projected onto the ego lane.
/// `r_s` is the slot centre; the rectangle spans `l_s` symmetrically.
struct SlotGeometry {
  VehicleId ref_vehicle{-1};
  double r_s{0.0};
  double x_s{0.0};
  double l_s{0.0};
  double w_s{0.0};
  SlotAvailability availability{SlotAvailability::UnavailableRed};
};

/// True once the ego has passed the conflict point, including any stretch
/// of lane it shares with the reference path beyond that point.
bool has_crossed(double ego_r, const ConflictPoint& cp);

/// Places the reference vehicle's slot in the ego path frame so that the slot
/// is as far from the conflict point as the reference vehicle is:
///   r_s = r_i + (d_i - d_j) - delta_ij,  x_s = x_i,  w_s = w_j,
///   l_s = max(l_j, v_target * t_h).
/// Throws std::invalid_argument when `cp` is empty.
SlotGeometry compute_slot(const VehicleState& ego, const Path& ego_path, const VehicleState& ref,
                          const Path& ref_path, const std::optional<ConflictPoint>& cp,
                          double v_target, double t_h);

/// Slots currently shown to one ego, keyed by reference vehicle.
class SlotSet {
 public:
  void upsert(const SlotGeometry& slot);
  /// Removes the slot of `ref`; returns false if it was not present.
  bool reset(VehicleId ref);
  void clear() { slots_.clear(); }
  const std::vector<SlotGeometry>& slots() const { return slots_; }
  bool empty() const { return slots_.empty(); }

 private:
  std::vector<SlotGeometry> slots_;  // sorted by r_s
};

/// Drops the slot of `ref` once the ego has crossed the conflict point.
/// Returns true if a slot was removed.
bool reset_slot(SlotSet& set, VehicleId ref, double ego_r, const ConflictPoint& cp);

/// Free intervals [start, end] of the ego lane within [ego_r, ego_r + horizon]
/// not covered by any red slot rectangle.
std::vector<std::pair<double, double>> available_gaps(const std::vector<SlotGeometry>& slots,
                                                      double ego_r, double horizon);

/// Position of a (possibly stale) sample re-expressed on `target`'s arclength.
/// Handles samples still on the previous path or on a sibling path sharing
/// the approach link. Empty when the two paths are unrelated.
std::optional<double> rebase_position(const RoadNetwork& network, const VehicleState& sample,
                                      PathId target);

struct SlotContext {
  const RoadNetwork& network;
  const Inbox& inbox;
  const SlotPool& pool;
  double t_now{0.0};
  double t_h{1.2};
  double stale_after{0.5};
};

struct ReferenceSlot {
  VehicleId ref{-1};
  PathId path{-1};  // reference vehicle's path at the shared intersection
  int slot{0};
  SlotGeometry geometry;
  double v_ref{0.0};
  double length{4.5};
  double width{1.8};
  double age{0.0};
  bool dead_reckoned{false};
};

struct ReferenceSlots {
  std::vector<ReferenceSlot> slots;  // references the ego has not crossed yet
  std::vector<VehicleId> crossed;
  std::vector<VehicleId> unseen;  // no delivered sample yet
  bool inconsistent{false};       // reference without an active record
};

/// Evaluates the slot of every reference vehicle of `record` from the newest
/// delivered samples.
ReferenceSlots reference_slots(const VehicleState& ego, const ReservationRecord& record,
                               const SlotContext& ctx, double v_target);

}  // namespace slotsim
