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

#include <map>
#include <optional>
#include <set>
#include <vector>

#include "slotsim/road_network.hpp"
#include "slotsim/vehicle.hpp"

namespace slotsim {

/// Which combination the same-lane predecessor rule uses.
///   Min: t_i = min(t_i, t_j + t_h), as written in the reservation pseudocode.
///   Max: t_i = max(t_i, t_j + t_h), a follower never arrives before its
///        predecessor plus one headway.
enum class PredecessorRule { Min, Max };

struct PlannerParams {
  double t_h{1.2};
  double t_theta{10.0};
  double d_theta{150.0};
  double v_floor{0.5};
  PredecessorRule predecessor_rule{PredecessorRule::Min};

  void validate() const;
};

struct EtaEstimate {
  double t{0.0};
  double d{0.0};
  double computed_at{0.0};
};

/// Initial conditions captured when the slot is assigned; the gain lookup
/// is keyed on them.
struct InitialConditions {
  double v_ego{0.0};
  double v_leader{0.0};
  double spacing{0.0};  // r_ego(0) - r_slot(0) in the ego path frame
};

struct ReservationRecord {
  VehicleId vehicle{-1};
  IntersectionId intersection{-1};
  PathId path{-1};
  int slot{0};
  std::set<VehicleId> references;
  double assigned_at{0.0};
  std::optional<InitialConditions> initial;
};

/// Active reservations, keyed per intersection. Single owner: mutated only by
/// the planner tick.
class SlotPool {
 public:
  const ReservationRecord* find(VehicleId vehicle, IntersectionId node) const;
  ReservationRecord* find(VehicleId vehicle, IntersectionId node);
  const std::map<VehicleId, ReservationRecord>& active(IntersectionId node) const;

  void insert(ReservationRecord record);
  /// Removes the record and unlinks the vehicle from every other record's
  /// reference set at that intersection. Returns false if nothing was held.
  bool erase(VehicleId vehicle, IntersectionId node);
  std::size_t size() const;
  /// Intersections where `vehicle` currently holds a slot.
  std::vector<IntersectionId> held_by(VehicleId vehicle) const;

 private:
  std::map<IntersectionId, std::map<VehicleId, ReservationRecord>> records_;
  static const std::map<VehicleId, ReservationRecord> kEmpty;
};

/// Constant-acceleration arrival time capped at `v_limit`.
/// Throws std::invalid_argument when d < 0 (already past the stop line).
double estimate_eta(double v, double a, double d, double v_limit, double v_floor = 0.5);

/// Applies the same-lane predecessor rule; no predecessor leaves t_i unchanged.
double eta_with_predecessor(double t_i, std::optional<double> t_pred, double t_h,
                            PredecessorRule rule = PredecessorRule::Min);

/// Highest slot among active records at `node` belonging to `conflicting`.
int slot_pool_max(const SlotPool& pool, IntersectionId node,
                  const std::vector<VehicleId>& conflicting);

/// Planner view of one vehicle for a reservation attempt.
struct ReservationRequest {
  VehicleId vehicle{-1};
  PathId path{-1};
  double r{0.0};
  /// Immediate predecessor on the same approach link, if any.
  std::optional<VehicleId> predecessor;
};

/// Dual-trigger slot reservation. Fires when eta.t <= t_theta or
/// eta.d <= d_theta; assigns max(conflicting slots) + 1 and links every
/// conflicting holder as a reference. Returns the new record (already stored
/// in the pool) or empty when no trigger fired, the vehicle already holds a
/// slot here, or its predecessor has not reserved yet.
/// Throws std::invalid_argument when the vehicle is past its stop line.
std::optional<ReservationRecord> maybe_reserve(const ReservationRequest& request,
                                               const EtaEstimate& eta,
                                               const PlannerParams& params, SlotPool& pool,
                                               const RoadNetwork& network, double t_now);

/// Resets the vehicle's slot at `node` and disconnects its references.
/// Releasing a missing record is a logged no-op.
void release_on_exit(VehicleId vehicle, IntersectionId node, SlotPool& pool);

}  // namespace slotsim
