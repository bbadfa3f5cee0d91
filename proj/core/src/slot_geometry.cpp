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

#include "slotsim/slot_geometry.hpp"

#include <algorithm>
#include <stdexcept>

namespace slotsim {

const char* to_string(SlotAvailability a) {
  return a == SlotAvailability::UnavailableRed ? "red" : "green";
}

bool has_crossed(double ego_r, const ConflictPoint& cp) {
  return ego_r > cp.arclength_on_i + cp.shared_length;
}

SlotGeometry compute_slot(const VehicleState& ego, const Path& ego_path, const VehicleState& ref,
                          const Path& ref_path, const std::optional<ConflictPoint>& cp,
                          double v_target, double t_h) {
  if (!cp) {
    throw std::invalid_argument("compute_slot called for a non-conflicting pair");
  }
  const double d_i = ego_path.stop_line - ego.r;
  const double d_j = ref_path.stop_line - ref.r;
  SlotGeometry g;
  g.ref_vehicle = ref.id;
  g.r_s = ego.r + (d_i - d_j) - cp->delta_ij;
  g.x_s = ego.x;
  g.w_s = ref.width;
  g.l_s = std::max(ref.length, v_target * t_h);
  g.availability = SlotAvailability::UnavailableRed;
  return g;
}

void SlotSet::upsert(const SlotGeometry& slot) {
  reset(slot.ref_vehicle);
  auto it = std::lower_bound(slots_.begin(), slots_.end(), slot,
                             [](const SlotGeometry& a, const SlotGeometry& b) {
                               if (a.r_s != b.r_s) return a.r_s < b.r_s;
                               return a.ref_vehicle < b.ref_vehicle;
                             });
  slots_.insert(it, slot);
}

bool SlotSet::reset(VehicleId ref) {
  auto it = std::find_if(slots_.begin(), slots_.end(),
                         [ref](const SlotGeometry& s) { return s.ref_vehicle == ref; });
  if (it == slots_.end()) {
    return false;
  }
  slots_.erase(it);
  return true;
}

bool reset_slot(SlotSet& set, VehicleId ref, double ego_r, const ConflictPoint& cp) {
  if (!has_crossed(ego_r, cp)) {
    return false;
  }
  return set.reset(ref);
}

std::vector<std::pair<double, double>> available_gaps(const std::vector<SlotGeometry>& slots,
                                                      double ego_r, double horizon) {
  const double lo = ego_r;
  const double hi = ego_r + horizon;
  std::vector<std::pair<double, double>> red;
  red.reserve(slots.size());
  for (const auto& s : slots) {
    if (s.availability != SlotAvailability::UnavailableRed) continue;
    const double a = std::max(lo, s.r_s - s.l_s / 2.0);
    const double b = std::min(hi, s.r_s + s.l_s / 2.0);
    if (a < b) red.emplace_back(a, b);
  }
  std::sort(red.begin(), red.end());

  std::vector<std::pair<double, double>> gaps;
  double cursor = lo;
  for (const auto& [a, b] : red) {
    if (a > cursor) gaps.emplace_back(cursor, a);
    cursor = std::max(cursor, b);
  }
  if (cursor < hi) gaps.emplace_back(cursor, hi);
  return gaps;
}

std::optional<double> rebase_position(const RoadNetwork& network, const VehicleState& sample,
                                      PathId target) {
  if (sample.path == target) {
    return sample.r;
  }
  const Path& from = network.path(sample.path);
  const Path& to = network.path(target);
  if (from.to_link == to.from_link) {
    return sample.r - from.box_exit;
  }
  if (from.from_link == to.from_link && sample.r <= from.stop_line) {
    return sample.r;
  }
  return std::nullopt;
}

ReferenceSlots reference_slots(const VehicleState& ego, const ReservationRecord& record,
                               const SlotContext& ctx, double v_target) {
  ReferenceSlots out;
  const Path& ego_path = ctx.network.path(ego.path);
  for (VehicleId ref : record.references) {
    const ReservationRecord* ref_record = ctx.pool.find(ref, record.intersection);
    if (ref_record == nullptr) {
      out.inconsistent = true;
      continue;
    }
    const auto& cp = ctx.network.conflict(ego.path, ref_record->path);
    if (!cp) {
      out.inconsistent = true;
      continue;
    }
    if (has_crossed(ego.r, *cp)) {
      out.crossed.push_back(ref);
      continue;
    }
    auto sample = ctx.inbox.latest(ref, ctx.t_now);
    if (!sample) {
      out.unseen.push_back(ref);
      continue;
    }
    auto r_ref = rebase_position(ctx.network, sample->state, ref_record->path);
    if (!r_ref) {
      out.unseen.push_back(ref);
      continue;
    }
    VehicleState ref_state = sample->state;
    ref_state.path = ref_record->path;
    ref_state.r = *r_ref;
    bool dead_reckoned = false;
    if (sample->age > ctx.stale_after) {
      ref_state.r += ref_state.v * sample->age;
      dead_reckoned = true;
    }
    ReferenceSlot rs;
    rs.ref = ref;
    rs.path = ref_record->path;
    rs.slot = ref_record->slot;
    rs.geometry = compute_slot(ego, ego_path, ref_state, ctx.network.path(ref_record->path), cp,
                               v_target, ctx.t_h);
    rs.v_ref = ref_state.v;
    rs.length = ref_state.length;
    rs.width = ref_state.width;
    rs.age = sample->age;
    rs.dead_reckoned = dead_reckoned;
    out.slots.push_back(rs);
  }
  return out;
}

}  // namespace slotsim
