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

#include "slotsim/planner.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "slotsim/errors.hpp"

namespace slotsim {

const std::map<VehicleId, ReservationRecord> SlotPool::kEmpty{};

void PlannerParams::validate() const {
  if (!(t_h > 0.0)) throw ConfigError("planner.t_h", "must be positive");
  if (!(t_theta > 0.0)) throw ConfigError("planner.t_theta", "must be positive");
  if (!(d_theta > 0.0)) throw ConfigError("planner.d_theta", "must be positive");
  if (!(v_floor > 0.0)) throw ConfigError("planner.v_floor", "must be positive");
}

const ReservationRecord* SlotPool::find(VehicleId vehicle, IntersectionId node) const {
  auto it = records_.find(node);
  if (it == records_.end()) return nullptr;
  auto jt = it->second.find(vehicle);
  return jt == it->second.end() ? nullptr : &jt->second;
}

ReservationRecord* SlotPool::find(VehicleId vehicle, IntersectionId node) {
  auto it = records_.find(node);
  if (it == records_.end()) return nullptr;
  auto jt = it->second.find(vehicle);
  return jt == it->second.end() ? nullptr : &jt->second;
}

const std::map<VehicleId, ReservationRecord>& SlotPool::active(IntersectionId node) const {
  auto it = records_.find(node);
  return it == records_.end() ? kEmpty : it->second;
}

void SlotPool::insert(ReservationRecord record) {
  const auto node = record.intersection;
  const auto id = record.vehicle;
  records_[node][id] = std::move(record);
}

bool SlotPool::erase(VehicleId vehicle, IntersectionId node) {
  auto it = records_.find(node);
  if (it == records_.end() || it->second.erase(vehicle) == 0) {
    return false;
  }
  for (auto& [other, rec] : it->second) {
    rec.references.erase(vehicle);
  }
  return true;
}

std::size_t SlotPool::size() const {
  std::size_t n = 0;
  for (const auto& [node, recs] : records_) n += recs.size();
  return n;
}

std::vector<IntersectionId> SlotPool::held_by(VehicleId vehicle) const {
  std::vector<IntersectionId> out;
  for (const auto& [node, recs] : records_) {
    if (recs.count(vehicle) != 0) out.push_back(node);
  }
  return out;
}

double estimate_eta(double v, double a, double d, double v_limit, double v_floor) {
  if (d < 0.0) {
    throw std::invalid_argument(fmt::format("distance to arrival {} is negative", d));
  }
  if (d == 0.0) {
    return 0.0;
  }
  constexpr double kFlat = 1e-6;
  if (std::abs(a) < kFlat) {
    return d / std::max(v, v_floor);
  }
  if (a > 0.0) {
    if (v >= v_limit) {
      return d / std::max(v, v_floor);
    }
    const double t_acc = (v_limit - v) / a;
    const double d_acc = v * t_acc + 0.5 * a * t_acc * t_acc;
    if (d_acc >= d) {
      return (-v + std::sqrt(v * v + 2.0 * a * d)) / a;
    }
    return t_acc + (d - d_acc) / v_limit;
  }
  // Braking: arrives only if the stopping distance covers d.
  const double b = -a;
  const double d_stop = v * v / (2.0 * b);
  if (d_stop >= d) {
    return (v - std::sqrt(std::max(0.0, v * v - 2.0 * b * d))) / b;
  }
  return d / v_floor;
}

double eta_with_predecessor(double t_i, std::optional<double> t_pred, double t_h,
                            PredecessorRule rule) {
  if (!t_pred) {
    return t_i;
  }
  const double bound = *t_pred + t_h;
  return rule == PredecessorRule::Min ? std::min(t_i, bound) : std::max(t_i, bound);
}

int slot_pool_max(const SlotPool& pool, IntersectionId node,
                  const std::vector<VehicleId>& conflicting) {
  int best = 0;
  const auto& recs = pool.active(node);
  for (VehicleId id : conflicting) {
    auto it = recs.find(id);
    if (it != recs.end()) {
      best = std::max(best, it->second.slot);
    }
  }
  return best;
}

std::optional<ReservationRecord> maybe_reserve(const ReservationRequest& request,
                                               const EtaEstimate& eta,
                                               const PlannerParams& params, SlotPool& pool,
                                               const RoadNetwork& network, double t_now) {
  const Path& path = network.path(request.path);
  if (distance_to_arrival(path, request.r) < 0.0) {
    throw std::invalid_argument(
        fmt::format("vehicle {} is past the stop line of {}", request.vehicle, path.name));
  }
  const IntersectionId node = path.intersection;
  if (pool.find(request.vehicle, node) != nullptr) {
    return std::nullopt;
  }
  if (request.predecessor && pool.find(*request.predecessor, node) == nullptr) {
    return std::nullopt;
  }
  if (!(eta.t <= params.t_theta || eta.d <= params.d_theta)) {
    return std::nullopt;
  }

  std::vector<VehicleId> conflicting;
  for (const auto& [other, rec] : pool.active(node)) {
    if (other != request.vehicle && network.conflicts(request.path, rec.path)) {
      conflicting.push_back(other);
    }
  }

  ReservationRecord record;
  record.vehicle = request.vehicle;
  record.intersection = node;
  record.path = request.path;
  record.slot = slot_pool_max(pool, node, conflicting) + 1;
  record.references.insert(conflicting.begin(), conflicting.end());
  record.assigned_at = t_now;
  pool.insert(record);
  return record;
}

void release_on_exit(VehicleId vehicle, IntersectionId node, SlotPool& pool) {
  if (!pool.erase(vehicle, node)) {
    spdlog::warn("release of vehicle {} at intersection {}: no active reservation", vehicle, node);
  }
}

}  // namespace slotsim
