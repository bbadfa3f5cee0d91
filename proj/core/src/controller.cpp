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

#include "slotsim/controller.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "slotsim/errors.hpp"

namespace slotsim {

void ControllerParams::validate() const {
  if (alpha != 0.0 && alpha != 1.0) throw ConfigError("controller.alpha", "must be 0 or 1");
  if (!(k > 0.0)) throw ConfigError("controller.k", "must be positive");
  if (!(gamma > 0.0)) throw ConfigError("controller.gamma", "must be positive");
  if (!(t_h > 0.0)) throw ConfigError("controller.t_h", "must be positive");
  if (!(dt > 0.0)) throw ConfigError("controller.dt", "must be positive");
  if (!(v_max > 0.0)) throw ConfigError("controller.v_max", "must be positive");
}

double position_error(double r, double v, const LeaderSample& leader, double t_h) {
  return r - leader.r_slot + v * (t_h + leader.tau);
}

SpeedTarget target_speed(double r, double v, const LeaderSample& leader,
                         const ControllerParams& params, const Gains& gains) {
  const double e_pos = position_error(r, v, leader, params.t_h);
  const double e_vel = v - leader.v;
  const double u = -params.alpha * gains.k * (e_pos + gains.gamma * e_vel);
  SpeedTarget out;
  out.raw = v + u * params.dt;
  out.value = std::clamp(out.raw, 0.0, params.v_max);
  return out;
}

GainTable::GainTable(std::vector<double> v_ego, std::vector<double> v_leader,
                     std::vector<double> gap, std::vector<Gains> values)
    : axes_{std::move(v_ego), std::move(v_leader), std::move(gap)}, values_(std::move(values)) {
  static const char* names[3] = {"gains.v_ego", "gains.v_leader", "gains.gap"};
  std::size_t cells = 1;
  for (int a = 0; a < 3; ++a) {
    const auto& axis = axes_[a];
    if (axis.empty()) throw ConfigError(names[a], "axis is empty");
    for (std::size_t i = 1; i < axis.size(); ++i) {
      if (!(axis[i] > axis[i - 1])) throw ConfigError(names[a], "axis must be strictly increasing");
    }
    cells *= axis.size();
  }
  if (values_.size() != cells) {
    throw ConfigError("gains.k", fmt::format("expected {} cells, got {}", cells, values_.size()));
  }
  for (const auto& g : values_) {
    if (!(g.k > 0.0) || !(g.gamma > 0.0)) {
      throw ConfigError("gains.k", "all gains must be positive");
    }
  }
}

GainTable GainTable::from_json_text(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("gains", e.what());
  }
  auto axis = [&](const char* key) {
    if (!j.contains(key) || !j[key].is_array()) {
      throw ConfigError(fmt::format("gains.{}", key), "missing array");
    }
    return j[key].get<std::vector<double>>();
  };
  auto v_ego = axis("v_ego");
  auto v_leader = axis("v_leader");
  auto gap = axis("gap");
  auto k = axis("k");
  auto gamma = axis("gamma");
  if (k.size() != gamma.size()) {
    throw ConfigError("gains.gamma", "k and gamma sizes differ");
  }
  std::vector<Gains> values(k.size());
  for (std::size_t i = 0; i < k.size(); ++i) values[i] = {k[i], gamma[i]};
  return GainTable(std::move(v_ego), std::move(v_leader), std::move(gap), std::move(values));
}

GainTable GainTable::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("gains", fmt::format("cannot open {}", path));
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str());
}

const Gains& GainTable::at(std::size_t i, std::size_t j, std::size_t g) const {
  return values_.at((i * axes_[1].size() + j) * axes_[2].size() + g);
}

namespace {

// Lower cell index and weight of the upper neighbour after clamping.
std::pair<std::size_t, double> locate(const std::vector<double>& axis, double x) {
  if (axis.size() == 1 || x <= axis.front()) return {0, 0.0};
  if (x >= axis.back()) return {axis.size() - 2, 1.0};
  auto it = std::upper_bound(axis.begin(), axis.end(), x);
  const std::size_t hi = static_cast<std::size_t>(it - axis.begin());
  const std::size_t lo = hi - 1;
  return {lo, (x - axis[lo]) / (axis[hi] - axis[lo])};
}

}  // namespace

Gains GainTable::interpolate(double v_ego, double v_leader, double gap) const {
  const auto [i0, wi] = locate(axes_[0], v_ego);
  const auto [j0, wj] = locate(axes_[1], v_leader);
  const auto [g0, wg] = locate(axes_[2], gap);
  const std::size_t i1 = std::min(i0 + 1, axes_[0].size() - 1);
  const std::size_t j1 = std::min(j0 + 1, axes_[1].size() - 1);
  const std::size_t g1 = std::min(g0 + 1, axes_[2].size() - 1);

  Gains out{0.0, 0.0};
  for (int di = 0; di < 2; ++di) {
    for (int dj = 0; dj < 2; ++dj) {
      for (int dg = 0; dg < 2; ++dg) {
        const double w = (di ? wi : 1.0 - wi) * (dj ? wj : 1.0 - wj) * (dg ? wg : 1.0 - wg);
        if (w == 0.0) continue;
        const Gains& c = at(di ? i1 : i0, dj ? j1 : j0, dg ? g1 : g0);
        out.k += w * c.k;
        out.gamma += w * c.gamma;
      }
    }
  }
  return out;
}

Gains lookup_gains(const GainTable& table, double v_ego0, double v_leader0, double gap0,
                   const Gains& fallback) {
  if (table.empty()) {
    spdlog::debug("gain table is empty, using k={} gamma={}", fallback.k, fallback.gamma);
    return fallback;
  }
  return table.interpolate(v_ego0, v_leader0, gap0);
}

const char* to_string(ControlMode m) {
  switch (m) {
    case ControlMode::FreeDrive:
      return "free";
    case ControlMode::Follow:
      return "follow";
    case ControlMode::Hold:
      return "hold";
  }
  return "?";
}

ControlDecision step_controller(const VehicleState& ego, const ReservationRecord& record,
                                const ReferenceSlots& refs, const ControllerParams& params,
                                const GainTable& table) {
  ControlDecision out;
  const Gains fallback{params.k, params.gamma};

  if (refs.inconsistent) {
    spdlog::warn("vehicle {}: reference without a reservation at intersection {}", ego.id,
                 record.intersection);
    out.fault = true;
  }

  const ReferenceSlot* leader = nullptr;
  for (const auto& rs : refs.slots) {
    if (leader == nullptr || rs.slot > leader->slot ||
        (rs.slot == leader->slot && rs.geometry.r_s < leader->geometry.r_s)) {
      leader = &rs;
    }
  }

  if (leader == nullptr) {
    if (!refs.unseen.empty() || out.fault) {
      out.fault = true;
      out.mode = ControlMode::Hold;
      out.target = {ego.v, ego.v};
    } else {
      out.mode = ControlMode::FreeDrive;
      out.target = {params.v_max, params.v_max};
    }
    out.gains = fallback;
    out.command = DriveCommand::speed(out.target.value);
    return out;
  }

  InitialConditions init;
  if (record.initial) {
    init = *record.initial;
  } else {
    init = {ego.v, leader->v_ref, ego.r - leader->geometry.r_s};
    out.captured = init;
  }
  out.gains = lookup_gains(table, init.v_ego, init.v_leader, init.spacing, fallback);

  out.mode = ControlMode::Follow;
  out.leader = leader->ref;
  out.r_slot = leader->geometry.r_s;
  out.target = target_speed(ego.r, ego.v, {leader->geometry.r_s, leader->v_ref, leader->age},
                            params, out.gains);
  for (const auto& rs : refs.slots) {
    if (&rs == leader) continue;
    const auto t =
        target_speed(ego.r, ego.v, {rs.geometry.r_s, rs.v_ref, rs.age}, params, out.gains);
    if (t.raw < out.target.raw) out.target = t;
  }
  if (!refs.unseen.empty() && ego.v < out.target.value) {
    out.target = {ego.v, ego.v};
    out.mode = ControlMode::Hold;
  }
  if (out.fault && ego.v < out.target.value) {
    out.target = {ego.v, ego.v};
    out.mode = ControlMode::Hold;
  }
  out.command = DriveCommand::speed(out.target.value);
  return out;
}

}  // namespace slotsim
