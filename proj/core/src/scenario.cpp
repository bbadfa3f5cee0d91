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

#include "slotsim/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "slotsim/errors.hpp"

namespace slotsim {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

template <typename T>
T read(const json& obj, const char* key, T fallback, const std::string& prefix) {
  if (!obj.contains(key) || obj[key].is_null()) return fallback;
  try {
    return obj[key].get<T>();
  } catch (const json::exception&) {
    throw ConfigError(prefix + key, fmt::format("unexpected type ({})", obj[key].type_name()));
  }
}

const json& section(const json& root, const char* key) {
  static const json kEmpty = json::object();
  if (!root.contains(key)) return kEmpty;
  if (!root[key].is_object()) throw ConfigError(key, "must be an object");
  return root[key];
}

Heading parse_heading(const std::string& s, const std::string& field) {
  if (s == "north" || s == "N") return Heading::North;
  if (s == "south" || s == "S") return Heading::South;
  if (s == "east" || s == "E") return Heading::East;
  if (s == "west" || s == "W") return Heading::West;
  throw ConfigError(field, fmt::format("unknown heading '{}'", s));
}

const char* heading_key(Heading h) {
  switch (h) {
    case Heading::North:
      return "north";
    case Heading::South:
      return "south";
    case Heading::East:
      return "east";
    case Heading::West:
      return "west";
  }
  return "?";
}

Turn parse_turn(const std::string& s, const std::string& field) {
  if (s == "left" || s == "L") return Turn::Left;
  if (s == "straight" || s == "S") return Turn::Straight;
  if (s == "right" || s == "R") return Turn::Right;
  throw ConfigError(field, fmt::format("unknown turn '{}'", s));
}

const char* turn_key(Turn t) {
  switch (t) {
    case Turn::Left:
      return "left";
    case Turn::Straight:
      return "straight";
    case Turn::Right:
      return "right";
  }
  return "?";
}

VehicleKind parse_kind(const std::string& s, const std::string& field) {
  if (s == "cav") return VehicleKind::Cav;
  if (s == "human") return VehicleKind::Human;
  throw ConfigError(field, fmt::format("unknown vehicle kind '{}'", s));
}

const char* kind_key(VehicleKind k) { return k == VehicleKind::Cav ? "cav" : "human"; }

std::vector<Turn> parse_turns(const json& obj, const char* key, const std::string& field,
                              std::vector<Turn> fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_array()) throw ConfigError(field, "must be an array of turns");
  std::vector<Turn> out;
  for (const auto& t : obj[key]) {
    if (!t.is_string()) throw ConfigError(field, "turns must be strings");
    out.push_back(parse_turn(t.get<std::string>(), field));
  }
  return out;
}

TurnMix parse_mix(const json& obj, const char* key, TurnMix fallback, const std::string& field) {
  if (!obj.contains(key)) return fallback;
  const json& m = obj[key];
  if (!m.is_object()) throw ConfigError(field, "must be an object with left/straight/right");
  TurnMix mix{read<double>(m, "left", 0.0, field + "."), read<double>(m, "straight", 0.0, field + "."),
              read<double>(m, "right", 0.0, field + ".")};
  return mix;
}

void check_mix(const TurnMix& mix, const char* field) {
  double sum = 0.0;
  for (double p : mix) {
    if (!(p >= 0.0)) throw ConfigError(field, "probabilities must be non-negative");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw ConfigError(field, fmt::format("probabilities must sum to 1 (got {})", sum));
  }
}

std::string resolve_path(const std::string& ref, const std::string& base_dir) {
  if (ref.empty()) return ref;
  std::filesystem::path p(ref);
  if (p.is_absolute()) return p.lexically_normal().string();
  return (std::filesystem::path(base_dir) / p).lexically_normal().string();
}

}  // namespace

const char* to_string(Mode m) { return m == Mode::Unsignalized ? "unsignalized" : "baseline"; }

Mode parse_mode(const std::string& text) {
  if (text == "unsignalized") return Mode::Unsignalized;
  if (text == "baseline" || text == "baseline_signals") return Mode::Baseline;
  throw ConfigError("mode", fmt::format("unknown mode '{}'", text));
}

void ScenarioConfig::validate() const {
  if (schema_version != kScenarioSchemaVersion) {
    throw ConfigError("schema_version", fmt::format("unsupported version {} (expected {})",
                                                    schema_version, kScenarioSchemaVersion));
  }
  if (!(dt > 0.0 && dt <= 0.1)) throw ConfigError("dt", "must lie in (0, 0.1]");
  if (!(duration > 0.0)) throw ConfigError("duration", "must be positive");
  network.validate();
  if (!(demand.rate >= 0.0)) throw ConfigError("demand.rate", "must be non-negative");
  if (!(demand.clearance_lengths >= 0.0)) {
    throw ConfigError("demand.clearance_lengths", "must be non-negative");
  }
  check_mix(demand.corridor_turns, "demand.corridor_turns");
  check_mix(demand.cross_turns, "demand.cross_turns");
  signals.validate();
  planner.validate();
  controller.validate();
  delay.validate();
  fuel.validate();
  if (!(limits.a_min < 0.0)) throw ConfigError("limits.a_min", "must be negative");
  if (!(limits.a_max > 0.0)) throw ConfigError("limits.a_max", "must be positive");
  if (!(limits.v_max > 0.0)) throw ConfigError("limits.v_max", "must be positive");
  if (!(guard.decel > 0.0)) throw ConfigError("guard.decel", "must be positive");
  if (!(guard.reaction_time >= 0.0)) throw ConfigError("guard.reaction_time", "must be >= 0");
  if (!(stale_after > 0.0)) throw ConfigError("stale_after", "must be positive");
  if (std::abs(controller.dt - dt) > 1e-12) {
    throw ConfigError("controller.dt", "must equal the simulation step dt");
  }
  if (ego.enabled) {
    if (!(ego.spawn_window[0] >= 0.0 && ego.spawn_window[1] >= ego.spawn_window[0])) {
      throw ConfigError("ego.spawn_window", "must be an increasing pair of non-negative times");
    }
    if (ego.entry < 0 || ego.entry >= network.intersections) {
      throw ConfigError("ego.entry", "no such intersection");
    }
    if (!(ego.speed >= 0.0)) throw ConfigError("ego.speed", "must be non-negative");
  }
  int egos = ego.enabled ? 1 : 0;
  std::vector<VehicleId> ids;
  for (std::size_t i = 0; i < vehicles.size(); ++i) {
    const auto& v = vehicles[i];
    const std::string f = fmt::format("vehicles[{}]", i);
    if (v.id < 0) throw ConfigError(f + ".id", "must be non-negative");
    if (v.node < 0 || v.node >= network.intersections) {
      throw ConfigError(f + ".node", "no such intersection");
    }
    if (v.turns.empty()) throw ConfigError(f + ".turns", "needs at least one turn");
    if (!(v.distance >= 0.0)) throw ConfigError(f + ".distance", "must be non-negative");
    if (!(v.speed >= 0.0)) throw ConfigError(f + ".speed", "must be non-negative");
    if (!(v.spawn_time >= 0.0)) throw ConfigError(f + ".spawn_time", "must be non-negative");
    if (v.ego) ++egos;
    ids.push_back(v.id);
  }
  if (egos > 1) throw ConfigError("ego", "at most one ego vehicle");
  std::sort(ids.begin(), ids.end());
  if (std::adjacent_find(ids.begin(), ids.end()) != ids.end()) {
    throw ConfigError("vehicles", "duplicate vehicle id");
  }
  if (ego.enabled && std::binary_search(ids.begin(), ids.end(), 0)) {
    throw ConfigError("vehicles", "id 0 is reserved for the ego");
  }
}

ScenarioConfig parse_scenario(const std::string& text, const std::string& base_dir) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("scenario", e.what());
  }
  if (!root.is_object()) throw ConfigError("scenario", "top level must be an object");

  ScenarioConfig c;
  if (!root.contains("schema_version")) throw ConfigError("schema_version", "missing");
  c.schema_version = read<int>(root, "schema_version", 0, "");
  if (c.schema_version != kScenarioSchemaVersion) {
    throw ConfigError("schema_version", fmt::format("unsupported version {}", c.schema_version));
  }
  c.name = read<std::string>(root, "name", c.name, "");
  c.mode = parse_mode(read<std::string>(root, "mode", to_string(c.mode), ""));
  c.duration = read<double>(root, "duration", c.duration, "");
  c.dt = read<double>(root, "dt", c.dt, "");
  c.seed = read<std::uint64_t>(root, "seed", c.seed, "");
  c.end_on_ego_exit = read<bool>(root, "end_on_ego_exit", c.end_on_ego_exit, "");
  c.stale_after = read<double>(root, "stale_after", c.stale_after, "");

  const json& net = section(root, "network");
  c.network.intersections = read<int>(net, "intersections", c.network.intersections, "network.");
  c.network.spacing = read<double>(net, "spacing", c.network.spacing, "network.");
  c.network.positions = read<std::vector<double>>(net, "positions", {}, "network.");
  c.network.lane_width = read<double>(net, "lane_width", c.network.lane_width, "network.");
  c.network.entry_length = read<double>(net, "entry_length", c.network.entry_length, "network.");
  c.network.exit_length = read<double>(net, "exit_length", c.network.exit_length, "network.");
  c.network.cross_length = read<double>(net, "cross_length", c.network.cross_length, "network.");
  c.network.speed_limit = read<double>(net, "speed_limit", c.network.speed_limit, "network.");
  c.network.turn_segments = read<int>(net, "turn_segments", c.network.turn_segments, "network.");
  c.network.design_length =
      read<double>(net, "design_length", c.network.design_length, "network.");
  c.network.design_width = read<double>(net, "design_width", c.network.design_width, "network.");

  const json& sig = section(root, "signals");
  c.signals.green = read<double>(sig, "green", c.signals.green, "signals.");
  c.signals.yellow = read<double>(sig, "yellow", c.signals.yellow, "signals.");
  c.signals.all_red = read<double>(sig, "all_red", c.signals.all_red, "signals.");
  c.signals.offsets = read<std::vector<double>>(sig, "offsets", {}, "signals.");

  const json& dem = section(root, "demand");
  c.demand.rate = read<double>(dem, "rate", c.demand.rate, "demand.");
  c.demand.corridor_turns =
      parse_mix(dem, "corridor_turns", c.demand.corridor_turns, "demand.corridor_turns");
  c.demand.cross_turns = parse_mix(dem, "cross_turns", c.demand.cross_turns, "demand.cross_turns");
  c.demand.clearance_lengths =
      read<double>(dem, "clearance_lengths", c.demand.clearance_lengths, "demand.");
  if (dem.contains("until") && !dem["until"].is_null()) {
    c.demand.until = read<double>(dem, "until", 0.0, "demand.");
  }
  c.demand.npc_kind =
      parse_kind(read<std::string>(dem, "npc_kind", "cav", "demand."), "demand.npc_kind");

  const json& pl = section(root, "planner");
  c.planner.t_h = read<double>(pl, "t_h", c.planner.t_h, "planner.");
  c.planner.t_theta = read<double>(pl, "t_theta", c.planner.t_theta, "planner.");
  c.planner.d_theta = read<double>(pl, "d_theta", c.planner.d_theta, "planner.");
  c.planner.v_floor = read<double>(pl, "v_floor", c.planner.v_floor, "planner.");
  {
    const auto rule = read<std::string>(pl, "predecessor_rule", "min", "planner.");
    if (rule == "min") {
      c.planner.predecessor_rule = PredecessorRule::Min;
    } else if (rule == "max") {
      c.planner.predecessor_rule = PredecessorRule::Max;
    } else {
      throw ConfigError("planner.predecessor_rule", fmt::format("unknown rule '{}'", rule));
    }
  }

  const json& ctl = section(root, "controller");
  c.controller.alpha = read<double>(ctl, "alpha", c.controller.alpha, "controller.");
  c.controller.k = read<double>(ctl, "k", c.controller.k, "controller.");
  c.controller.gamma = read<double>(ctl, "gamma", c.controller.gamma, "controller.");
  c.controller.t_h = c.planner.t_h;
  c.controller.dt = c.dt;
  c.controller.v_max = c.network.speed_limit;
  c.gain_table = resolve_path(read<std::string>(ctl, "gain_table", "", "controller."), base_dir);

  const json& dl = section(root, "delay");
  const double mean = read<double>(dl, "mean", c.delay.mean, "delay.");
  const double sd = read<double>(dl, "std", c.delay.std, "delay.");
  c.delay = DelayModel::with_default_clamp(mean, sd);
  c.delay.clamp_lo = read<double>(dl, "clamp_lo", c.delay.clamp_lo, "delay.");
  c.delay.clamp_hi = read<double>(dl, "clamp_hi", c.delay.clamp_hi, "delay.");

  const json& gd = section(root, "guard");
  c.guard.decel = read<double>(gd, "decel", c.guard.decel, "guard.");
  c.guard.reaction_time = read<double>(gd, "reaction_time", c.guard.reaction_time, "guard.");
  c.guard.standstill_gap = read<double>(gd, "standstill_gap", c.guard.standstill_gap, "guard.");

  const json& lim = section(root, "limits");
  c.limits.a_min = read<double>(lim, "a_min", c.limits.a_min, "limits.");
  c.limits.a_max = read<double>(lim, "a_max", c.limits.a_max, "limits.");
  c.limits.v_max = read<double>(lim, "v_max", c.network.speed_limit, "limits.");

  const json& fu = section(root, "fuel");
  c.fuel.idle = read<double>(fu, "idle", c.fuel.idle, "fuel.");
  c.fuel.c1 = read<double>(fu, "c1", c.fuel.c1, "fuel.");
  c.fuel.c2 = read<double>(fu, "c2", c.fuel.c2, "fuel.");
  c.fuel.grade = read<double>(fu, "grade", c.fuel.grade, "fuel.");

  if (root.contains("ego") && root["ego"].is_null()) {
    c.ego.enabled = false;
  } else {
    const json& eg = section(root, "ego");
    c.ego.enabled = read<bool>(eg, "enabled", c.ego.enabled, "ego.");
    c.ego.kind = parse_kind(read<std::string>(eg, "kind", "cav", "ego."), "ego.kind");
    if (eg.contains("spawn_window")) {
      auto w = read<std::vector<double>>(eg, "spawn_window", {}, "ego.");
      if (w.size() != 2) throw ConfigError("ego.spawn_window", "needs two values");
      c.ego.spawn_window = {w[0], w[1]};
    }
    c.ego.heading =
        parse_heading(read<std::string>(eg, "heading", "north", "ego."), "ego.heading");
    c.ego.entry = read<int>(eg, "entry", c.ego.entry, "ego.");
    c.ego.speed = read<double>(eg, "speed", c.ego.speed, "ego.");
    c.ego.turns = parse_turns(eg, "turns", "ego.turns", {});
  }

  if (root.contains("vehicles")) {
    if (!root["vehicles"].is_array()) throw ConfigError("vehicles", "must be an array");
    std::size_t i = 0;
    for (const auto& v : root["vehicles"]) {
      const std::string p = fmt::format("vehicles[{}].", i++);
      if (!v.is_object()) throw ConfigError(p.substr(0, p.size() - 1), "must be an object");
      ScriptedVehicle s;
      if (!v.contains("id")) throw ConfigError(p + "id", "missing");
      s.id = read<int>(v, "id", -1, p);
      s.node = read<int>(v, "node", s.node, p);
      s.heading = parse_heading(read<std::string>(v, "heading", "north", p), p + "heading");
      s.turns = parse_turns(v, "turns", p + "turns", s.turns);
      s.distance = read<double>(v, "distance", s.distance, p);
      s.speed = read<double>(v, "speed", s.speed, p);
      s.spawn_time = read<double>(v, "spawn_time", s.spawn_time, p);
      s.kind = parse_kind(read<std::string>(v, "kind", "cav", p), p + "kind");
      s.ego = read<bool>(v, "ego", false, p);
      c.vehicles.push_back(std::move(s));
    }
  }

  c.validate();
  return c;
}

ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(fmt::format("cannot open scenario {}", path));
  std::stringstream ss;
  ss << in.rdbuf();
  const auto base = std::filesystem::path(path).parent_path().string();
  return parse_scenario(ss.str(), base.empty() ? "." : base);
}

std::string dump_scenario(const ScenarioConfig& c) {
  ordered_json j;
  j["schema_version"] = c.schema_version;
  j["name"] = c.name;
  j["mode"] = to_string(c.mode);
  j["duration"] = c.duration;
  j["dt"] = c.dt;
  j["seed"] = c.seed;
  j["end_on_ego_exit"] = c.end_on_ego_exit;
  j["stale_after"] = c.stale_after;
  j["network"] = {{"intersections", c.network.intersections},
                  {"spacing", c.network.spacing},
                  {"positions", c.network.positions},
                  {"lane_width", c.network.lane_width},
                  {"entry_length", c.network.entry_length},
                  {"exit_length", c.network.exit_length},
                  {"cross_length", c.network.cross_length},
                  {"speed_limit", c.network.speed_limit},
                  {"turn_segments", c.network.turn_segments},
                  {"design_length", c.network.design_length},
                  {"design_width", c.network.design_width}};
  j["signals"] = {{"green", c.signals.green},
                  {"yellow", c.signals.yellow},
                  {"all_red", c.signals.all_red},
                  {"offsets", c.signals.offsets}};
  auto mix = [](const TurnMix& m) {
    return ordered_json{{"left", m[0]}, {"straight", m[1]}, {"right", m[2]}};
  };
  j["demand"] = {{"rate", c.demand.rate},
                 {"corridor_turns", mix(c.demand.corridor_turns)},
                 {"cross_turns", mix(c.demand.cross_turns)},
                 {"clearance_lengths", c.demand.clearance_lengths},
                 {"until", c.demand.until ? ordered_json(*c.demand.until) : ordered_json()},
                 {"npc_kind", kind_key(c.demand.npc_kind)}};
  j["planner"] = {{"t_h", c.planner.t_h},
                  {"t_theta", c.planner.t_theta},
                  {"d_theta", c.planner.d_theta},
                  {"v_floor", c.planner.v_floor},
                  {"predecessor_rule",
                   c.planner.predecessor_rule == PredecessorRule::Min ? "min" : "max"}};
  j["controller"] = {{"alpha", c.controller.alpha},
                     {"k", c.controller.k},
                     {"gamma", c.controller.gamma},
                     {"gain_table", c.gain_table}};
  j["delay"] = {{"mean", c.delay.mean},
                {"std", c.delay.std},
                {"clamp_lo", c.delay.clamp_lo},
                {"clamp_hi", c.delay.clamp_hi}};
  j["guard"] = {{"decel", c.guard.decel},
                {"reaction_time", c.guard.reaction_time},
                {"standstill_gap", c.guard.standstill_gap}};
  j["limits"] = {{"a_min", c.limits.a_min}, {"a_max", c.limits.a_max}, {"v_max", c.limits.v_max}};
  j["fuel"] = {{"idle", c.fuel.idle}, {"c1", c.fuel.c1}, {"c2", c.fuel.c2}, {"grade", c.fuel.grade}};
  ordered_json turns = ordered_json::array();
  for (Turn t : c.ego.turns) turns.push_back(turn_key(t));
  j["ego"] = {{"enabled", c.ego.enabled},
              {"kind", kind_key(c.ego.kind)},
              {"spawn_window", {c.ego.spawn_window[0], c.ego.spawn_window[1]}},
              {"heading", heading_key(c.ego.heading)},
              {"entry", c.ego.entry},
              {"speed", c.ego.speed},
              {"turns", turns}};
  ordered_json vehicles = ordered_json::array();
  for (const auto& v : c.vehicles) {
    ordered_json vt = ordered_json::array();
    for (Turn t : v.turns) vt.push_back(turn_key(t));
    vehicles.push_back({{"id", v.id},
                        {"node", v.node},
                        {"heading", heading_key(v.heading)},
                        {"turns", vt},
                        {"distance", v.distance},
                        {"speed", v.speed},
                        {"spawn_time", v.spawn_time},
                        {"kind", kind_key(v.kind)},
                        {"ego", v.ego}});
  }
  j["vehicles"] = vehicles;
  return j.dump(2);
}

ScenarioConfig corridor_preset() {
  ScenarioConfig c;
  c.name = "corridor";
  c.duration = 400.0;
  c.end_on_ego_exit = true;
  return c;
}

ScenarioConfig seven_vehicle_preset() {
  ScenarioConfig c;
  c.name = "seven-vehicle";
  c.duration = 60.0;
  c.network.spacing = 150.0;
  c.demand.rate = 0.0;
  c.ego.enabled = false;
  auto add = [&](VehicleId id, Heading h, std::vector<Turn> turns, double d, bool ego = false) {
    ScriptedVehicle s;
    s.id = id;
    s.node = 0;
    s.heading = h;
    s.turns = std::move(turns);
    s.distance = d;
    s.speed = 12.0;
    s.ego = ego;
    c.vehicles.push_back(s);
  };
  add(1, Heading::East, {Turn::Left}, 50.0);
  add(3, Heading::North, {Turn::Straight}, 70.0);
  add(2, Heading::West, {Turn::Straight}, 85.0);
  add(0, Heading::North, {Turn::Straight}, 100.0, true);
  add(4, Heading::North, {Turn::Straight}, 120.0);
  add(5, Heading::East, {Turn::Straight}, 135.0);
  add(6, Heading::West, {Turn::Left}, 145.0);
  return c;
}

ScenarioConfig two_vehicle_preset() {
  ScenarioConfig c;
  c.name = "two-vehicle";
  c.duration = 40.0;
  c.network.intersections = 1;
  c.demand.rate = 0.0;
  c.ego.enabled = false;
  ScriptedVehicle lead;
  lead.id = 1;
  lead.heading = Heading::East;
  lead.distance = 100.0;
  lead.speed = 12.0;
  ScriptedVehicle ego;
  ego.id = 0;
  ego.heading = Heading::North;
  ego.distance = 110.0;
  ego.speed = 14.0;
  ego.ego = true;
  c.vehicles = {lead, ego};
  return c;
}

}  // namespace slotsim
