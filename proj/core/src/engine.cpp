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

#include "slotsim/engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "slotsim/errors.hpp"

namespace slotsim {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kSlotMargin = 1.0;
constexpr double kStopLineGap = 0.5;
constexpr double kYellowDecel = 3.0;
constexpr double kPassageWindow = 60.0;
constexpr double kAuditReach = 15.0;

enum Stream : std::uint64_t { kSpawnStream = 1, kRouteStream = 2, kBusStream = 3 };

std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), 0x5107u};
  return std::mt19937_64(seq);
}

Turn draw_turn(const TurnMix& mix, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double x = u(rng);
  if (x < mix[0]) return Turn::Left;
  if (x < mix[0] + mix[1]) return Turn::Straight;
  return Turn::Right;
}

}  // namespace

Engine::Engine(const ScenarioConfig& config, std::optional<std::uint64_t> seed,
               EngineOptions options)
    : cfg_(config),
      options_(std::move(options)),
      seed_(seed.value_or(config.seed)),
      network_((config.validate(), build_network(config.network))),
      bus_(config.delay),
      spawn_rng_(make_stream(seed_, kSpawnStream)),
      route_rng_(make_stream(seed_, kRouteStream)),
      bus_rng_(make_stream(seed_, kBusStream)) {
  if (!cfg_.gain_table.empty()) {
    gains_ = GainTable::load(cfg_.gain_table);
  }
  total_ticks_ = std::max<long>(1, std::lround(cfg_.duration / cfg_.dt));

  const auto n_links = network_.links().size();
  const auto n_paths = network_.paths().size();
  paths_from_link_.resize(n_links);
  paths_to_link_.resize(n_links);
  on_link_.resize(n_links);
  in_box_.resize(n_paths);
  box_conflicts_.resize(n_paths);
  for (const auto& p : network_.paths()) {
    paths_from_link_[static_cast<std::size_t>(p.from_link)].push_back(p.id);
    paths_to_link_[static_cast<std::size_t>(p.to_link)].push_back(p.id);
    for (PathId q : network_.intersection(p.intersection).paths) {
      if (q == p.id) continue;
      const auto& cp = network_.conflict(p.id, q);
      const Path& pq = network_.path(q);
      if (cp && cp->arclength_on_i >= p.stop_line - 1e-9 &&
          cp->arclength_on_j >= pq.stop_line - 1e-9) {
        box_conflicts_[static_cast<std::size_t>(p.id)].push_back({q, cp->arclength_on_i});
      }
    }
  }

  VehicleId max_scripted = 0;
  for (const auto& s : cfg_.vehicles) {
    const PathId path = network_.path_for(s.node, s.heading, s.turns.front());
    if (network_.path(path).stop_line - s.distance < 0.0) {
      throw ConfigError("vehicles", fmt::format("vehicle {} starts {} m before a {} m approach",
                                                s.id, s.distance, network_.path(path).stop_line));
    }
    max_scripted = std::max(max_scripted, s.id);
    has_ego_ = has_ego_ || s.ego;
  }
  scripted_ = cfg_.vehicles;
  std::stable_sort(scripted_.begin(), scripted_.end(),
                   [](const auto& a, const auto& b) { return a.spawn_time < b.spawn_time; });
  random_base_ = max_scripted + 1;

  if (cfg_.ego.enabled) {
    std::uniform_real_distribution<double> u(cfg_.ego.spawn_window[0], cfg_.ego.spawn_window[1]);
    ego_spawn_at_ = cfg_.ego.spawn_window[0] == cfg_.ego.spawn_window[1]
                        ? cfg_.ego.spawn_window[0]
                        : u(spawn_rng_);
    has_ego_ = true;
  }

  const int n = cfg_.network.intersections;
  if (cfg_.demand.rate > 0.0) {
    std::exponential_distribution<double> gap(cfg_.demand.rate);
    auto add_source = [&](IntersectionId node, Heading h) {
      sources_.push_back({node, h, gap(spawn_rng_)});
    };
    add_source(0, Heading::North);
    add_source(n - 1, Heading::South);
    for (IntersectionId k = 0; k < n; ++k) {
      add_source(k, Heading::East);
      add_source(k, Heading::West);
    }
  }
}

const Agent* Engine::agent(VehicleId id) const {
  for (const auto& a : agents_) {
    if (a.state.id == id) return &a;
  }
  return nullptr;
}

const Agent* Engine::ego() const {
  for (const auto& a : agents_) {
    if (a.ego) return &a;
  }
  return nullptr;
}

SignalPhase Engine::phase(IntersectionId node, Heading heading) const {
  return signal_phase(time(), cfg_.signals, node, heading);
}

Pose2 Engine::pose_of(const VehicleState& state) const {
  const Path& p = network_.path(state.path);
  const double s = std::clamp(state.r, 0.0, p.total_length);
  const Vec2 tan = p.polyline.tangent_at(s);
  const Vec2 left{-tan.y, tan.x};
  const Vec2 base = p.polyline.point_at(s) + (state.r - s) * tan;
  return {base + state.x * left, std::atan2(tan.y, tan.x)};
}

MetricsSummary Engine::summary() const {
  MetricsSummary s = metrics_.summary();
  s.safety = safety_;
  return s;
}

std::vector<Turn> Engine::draw_route(Heading heading) {
  const int n = cfg_.network.intersections;
  std::vector<Turn> route;
  route.reserve(static_cast<std::size_t>(n));
  const bool cross = heading == Heading::East || heading == Heading::West;
  for (int k = 0; k < n; ++k) {
    const TurnMix& mix = (k == 0 && cross) ? cfg_.demand.cross_turns : cfg_.demand.corridor_turns;
    route.push_back(draw_turn(mix, route_rng_));
  }
  return route;
}

bool Engine::entry_clear(LinkId link, double length) const {
  const double reach = cfg_.demand.clearance_lengths * length;
  for (const auto& a : agents_) {
    const Path& p = network_.path(a.state.path);
    if (p.from_link == link && a.state.r < reach) return false;
  }
  return true;
}

double Engine::entry_speed(LinkId link, double v_limit) const {
  const Agent* nearest = nullptr;
  for (const auto& a : agents_) {
    const Path& p = network_.path(a.state.path);
    if (p.from_link == link && a.state.r < p.stop_line &&
        (nearest == nullptr || a.state.r < nearest->state.r)) {
      nearest = &a;
    }
  }
  if (nearest == nullptr) return v_limit;
  const VehicleState probe;
  const double gap = nearest->state.r - (nearest->state.length + probe.length) / 2.0;
  return std::min(v_limit, safe_follow_speed(gap, nearest->state.v, cfg_.guard));
}

Agent& Engine::add_agent(VehicleId id, bool ego, PathId path, double r, double v,
                         VehicleKind kind, std::vector<Turn> route, double t) {
  const auto n = static_cast<std::size_t>(cfg_.network.intersections);
  while (route.size() < n) route.push_back(Turn::Straight);
  Agent a;
  a.state.id = id;
  a.state.path = path;
  a.state.r = r;
  a.state.v = v;
  a.state.kind = kind;
  a.ordinal = next_ordinal_++;
  a.ego = ego;
  a.route = std::move(route);
  a.spawned_at = t;
  a.target = v;
  agents_.push_back(std::move(a));
  metrics_.spawn(id, t, ego);
  ++spawned_;
  return agents_.back();
}

void Engine::spawn_due(double t) {
  constexpr double kEps = 1e-9;
  while (!scripted_.empty() && scripted_.front().spawn_time <= t + kEps) {
    const ScriptedVehicle s = scripted_.front();
    scripted_.erase(scripted_.begin());
    const PathId path = network_.path_for(s.node, s.heading, s.turns.front());
    const Path& p = network_.path(path);
    add_agent(s.id, s.ego, path, p.stop_line - s.distance, std::min(s.speed, p.speed_limit),
              s.kind, s.turns, t);
  }

  if (ego_spawn_at_ && *ego_spawn_at_ <= t + kEps) {
    std::vector<Turn> route = cfg_.ego.turns;
    if (route.empty()) route.push_back(Turn::Straight);
    const PathId path = network_.path_for(cfg_.ego.entry, cfg_.ego.heading, route.front());
    const Path& p = network_.path(path);
    if (entry_clear(p.from_link, VehicleState{}.length)) {
      const double v = std::min(cfg_.ego.speed, entry_speed(p.from_link, p.speed_limit));
      add_agent(kEgoId, true, path, 0.0, v, cfg_.ego.kind, std::move(route), t);
      ego_spawn_at_.reset();
    }
  }

  const bool open = !cfg_.demand.until || t <= *cfg_.demand.until;
  std::exponential_distribution<double> gap(cfg_.demand.rate > 0.0 ? cfg_.demand.rate : 1.0);
  for (auto& src : sources_) {
    while (src.next_arrival <= t + kEps) {
      src.next_arrival += gap(spawn_rng_);
      if (!open) continue;
      const LinkId link = network_.entry_link(src.node, src.heading);
      if (!entry_clear(link, VehicleState{}.length)) continue;
      std::vector<Turn> route = draw_route(src.heading);
      const PathId path = network_.path_for(src.node, src.heading, route.front());
      const double v = entry_speed(link, network_.path(path).speed_limit);
      const VehicleId id =
          options_.labeler ? options_.labeler(random_count_) : random_base_ + random_count_;
      ++random_count_;
      add_agent(id, false, path, 0.0, v, cfg_.demand.npc_kind, std::move(route), t);
    }
  }
}

void Engine::index_lanes() {
  for (auto& l : on_link_) l.clear();
  for (auto& b : in_box_) b.clear();
  for (std::size_t i = 0; i < agents_.size(); ++i) {
    const VehicleState& s = agents_[i].state;
    const Path& p = network_.path(s.path);
    if (s.r < p.stop_line) {
      on_link_[static_cast<std::size_t>(p.from_link)].push_back({i, s.r});
    } else if (s.r < p.box_exit) {
      in_box_[static_cast<std::size_t>(p.id)].push_back({i, s.r});
    } else {
      on_link_[static_cast<std::size_t>(p.to_link)].push_back({i, s.r - p.box_exit});
    }
  }
}

std::optional<std::size_t> Engine::predecessor(std::size_t idx) const {
  const VehicleState& s = agents_[idx].state;
  const Path& p = network_.path(s.path);
  std::optional<std::size_t> best;
  double best_pos = kInf;
  for (const auto& e : on_link_[static_cast<std::size_t>(p.from_link)]) {
    if (e.agent == idx || e.pos <= s.r) continue;
    if (e.pos < best_pos || (e.pos == best_pos && agents_[e.agent].ordinal < agents_[*best].ordinal)) {
      best = e.agent;
      best_pos = e.pos;
    }
  }
  return best;
}

void Engine::planner_tick(double t) {
  struct Candidate {
    double d;
    int ordinal;
    std::size_t idx;
  };
  std::vector<Candidate> todo;
  for (std::size_t i = 0; i < agents_.size(); ++i) {
    const VehicleState& s = agents_[i].state;
    const Path& p = network_.path(s.path);
    if (s.r > p.stop_line) continue;
    if (pool_.find(s.id, p.intersection) != nullptr) continue;
    todo.push_back({p.stop_line - s.r, agents_[i].ordinal, i});
  }
  std::sort(todo.begin(), todo.end(), [](const Candidate& a, const Candidate& b) {
    return a.d != b.d ? a.d < b.d : a.ordinal < b.ordinal;
  });

  for (const auto& c : todo) {
    const VehicleState& s = agents_[c.idx].state;
    const Path& p = network_.path(s.path);
    const double v_lim = std::min(p.speed_limit, cfg_.limits.v_max);
    const double t_own = estimate_eta(s.v, s.a, c.d, v_lim, cfg_.planner.v_floor);

    ReservationRequest req{s.id, s.path, s.r, std::nullopt};
    std::optional<double> t_pred;
    if (auto pred = predecessor(c.idx)) {
      const VehicleState& ps = agents_[*pred].state;
      req.predecessor = ps.id;
      if (auto sample = inbox_.latest(ps.id, t)) {
        const Path& sp = network_.path(sample->state.path);
        if (sp.from_link == p.from_link) {
          const double d_pred = std::max(0.0, sp.stop_line - sample->state.r);
          t_pred = estimate_eta(sample->state.v, sample->state.a, d_pred, v_lim,
                                cfg_.planner.v_floor);
        }
      }
    }
    const double t_i =
        eta_with_predecessor(t_own, t_pred, cfg_.planner.t_h, cfg_.planner.predecessor_rule);
    auto rec = maybe_reserve(req, {t_i, c.d, t}, cfg_.planner, pool_, network_, t);
    if (rec) {
      events_.push_back({ReservationEventKind::Reserved, t, s.id, rec->intersection, rec->slot,
                         std::vector<VehicleId>(rec->references.begin(), rec->references.end())});
    }
  }
}

double Engine::leader_guard(std::size_t idx) const {
  const VehicleState& s = agents_[idx].state;
  const Path& p = network_.path(s.path);
  double best = kInf;
  const VehicleState* lead = nullptr;
  auto consider = [&](std::size_t j, double pos) {
    if (j == idx || pos <= s.r) return;
    if (pos < best) {
      best = pos;
      lead = &agents_[j].state;
    }
  };

  if (s.r < p.stop_line) {
    for (const auto& e : on_link_[static_cast<std::size_t>(p.from_link)]) consider(e.agent, e.pos);
  }
  for (PathId q : paths_from_link_[static_cast<std::size_t>(p.from_link)]) {
    for (const auto& e : in_box_[static_cast<std::size_t>(q)]) {
      const VehicleState& o = agents_[e.agent].state;
      if (q == p.id) {
        consider(e.agent, e.pos);
      } else if (o.r - o.length / 2.0 < p.stop_line) {
        consider(e.agent, e.pos);
      }
    }
  }
  for (PathId q : paths_to_link_[static_cast<std::size_t>(p.to_link)]) {
    if (q == p.id) continue;
    const Path& pq = network_.path(q);
    for (const auto& e : in_box_[static_cast<std::size_t>(q)]) {
      const VehicleState& o = agents_[e.agent].state;
      if (pq.box_exit - o.r < o.length) consider(e.agent, p.box_exit - (pq.box_exit - o.r));
    }
  }
  for (const auto& e : on_link_[static_cast<std::size_t>(p.to_link)]) {
    consider(e.agent, e.pos + p.box_exit);
  }

  if (lead == nullptr) return kInf;
  const double gap = best - s.r - (s.length + lead->length) / 2.0;
  return safe_follow_speed(gap, lead->v, cfg_.guard);
}

double Engine::signal_guard(const Agent& ag, double t) const {
  const VehicleState& s = ag.state;
  const Path& p = network_.path(s.path);
  const double d_front = p.stop_line - s.r - s.length / 2.0;
  if (d_front < 0.0) return kInf;
  const SignalPhase ph = signal_phase(t, cfg_.signals, p.intersection, p.heading);
  if (ph == SignalPhase::Green) return kInf;
  const bool stop = ph == SignalPhase::Yellow
                        ? should_stop_on_yellow(s.v, d_front, kYellowDecel)
                        : s.v * s.v / (2.0 * cfg_.guard.decel) <= d_front + 1.0;
  if (!stop) return kInf;
  FollowGuard g = cfg_.guard;
  g.standstill_gap = kStopLineGap;
  return safe_follow_speed(d_front, 0.0, g);
}

double Engine::slot_guard(const Agent& ag, const ReferenceSlot& rs) const {
  const VehicleState& s = ag.state;
  const auto& cp = network_.conflict(s.path, rs.path);
  if (!cp) return kInf;
  const double h_i = s.length / 2.0 + rs.width / 2.0;
  const double h_j = rs.length / 2.0 + s.width / 2.0;
  const double gap = rs.geometry.r_s - s.r - (h_i + h_j);
  FollowGuard g = cfg_.guard;
  g.standstill_gap = kSlotMargin;
  if (gap >= kSlotMargin) {
    return safe_follow_speed(gap, rs.v_ref, g);
  }
  // Slot too close or behind: hold short of the conflict zone.
  const double zone_gap = (cp->arclength_on_i - h_i) - s.r;
  if (zone_gap <= 0.0) return kInf;
  g.standstill_gap = kStopLineGap;
  return safe_follow_speed(zone_gap, 0.0, g);
}

DriveCommand Engine::decide(std::size_t idx, double t) {
  Agent& ag = agents_[idx];
  const Path& path = network_.path(ag.state.path);
  const double v_lim = std::min(path.speed_limit, cfg_.limits.v_max);
  ag.leader.reset();
  ag.fault = false;
  ag.stale_reference = false;

  if (ag.ego && options_.ego_driver == EgoDriver::Pedal) {
    const DriveCommand cmd = human_input_adapter(ego_input_, cfg_.limits);
    ag.mode = ControlMode::Hold;
    ag.target = ag.state.v + std::get<TargetAccel>(cmd.target).value * cfg_.dt;
    ag.raw_target = ag.target;
    if (cfg_.mode == Mode::Unsignalized) {
      ag.slots.clear();
      if (const ReservationRecord* rec = pool_.find(ag.state.id, path.intersection)) {
        SlotContext ctx{network_, inbox_, pool_, t, cfg_.planner.t_h, cfg_.stale_after};
        const auto refs = reference_slots(ag.state, *rec, ctx, ag.state.v);
        for (const auto& rs : refs.slots) ag.slots.upsert(rs.geometry);
      }
    }
    return cmd;
  }

  double target = v_lim;
  double raw = v_lim;
  ControlMode mode = ControlMode::FreeDrive;
  ag.slots.clear();
  if (cfg_.mode == Mode::Unsignalized) {
    if (ReservationRecord* rec = pool_.find(ag.state.id, path.intersection)) {
      SlotContext ctx{network_, inbox_, pool_, t, cfg_.planner.t_h, cfg_.stale_after};
      auto refs = reference_slots(ag.state, *rec, ctx, ag.state.v);
      ControllerParams cp = cfg_.controller;
      cp.v_max = v_lim;
      const ControlDecision dec = step_controller(ag.state, *rec, refs, cp, gains_);
      if (dec.captured) rec->initial = dec.captured;
      target = dec.target.value;
      raw = dec.target.raw;
      mode = dec.mode;
      ag.leader = dec.leader;
      ag.fault = dec.fault;
      for (const auto& rs : refs.slots) {
        target = std::min(target, slot_guard(ag, rs));
        ag.stale_reference = ag.stale_reference || rs.dead_reckoned;
      }
      for (auto& rs : refs.slots) {
        SlotGeometry g = rs.geometry;
        g.l_s = std::max(rs.length, target * cfg_.planner.t_h);
        ag.slots.upsert(g);
      }
    }
  } else {
    target = std::min(target, signal_guard(ag, t));
  }
  target = std::min(target, leader_guard(idx));
  ag.mode = mode;
  ag.target = target;
  ag.raw_target = raw;
  return DriveCommand::speed(target);
}

void Engine::record_passages(const Agent& ag, double r_prev, double t) {
  const VehicleState& s = ag.state;
  for (const auto& bc : box_conflicts_[static_cast<std::size_t>(s.path)]) {
    if (!(r_prev < bc.s && bc.s <= s.r)) continue;
    const double tp = t + cfg_.dt * (bc.s - r_prev) / (s.r - r_prev);
    auto& other = passages_[{bc.other, s.path}];
    other.erase(std::remove_if(other.begin(), other.end(),
                               [tp](double x) { return x < tp - kPassageWindow; }),
                other.end());
    for (double x : other) {
      safety_.min_crossing_gap = std::min(safety_.min_crossing_gap, std::abs(tp - x));
    }
    ++safety_.crossings;
    passages_[{s.path, bc.other}].push_back(tp);
  }
}

void Engine::audit(double t) {
  std::unordered_map<VehicleId, std::size_t> by_id;
  for (std::size_t i = 0; i < agents_.size(); ++i) by_id[agents_[i].state.id] = i;

  // Conflict-zone co-occupancy.
  const auto n_nodes = network_.intersections().size();
  std::vector<std::vector<std::size_t>> near(n_nodes);
  for (std::size_t i = 0; i < agents_.size(); ++i) {
    const VehicleState& s = agents_[i].state;
    const Path& p = network_.path(s.path);
    if (s.r > p.stop_line - kAuditReach && s.r < p.box_exit + kAuditReach) {
      near[static_cast<std::size_t>(p.intersection)].push_back(i);
    }
  }
  for (const auto& list : near) {
    for (std::size_t a = 0; a < list.size(); ++a) {
      for (std::size_t b = a + 1; b < list.size(); ++b) {
        const VehicleState& si = agents_[list[a]].state;
        const VehicleState& sj = agents_[list[b]].state;
        const auto& bcs = box_conflicts_[static_cast<std::size_t>(si.path)];
        auto it = std::find_if(bcs.begin(), bcs.end(),
                               [&](const BoxConflict& bc) { return bc.other == sj.path; });
        if (it == bcs.end()) continue;
        const auto& cp = network_.conflict(si.path, sj.path);
        const bool in_i = std::abs(si.r - cp->arclength_on_i) < si.length / 2.0 + sj.width / 2.0;
        const bool in_j = std::abs(sj.r - cp->arclength_on_j) < sj.length / 2.0 + si.width / 2.0;
        const auto key = std::minmax(si.id, sj.id);
        bool& flagged = co_occupied_[key];
        if (in_i && in_j) {
          if (!flagged) {
            ++safety_.co_occupancy;
            spdlog::debug("t={:.2f}: vehicles {} and {} share a conflict zone", t, si.id, sj.id);
          }
          flagged = true;
        } else {
          flagged = false;
        }
      }
    }
  }

  // Slot uniqueness and release bookkeeping.
  for (const auto& node : network_.intersections()) {
    const auto& recs = pool_.active(node.id);
    for (auto a = recs.begin(); a != recs.end(); ++a) {
      for (auto b = std::next(a); b != recs.end(); ++b) {
        if (a->second.slot == b->second.slot &&
            network_.conflicts(a->second.path, b->second.path)) {
          ++safety_.slot_conflicts;
        }
      }
      auto it = by_id.find(a->first);
      if (it == by_id.end()) {
        ++safety_.release_violations;
        continue;
      }
      const VehicleState& s = agents_[it->second].state;
      const Path& p = network_.path(s.path);
      if (p.intersection != node.id || s.r >= p.box_exit) ++safety_.release_violations;
    }
  }

  if (spawned_ != exited_ + static_cast<int>(agents_.size())) {
    ++safety_.conservation_violations;
  }
}

bool Engine::step() {
  if (finished_) return false;
  const double t = static_cast<double>(tick_) * cfg_.dt;
  const double t_next = static_cast<double>(tick_ + 1) * cfg_.dt;

  spawn_due(t);
  inbox_.accept_all(bus_.poll(kCyberWorld, t));
  index_lanes();
  if (cfg_.mode == Mode::Unsignalized) planner_tick(t);

  std::vector<DriveCommand> cmds;
  cmds.reserve(agents_.size());
  for (std::size_t i = 0; i < agents_.size(); ++i) cmds.push_back(decide(i, t));

  std::vector<bool> gone(agents_.size(), false);
  for (std::size_t i = 0; i < agents_.size(); ++i) {
    Agent& ag = agents_[i];
    const Path& p = network_.path(ag.state.path);
    ActuatorLimits lim = cfg_.limits;
    lim.v_max = std::min(lim.v_max, p.speed_limit);
    const double r_prev = ag.state.r;
    ag.state = step_vehicle(ag.state, cmds[i], cfg_.dt, lim);
    ag.fuel_rate = cfg_.fuel.rate(ag.state.v, ag.state.a);
    record_passages(ag, r_prev, t);

    if (ag.state.r >= p.box_exit) {
      if (pool_.find(ag.state.id, p.intersection) != nullptr) {
        const int slot = pool_.find(ag.state.id, p.intersection)->slot;
        release_on_exit(ag.state.id, p.intersection, pool_);
        events_.push_back({ReservationEventKind::Released, t_next, ag.state.id, p.intersection,
                           slot, {}});
      }
      std::optional<PathId> next;
      if (ag.leg + 1 < ag.route.size()) next = network_.next_path(p.id, ag.route[ag.leg + 1]);
      if (next) {
        ag.state.r -= p.box_exit;
        ag.state.path = *next;
        ++ag.leg;
        ag.slots.clear();
      } else if (ag.state.r >= p.total_length) {
        gone[i] = true;
      }
    }
  }

  for (std::size_t i = 0; i < agents_.size(); ++i) {
    if (!gone[i]) continue;
    const Agent& ag = agents_[i];
    metrics_.exit(ag.state.id, t_next);
    inbox_.forget(ag.state.id);
    for (IntersectionId node : pool_.held_by(ag.state.id)) {
      release_on_exit(ag.state.id, node, pool_);
    }
    if (ag.ego) ego_exited_ = true;
    ++exited_;
  }
  {
    std::size_t w = 0;
    for (std::size_t i = 0; i < agents_.size(); ++i) {
      if (!gone[i]) {
        if (w != i) agents_[w] = std::move(agents_[i]);
        ++w;
      }
    }
    agents_.resize(w);
  }

  for (const auto& ag : agents_) bus_.send(ag.state, ag.state.id, t_next, bus_rng_);

  audit(t_next);
  for (const auto& ag : agents_) {
    const Path& p = network_.path(ag.state.path);
    metrics_.observe(ag.state.id, t_next, ag.state.v, ag.fuel_rate, cfg_.dt);
    if (sink_ != nullptr) {
      const ReservationRecord* rec = pool_.find(ag.state.id, p.intersection);
      sink_->write({t_next, ag.state.id, p.intersection, ag.state.r, ag.state.v, ag.state.a,
                    rec ? rec->slot : 0, p.stop_line - ag.state.r, ag.fuel_rate});
    }
  }

  ++tick_;
  if (tick_ >= total_ticks_ || (cfg_.end_on_ego_exit && has_ego_ && ego_exited_)) {
    finished_ = true;
    if (sink_ != nullptr) sink_->flush();
  }
  return true;
}

void Engine::run() {
  while (step()) {
  }
}

RunResult run_scenario(const ScenarioConfig& config, std::optional<std::uint64_t> seed,
                       TraceSink* sink, EngineOptions options) {
  Engine engine(config, seed, std::move(options));
  engine.set_trace_sink(sink);
  engine.run();
  return {engine.summary(), engine.reservation_log(), engine.tick()};
}

}  // namespace slotsim
