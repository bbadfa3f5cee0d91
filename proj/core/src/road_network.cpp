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

#include "slotsim/road_network.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <fmt/format.h>

#include "slotsim/errors.hpp"

namespace slotsim {

const std::optional<ConflictPoint> RoadNetwork::kNoConflict{};

const char* to_string(Heading h) {
  switch (h) {
    case Heading::North: return "N";
    case Heading::South: return "S";
    case Heading::East: return "E";
    case Heading::West: return "W";
  }
  return "?";
}

const char* to_string(Turn t) {
  switch (t) {
    case Turn::Left: return "L";
    case Turn::Straight: return "S";
    case Turn::Right: return "R";
  }
  return "?";
}

Heading turned(Heading h, Turn t) {
  if (t == Turn::Straight) {
    return h;
  }
  const bool left = t == Turn::Left;
  switch (h) {
    case Heading::North: return left ? Heading::West : Heading::East;
    case Heading::South: return left ? Heading::East : Heading::West;
    case Heading::East: return left ? Heading::North : Heading::South;
    case Heading::West: return left ? Heading::South : Heading::North;
  }
  return h;
}

Vec2 unit_vector(Heading h) {
  switch (h) {
    case Heading::North: return {0.0, 1.0};
    case Heading::South: return {0.0, -1.0};
    case Heading::East: return {1.0, 0.0};
    case Heading::West: return {-1.0, 0.0};
  }
  return {};
}

namespace {

constexpr double kTol = 1e-9;

struct Candidate {
  Vec2 point;
  double arc_i;
  double arc_j;
};

// Lane-centre point where traffic heading `h` enters the box (stop line).
Vec2 box_entry(Vec2 c, Heading h, double lane_width) {
  const double half = lane_width;
  const double off = lane_width / 2.0;
  switch (h) {
    case Heading::North: return {c.x + off, c.y - half};
    case Heading::South: return {c.x - off, c.y + half};
    case Heading::East: return {c.x - half, c.y - off};
    case Heading::West: return {c.x + half, c.y + off};
  }
  return c;
}

// Lane-centre point where traffic heading `h` leaves the box.
Vec2 box_exit(Vec2 c, Heading h, double lane_width) {
  const double half = lane_width;
  const double off = lane_width / 2.0;
  switch (h) {
    case Heading::North: return {c.x + off, c.y + half};
    case Heading::South: return {c.x - off, c.y - half};
    case Heading::East: return {c.x + half, c.y - off};
    case Heading::West: return {c.x - half, c.y + off};
  }
  return c;
}

void require_positive(double value, const char* field) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw ConfigError(field, fmt::format("must be a positive finite number (got {})", value));
  }
}

}  // namespace

std::optional<ConflictPoint> conflict_point(const Path& pi, const Path& pj) {
  const auto& pa = pi.polyline.points();
  const auto& sa = pi.polyline.arclengths();
  const auto& pb = pj.polyline.points();
  const auto& sb = pj.polyline.arclengths();

  std::optional<Candidate> best;
  double shared = 0.0;
  auto consider = [&best](const Candidate& c) {
    if (!best || c.arc_i < best->arc_i - kTol ||
        (std::abs(c.arc_i - best->arc_i) <= kTol && c.arc_j < best->arc_j)) {
      best = c;
    }
  };

  for (std::size_t a = 0; a + 1 < pa.size(); ++a) {
    const Vec2 a0 = pa[a];
    const Vec2 da = pa[a + 1] - a0;
    const double la = sa[a + 1] - sa[a];
    for (std::size_t b = 0; b + 1 < pb.size(); ++b) {
      const Vec2 b0 = pb[b];
      const Vec2 db = pb[b + 1] - b0;
      const double lb = sb[b + 1] - sb[b];
      const Vec2 w = b0 - a0;
      const double denom = cross(da, db);
      if (std::abs(denom) > 1e-12 * la * lb) {
        const double t = cross(w, db) / denom;
        const double u = cross(w, da) / denom;
        if (t >= -kTol && t <= 1.0 + kTol && u >= -kTol && u <= 1.0 + kTol) {
          const double tc = std::clamp(t, 0.0, 1.0);
          const double uc = std::clamp(u, 0.0, 1.0);
          consider({a0 + tc * da, sa[a] + tc * la, sb[b] + uc * lb});
        }
        continue;
      }
      // Parallel: only collinear overlaps count.
      if (std::abs(cross(w, da)) > kTol * la) {
        continue;
      }
      const double t0 = dot(b0 - a0, da) / (la * la);
      const double t1 = dot(pb[b + 1] - a0, da) / (la * la);
      const double lo = std::max(0.0, std::min(t0, t1));
      const double hi = std::min(1.0, std::max(t0, t1));
      if (hi < lo - kTol) {
        continue;
      }
      const Vec2 p = a0 + lo * da;
      const double ub = std::clamp(dot(p - b0, db) / lb, 0.0, lb);
      consider({p, sa[a] + lo * la, sb[b] + ub});
      if (hi > lo) {
        shared += (hi - lo) * la;
      }
    }
  }

  if (!best) {
    return std::nullopt;
  }
  ConflictPoint cp;
  cp.point = best->point;
  cp.arclength_on_i = std::clamp(best->arc_i, 0.0, pi.total_length);
  cp.arclength_on_j = std::clamp(best->arc_j, 0.0, pj.total_length);
  cp.delta_ij = (cp.arclength_on_j - pj.stop_line) - (cp.arclength_on_i - pi.stop_line);
  cp.shared_length = shared;
  return cp;
}

namespace {

struct Pose {
  Vec2 c;
  Vec2 f;  // unit heading
  double s;
};

bool footprints_overlap(const Pose& a, const Pose& b, double hl, double hw) {
  const Vec2 axes[4] = {a.f, {-a.f.y, a.f.x}, b.f, {-b.f.y, b.f.x}};
  const Vec2 d = b.c - a.c;
  for (const Vec2& ax : axes) {
    const double ra = hl * std::abs(dot(a.f, ax)) + hw * std::abs(cross(a.f, ax));
    const double rb = hl * std::abs(dot(b.f, ax)) + hw * std::abs(cross(b.f, ax));
    if (std::abs(dot(d, ax)) > ra + rb) return false;
  }
  return true;
}

std::vector<Pose> sample_poses(const Path& p, double margin, double step) {
  std::vector<Pose> out;
  const double lo = std::max(0.0, p.stop_line - margin);
  const double hi = std::min(p.total_length, p.box_exit + margin);
  const int n = static_cast<int>(std::ceil((hi - lo) / step));
  for (int k = 0; k <= n; ++k) {
    const double s = std::min(hi, lo + k * step);
    out.push_back({p.polyline.point_at(s), p.polyline.tangent_at(s), s});
  }
  return out;
}

}  // namespace

std::optional<ConflictPoint> footprint_conflict(const Path& pi, const Path& pj, double length,
                                                double width, double step) {
  if (!(width > 0.0 && length > 0.0)) return std::nullopt;
  const double hl = length / 2, hw = width / 2;
  const double reach = 2.0 * std::hypot(hl, hw);
  const auto a = sample_poses(pi, length, step);
  const auto b = sample_poses(pj, length, step);
  // Closest pair of centres among the overlapping placements.
  std::optional<std::pair<const Pose*, const Pose*>> best;
  double best_d = std::numeric_limits<double>::infinity();
  for (const Pose& x : a) {
    for (const Pose& y : b) {
      const double d = distance(x.c, y.c);
      if (d < reach && d < best_d - kTol && footprints_overlap(x, y, hl, hw)) {
        best_d = d;
        best = std::make_pair(&x, &y);
      }
    }
  }
  if (!best) return std::nullopt;
  ConflictPoint cp;
  cp.point = 0.5 * (best->first->c + best->second->c);
  cp.arclength_on_i = best->first->s;
  cp.arclength_on_j = best->second->s;
  cp.delta_ij = (cp.arclength_on_j - pj.stop_line) - (cp.arclength_on_i - pi.stop_line);
  return cp;
}

double distance_to_arrival(const Path& path, double r) {
  if (!(r >= 0.0) || r > path.total_length) {
    throw std::out_of_range(
        fmt::format("position {} outside path {} [0, {}]", r, path.name, path.total_length));
  }
  return path.stop_line - r;
}

const Link& RoadNetwork::link(LinkId id) const { return links_.at(static_cast<std::size_t>(id)); }
const Path& RoadNetwork::path(PathId id) const { return paths_.at(static_cast<std::size_t>(id)); }
const Intersection& RoadNetwork::intersection(IntersectionId id) const {
  return intersections_.at(static_cast<std::size_t>(id));
}

PathId RoadNetwork::path_for(IntersectionId node, Heading heading, Turn turn) const {
  return intersection(node).paths.at(static_cast<std::size_t>(heading) * 3 +
                                     static_cast<std::size_t>(turn));
}

std::optional<PathId> RoadNetwork::next_path(PathId current, Turn turn) const {
  const Path& p = path(current);
  const Link& out = link(p.to_link);
  if (!out.downstream) {
    return std::nullopt;
  }
  return path_for(*out.downstream, out.heading, turn);
}

LinkId RoadNetwork::entry_link(IntersectionId node, Heading heading) const {
  return intersection(node).approach.at(static_cast<std::size_t>(heading));
}

const std::optional<ConflictPoint>& RoadNetwork::conflict(PathId a, PathId b) const {
  const Path& pa = path(a);
  const Path& pb = path(b);
  if (pa.intersection != pb.intersection) {
    return kNoConflict;
  }
  const auto& table = conflict_table_[static_cast<std::size_t>(pa.intersection)];
  const auto n = intersection(pa.intersection).paths.size();
  return table[static_cast<std::size_t>(local_index_[a]) * n +
               static_cast<std::size_t>(local_index_[b])];
}

void RoadNetwork::validate() const {
  if (intersections_.empty()) {
    throw ConfigError("network.intersections", "network has no intersections");
  }
  for (const Link& l : links_) {
    if (!(l.length > 0.0)) {
      throw ConfigError("network.links", fmt::format("link {} has non-positive length", l.name));
    }
  }
  for (const Intersection& node : intersections_) {
    int approaches = 0;
    for (LinkId id : node.approach) {
      if (id >= 0 && id < static_cast<LinkId>(links_.size())) {
        ++approaches;
      }
    }
    if (approaches < 2) {
      throw ConfigError("network.intersections",
                        fmt::format("intersection {} has fewer than two approaches", node.id));
    }
  }
  for (const Path& p : paths_) {
    const auto nlinks = static_cast<LinkId>(links_.size());
    if (p.from_link < 0 || p.from_link >= nlinks || p.to_link < 0 || p.to_link >= nlinks) {
      throw ConfigError("network.paths", fmt::format("path {} references a missing link", p.name));
    }
    if (p.polyline.points().size() < 2 ||
        std::abs(p.polyline.length() - p.total_length) > 1e-6) {
      throw ConfigError("network.paths", fmt::format("path {} has inconsistent length", p.name));
    }
  }
}

void NetworkConfig::validate() const {
  if (positions.empty() && intersections < 1) {
    throw ConfigError("network.intersections", "at least one intersection is required");
  }
  require_positive(lane_width, "network.lane_width");
  require_positive(entry_length, "network.entry_length");
  require_positive(exit_length, "network.exit_length");
  require_positive(cross_length, "network.cross_length");
  require_positive(speed_limit, "network.speed_limit");
  if (turn_segments < 1) {
    throw ConfigError("network.turn_segments", "must be at least 1");
  }
  require_positive(design_length, "network.design_length");
  if (!(design_width >= 0.0)) throw ConfigError("network.design_width", "must be non-negative");

  std::vector<double> ys = positions;
  if (ys.empty()) {
    require_positive(spacing, "network.spacing");
    for (int k = 0; k < intersections; ++k) {
      ys.push_back(k * spacing);
    }
  }
  const double half = lane_width;
  const char* spacing_field = positions.empty() ? "network.spacing" : "network.positions";
  for (std::size_t k = 1; k < ys.size(); ++k) {
    if (!(ys[k] - ys[k - 1] - 2.0 * half > 0.0)) {
      throw ConfigError(spacing_field,
                        fmt::format("intersections {} and {} leave a zero-length link", k - 1, k));
    }
  }
}

RoadNetwork build_network(const NetworkConfig& config) {
  config.validate();
  std::vector<double> ys = config.positions;
  if (ys.empty()) {
    for (int k = 0; k < config.intersections; ++k) ys.push_back(k * config.spacing);
  }
  const double half = config.lane_width;
  const double off = config.lane_width / 2.0;

  RoadNetwork net;
  const int n = static_cast<int>(ys.size());
  auto add_link = [&](std::string name, Heading h, Vec2 start, Vec2 end,
                      std::optional<IntersectionId> up, std::optional<IntersectionId> down) {
    Link l;
    l.id = static_cast<LinkId>(net.links_.size());
    l.name = std::move(name);
    l.heading = h;
    l.start = start;
    l.end = end;
    l.length = distance(start, end);
    l.speed_limit = config.speed_limit;
    l.upstream = up;
    l.downstream = down;
    net.links_.push_back(l);
    return l.id;
  };

  net.intersections_.resize(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    auto& node = net.intersections_[static_cast<std::size_t>(k)];
    node.id = k;
    node.center = {0.0, ys[static_cast<std::size_t>(k)]};
  }

  // Corridor links; index k sits between intersection k-1 and k.
  std::vector<LinkId> nb(static_cast<std::size_t>(n) + 1);
  std::vector<LinkId> sb(static_cast<std::size_t>(n) + 1);
  for (int k = 0; k <= n; ++k) {
    const double y_lo = k == 0 ? ys.front() - half - config.entry_length : ys[k - 1] + half;
    const double y_hi = k == n ? ys.back() + half + config.exit_length : ys[k] - half;
    std::optional<IntersectionId> below = k == 0 ? std::nullopt : std::optional<int>(k - 1);
    std::optional<IntersectionId> above = k == n ? std::nullopt : std::optional<int>(k);
    nb[k] = add_link(fmt::format("NB{}", k), Heading::North, {off, y_lo}, {off, y_hi}, below, above);
  }
  for (int k = 0; k <= n; ++k) {
    const double y_lo = k == 0 ? ys.front() - half - config.exit_length : ys[k - 1] + half;
    const double y_hi = k == n ? ys.back() + half + config.entry_length : ys[k] - half;
    std::optional<IntersectionId> below = k == 0 ? std::nullopt : std::optional<int>(k - 1);
    std::optional<IntersectionId> above = k == n ? std::nullopt : std::optional<int>(k);
    sb[k] = add_link(fmt::format("SB{}", k), Heading::South, {-off, y_hi}, {-off, y_lo}, above, below);
  }
  for (int k = 0; k < n; ++k) {
    auto& node = net.intersections_[static_cast<std::size_t>(k)];
    const double y = ys[k];
    const double far = half + config.cross_length;
    const double out = half + config.exit_length;
    node.approach[static_cast<int>(Heading::North)] = nb[k];
    node.exit[static_cast<int>(Heading::North)] = nb[k + 1];
    node.approach[static_cast<int>(Heading::South)] = sb[k + 1];
    node.exit[static_cast<int>(Heading::South)] = sb[k];
    node.approach[static_cast<int>(Heading::East)] =
        add_link(fmt::format("EB{}in", k), Heading::East, {-far, y - off}, {-half, y - off},
                 std::nullopt, k);
    node.exit[static_cast<int>(Heading::East)] =
        add_link(fmt::format("EB{}out", k), Heading::East, {half, y - off}, {out, y - off}, k,
                 std::nullopt);
    node.approach[static_cast<int>(Heading::West)] =
        add_link(fmt::format("WB{}in", k), Heading::West, {far, y + off}, {half, y + off},
                 std::nullopt, k);
    node.exit[static_cast<int>(Heading::West)] =
        add_link(fmt::format("WB{}out", k), Heading::West, {-half, y + off}, {-out, y + off}, k,
                 std::nullopt);
  }

  for (auto& node : net.intersections_) {
    for (int hi = 0; hi < 4; ++hi) {
      for (int ti = 0; ti < 3; ++ti) {
        const auto heading = static_cast<Heading>(hi);
        const auto turn = static_cast<Turn>(ti);
        const Heading out_heading = turned(heading, turn);
        const Link& in = net.links_[static_cast<std::size_t>(node.approach[hi])];
        const Link& out = net.links_[static_cast<std::size_t>(node.exit[static_cast<int>(out_heading)])];
        const Vec2 entry = box_entry(node.center, heading, config.lane_width);
        const Vec2 exit = box_exit(node.center, out_heading, config.lane_width);

        std::vector<Vec2> pts{in.start, entry};
        if (turn != Turn::Straight) {
          Vec2 control = node.center;
          if (turn == Turn::Right) {
            // Corner where the two lane centre lines meet.
            const bool vertical_in = heading == Heading::North || heading == Heading::South;
            control = vertical_in ? Vec2{entry.x, exit.y} : Vec2{exit.x, entry.y};
          }
          auto curve = sample_quadratic_bezier(entry, control, exit, config.turn_segments);
          pts.insert(pts.end(), curve.begin() + 1, curve.end());
        } else {
          pts.push_back(exit);
        }
        pts.push_back(out.end);

        Path p;
        p.id = static_cast<PathId>(net.paths_.size());
        p.name = fmt::format("I{}-{}{}", node.id, to_string(heading), to_string(turn));
        p.intersection = node.id;
        p.from_link = in.id;
        p.to_link = out.id;
        p.heading = heading;
        p.turn = turn;
        p.polyline = Polyline(std::move(pts));
        p.total_length = p.polyline.length();
        p.stop_line = in.length;
        p.box_exit = p.total_length - out.length;
        p.speed_limit = std::min(in.speed_limit, out.speed_limit);
        net.local_index_.push_back(static_cast<int>(node.paths.size()));
        node.paths.push_back(p.id);
        net.paths_.push_back(std::move(p));
      }
    }
  }

  net.conflict_table_.resize(net.intersections_.size());
  for (const auto& node : net.intersections_) {
    auto& table = net.conflict_table_[static_cast<std::size_t>(node.id)];
    table.resize(node.paths.size() * node.paths.size());
    for (std::size_t a = 0; a < node.paths.size(); ++a) {
      for (std::size_t b = 0; b < node.paths.size(); ++b) {
        const Path& pa = net.paths_[static_cast<std::size_t>(node.paths[a])];
        const Path& pb = net.paths_[static_cast<std::size_t>(node.paths[b])];
        auto cp = conflict_point(pa, pb);
        if (!cp && a < b) {
          cp = footprint_conflict(pa, pb, config.design_length, config.design_width);
        } else if (!cp && a > b) {
          // Mirror of the (b, a) entry.
          if (const auto& m = table[b * node.paths.size() + a]) {
            cp = ConflictPoint{m->point, m->arclength_on_j, m->arclength_on_i, -m->delta_ij, 0.0};
          }
        }
        table[a * node.paths.size() + b] = cp;
      }
    }
  }

  net.validate();
  return net;
}

}  // namespace slotsim
