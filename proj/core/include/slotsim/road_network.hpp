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

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "slotsim/geometry.hpp"

namespace slotsim {

using LinkId = int;
using PathId = int;
using IntersectionId = int;

/// Direction of travel. The corridor runs south to north along +y.
enum class Heading { North = 0, South = 1, East = 2, West = 3 };
enum class Turn { Left = 0, Straight = 1, Right = 2 };

const char* to_string(Heading h);
const char* to_string(Turn t);
Heading turned(Heading h, Turn t);
Vec2 unit_vector(Heading h);

/// One directed single-lane road segment.
struct Link {
  LinkId id{-1};
  std::string name;
  Heading heading{Heading::North};
  Vec2 start;
  Vec2 end;
  double length{0.0};
  double speed_limit{15.0};
  std::optional<IntersectionId> upstream;    // intersection the link leaves
  std::optional<IntersectionId> downstream;  // intersection the link feeds
};

struct Intersection {
  IntersectionId id{-1};
  Vec2 center;
  /// Indexed by static_cast<int>(Heading) of the travel direction.
  std::array<LinkId, 4> approach{};
  std::array<LinkId, 4> exit{};
  std::vector<PathId> paths;
};

/// A movement through one intersection: approach link, box connector, exit link.
///
/// Arclength 0 is the upstream end of the approach link; `stop_line` is the
/// approach link's end and `box_exit` the start of the exit link.
struct Path {
  PathId id{-1};
  std::string name;
  IntersectionId intersection{-1};
  LinkId from_link{-1};
  LinkId to_link{-1};
  Heading heading{Heading::North};
  Turn turn{Turn::Straight};
  Polyline polyline;
  double total_length{0.0};
  double stop_line{0.0};
  double box_exit{0.0};
  double speed_limit{15.0};
};

struct ConflictPoint {
  Vec2 point;
  double arclength_on_i{0.0};
  double arclength_on_j{0.0};
  /// (stop-line-to-point distance on j) - (stop-line-to-point distance on i).
  double delta_ij{0.0};
  /// Length of path i that runs collinear with path j starting at the point.
  /// Zero for a clean crossing; the approach length for a shared approach.
  double shared_length{0.0};
};

struct NetworkConfig {
  int intersections{4};
  double spacing{200.0};
  /// Optional explicit intersection positions along the corridor (metres).
  std::vector<double> positions;
  double lane_width{3.5};
  double entry_length{200.0};
  double exit_length{200.0};
  double cross_length{200.0};
  double speed_limit{15.0};
  int turn_segments{12};
  /// Design vehicle footprint. Paths whose centrelines never cross still
  /// conflict when two such footprints placed on them can overlap. A zero
  /// width disables the check.
  double design_length{4.5};
  double design_width{1.8};

  /// Throws ConfigError naming the offending `network.*` field.
  void validate() const;
};

/// Immutable corridor network with a precomputed conflict table.
class RoadNetwork {
 public:
  const std::vector<Link>& links() const { return links_; }
  const std::vector<Intersection>& intersections() const { return intersections_; }
  const std::vector<Path>& paths() const { return paths_; }

  const Link& link(LinkId id) const;
  const Path& path(PathId id) const;
  const Intersection& intersection(IntersectionId id) const;

  PathId path_for(IntersectionId node, Heading heading, Turn turn) const;
  /// Path taken at the intersection fed by `current.to_link`, if any.
  std::optional<PathId> next_path(PathId current, Turn turn) const;
  /// Corridor-boundary link where traffic heading `heading` enters, for
  /// the given intersection (corridor ends for North/South, cross streets
  /// for East/West).
  LinkId entry_link(IntersectionId node, Heading heading) const;

  /// Cached conflict point between two paths of the same intersection.
  const std::optional<ConflictPoint>& conflict(PathId a, PathId b) const;
  bool conflicts(PathId a, PathId b) const { return conflict(a, b).has_value(); }

  /// Checks every structural invariant; throws ConfigError on violation.
  void validate() const;

 private:
  friend RoadNetwork build_network(const NetworkConfig& config);

  std::vector<Link> links_;
  std::vector<Intersection> intersections_;
  std::vector<Path> paths_;
  std::vector<int> local_index_;  // path id -> index within its intersection
  std::vector<std::vector<std::optional<ConflictPoint>>> conflict_table_;
  static const std::optional<ConflictPoint> kNoConflict;
};

RoadNetwork build_network(const NetworkConfig& config);

/// First intersection of two polylines by arclength on `pi`, or empty.
std::optional<ConflictPoint> conflict_point(const Path& pi, const Path& pj);

/// Closest approach of two non-crossing paths near their intersection box,
/// if footprints of `length` x `width` centred on them can overlap. Sampled
/// every `step` metres from one length before the stop line to one length
/// past the box exit.
std::optional<ConflictPoint> footprint_conflict(const Path& pi, const Path& pj, double length,
                                                double width, double step = 0.25);

/// Signed arclength from `r` to the stop line; negative once past it.
/// Throws std::out_of_range when `r` is outside [0, total_length].
double distance_to_arrival(const Path& path, double r);

}  // namespace slotsim
