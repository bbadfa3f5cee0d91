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

#include <cmath>
#include <cstddef>
#include <vector>

namespace slotsim {

struct Vec2 {
  double x{0.0};
  double y{0.0};
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
inline Vec2 operator*(Vec2 a, double s) { return {s * a.x, s * a.y}; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }
inline double distance(Vec2 a, Vec2 b) { return norm(a - b); }

/// Open polyline parameterised by arclength.
///
/// Construction rejects fewer than two points and zero-length segments, so the
/// cumulative arclength table is strictly increasing.
class Polyline {
 public:
  Polyline() = default;
  explicit Polyline(std::vector<Vec2> points);

  const std::vector<Vec2>& points() const { return points_; }
  /// Arclength at each vertex; front() == 0, back() == length().
  const std::vector<double>& arclengths() const { return cumulative_; }
  double length() const { return cumulative_.empty() ? 0.0 : cumulative_.back(); }
  std::size_t segment_count() const { return points_.empty() ? 0 : points_.size() - 1; }

  /// Index of the segment containing arclength `s` (clamped to the ends).
  std::size_t segment_at(double s) const;
  Vec2 point_at(double s) const;
  /// Unit tangent at arclength `s`.
  Vec2 tangent_at(double s) const;
  /// Heading in radians, measured counter-clockwise from +x.
  double heading_at(double s) const;

 private:
  std::vector<Vec2> points_;
  std::vector<double> cumulative_;
};

/// Samples a quadratic Bezier curve into `segments` + 1 points (ends included).
std::vector<Vec2> sample_quadratic_bezier(Vec2 p0, Vec2 control, Vec2 p2, int segments);

}  // namespace slotsim
