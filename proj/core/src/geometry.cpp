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

#include "slotsim/geometry.hpp"

#include <algorithm>
#include <stdexcept>

namespace slotsim {

Polyline::Polyline(std::vector<Vec2> points) : points_(std::move(points)) {
  if (points_.size() < 2) {
    throw std::invalid_argument("polyline needs at least two points");
  }
  cumulative_.reserve(points_.size());
  cumulative_.push_back(0.0);
  for (std::size_t i = 1; i < points_.size(); ++i) {
    const double seg = distance(points_[i - 1], points_[i]);
    if (!(seg > 0.0)) {
      throw std::invalid_argument("polyline has a zero-length segment");
    }
    cumulative_.push_back(cumulative_.back() + seg);
  }
}

std::size_t Polyline::segment_at(double s) const {
  if (s <= 0.0) {
    return 0;
  }
  if (s >= length()) {
    return segment_count() - 1;
  }
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), s);
  return static_cast<std::size_t>(std::distance(cumulative_.begin(), it)) - 1;
}

Vec2 Polyline::point_at(double s) const {
  const std::size_t i = segment_at(s);
  const double s0 = cumulative_[i];
  const double seg = cumulative_[i + 1] - s0;
  const double t = std::clamp((s - s0) / seg, 0.0, 1.0);
  return points_[i] + t * (points_[i + 1] - points_[i]);
}

Vec2 Polyline::tangent_at(double s) const {
  const std::size_t i = segment_at(s);
  const Vec2 d = points_[i + 1] - points_[i];
  return (1.0 / norm(d)) * d;
}

double Polyline::heading_at(double s) const {
  const Vec2 t = tangent_at(s);
  return std::atan2(t.y, t.x);
}

std::vector<Vec2> sample_quadratic_bezier(Vec2 p0, Vec2 control, Vec2 p2, int segments) {
  std::vector<Vec2> out;
  out.reserve(static_cast<std::size_t>(segments) + 1);
  for (int k = 0; k <= segments; ++k) {
    const double t = static_cast<double>(k) / segments;
    const double u = 1.0 - t;
    out.push_back(u * u * p0 + 2.0 * u * t * control + t * t * p2);
  }
  // Exact endpoints so neighbouring links meet bit-for-bit.
  out.front() = p0;
  out.back() = p2;
  return out;
}

}  // namespace slotsim
