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

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "slotsim/geometry.hpp"
#include "slotsim/road_network.hpp"
#include "slotsim/slot_geometry.hpp"

namespace slotsim {

/// Pinhole camera. `R`, `t` map a reference frame into the AR (camera) frame:
/// x right, y down, z forward. The stored extrinsics of a loaded model are the
/// windshield mount relative to the vehicle frame (x forward, y left, z up);
/// `with_pose` composes them with an ego pose to obtain world extrinsics.
struct CameraModel {
  Eigen::Matrix3d R{Eigen::Matrix3d::Identity()};
  Eigen::Vector3d t{Eigen::Vector3d::Zero()};
  double f{0.004};
  double d_x{4e-6};
  double d_y{4e-6};
  double u_0{640.0};
  double v_0{360.0};
  int image_w{1280};
  int image_h{720};
  double z_near{0.5};

  /// Throws ConfigError on a non-orthonormal R, non-positive optics or a
  /// principal point outside the image.
  void validate() const;

  /// Forward-looking windshield mount at `eye_height` metres.
  static CameraModel canonical(double eye_height = 1.2);
  /// Reads a camera config file; see config/camera_default.json.
  static CameraModel from_json_text(const std::string& text);
  static CameraModel load(const std::string& path);
};

/// Planar ego pose in the world frame; heading counter-clockwise from +x.
struct Pose2 {
  Vec2 position;
  double heading{0.0};
};

/// Mount extrinsics composed with `pose`, so `R`, `t` map world points.
CameraModel with_pose(const CameraModel& mount, const Pose2& pose);

/// p_a = R * p_w + t.
Eigen::Vector3d world_to_ar_frame(const Eigen::Vector3d& p_w, const CameraModel& cam);

/// Forward pinhole map. Empty when z_a <= z_near.
std::optional<Eigen::Vector2d> ar_frame_to_image(const Eigen::Vector3d& p_a,
                                                 const CameraModel& cam);

/// Back-projection of pixel (u, v) to depth z_a:
///   p_a = [[z*d_x/f, 0, -u_0*z*d_x/f], [0, z*d_y/f, -v_0*z*d_y/f], [0, 0, z]] * (u, v, 1).
Eigen::Vector3d image_to_ar_frame(const Eigen::Vector2d& uv, double z_a, const CameraModel& cam);

struct ProjectedQuad {
  VehicleId ref_id{-1};
  SlotAvailability availability{SlotAvailability::UnavailableRed};
  /// Image-plane polygon after clipping; four corners when fully visible.
  std::vector<Eigen::Vector2d> corners;
};

/// Road-plane corners of a slot rectangle laid along `ego_path`, ordered
/// rear-right, front-right, front-left, rear-left. Arclengths beyond the
/// path ends extend along the end tangents.
std::vector<Eigen::Vector3d> slot_corners_world(const SlotGeometry& slot, const Path& ego_path);

/// Convex polygon clip of `poly` against the half-space a.x + b.y <= c.
std::vector<Eigen::Vector2d> clip_polygon(const std::vector<Eigen::Vector2d>& poly, double a,
                                          double b, double c);

/// Projects a slot rectangle. `cam` must carry world extrinsics (see
/// `with_pose`). Clips against the near plane and the image bounds; empty when
/// nothing remains visible.
std::optional<ProjectedQuad> project_slot(const SlotGeometry& slot, const Path& ego_path,
                                          const CameraModel& cam);

}  // namespace slotsim
