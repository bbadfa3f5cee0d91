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

#include "slotsim/ar_projection.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <Eigen/Geometry>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "slotsim/errors.hpp"

namespace slotsim {

namespace {

constexpr double kOrthoTol = 1e-9;

// Vehicle frame (x forward, y left, z up) to camera axes (x right, y down, z forward).
Eigen::Matrix3d vehicle_to_camera_axes() {
  Eigen::Matrix3d m;
  m << 0, -1, 0,
       0, 0, -1,
       1, 0, 0;
  return m;
}

Eigen::Vector3d lift(Vec2 p, double z = 0.0) { return {p.x, p.y, z}; }

}  // namespace

void CameraModel::validate() const {
  if (!R.allFinite() || !t.allFinite()) {
    throw ConfigError("camera.R", "extrinsics must be finite");
  }
  const double ortho = (R.transpose() * R - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
  if (ortho > kOrthoTol) {
    throw ConfigError("camera.R", fmt::format("not orthonormal (max |R^T R - I| = {:.3e})", ortho));
  }
  if (R.determinant() < 0.0) {
    throw ConfigError("camera.R", "must be a proper rotation (det = +1)");
  }
  if (!(f > 0.0)) throw ConfigError("camera.focal_length", "must be positive");
  if (!(d_x > 0.0) || !(d_y > 0.0)) throw ConfigError("camera.pixel_size", "must be positive");
  if (image_w <= 0 || image_h <= 0) throw ConfigError("camera.image_size", "must be positive");
  if (!(u_0 >= 0.0 && u_0 <= image_w && v_0 >= 0.0 && v_0 <= image_h)) {
    throw ConfigError("camera.principal_point", "must lie inside the image");
  }
  if (!(z_near > 0.0)) throw ConfigError("camera.z_near", "must be positive");
}

CameraModel CameraModel::canonical(double eye_height) {
  CameraModel cam;
  cam.R = vehicle_to_camera_axes();
  cam.t = -cam.R * Eigen::Vector3d(0.0, 0.0, eye_height);
  return cam;
}

CameraModel CameraModel::from_json_text(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("camera", e.what());
  }
  CameraModel cam = canonical();
  try {
    cam.f = j.value("focal_length", cam.f);
    if (j.contains("pixel_size")) {
      cam.d_x = j["pixel_size"].at(0).get<double>();
      cam.d_y = j["pixel_size"].at(1).get<double>();
    }
    if (j.contains("principal_point")) {
      cam.u_0 = j["principal_point"].at(0).get<double>();
      cam.v_0 = j["principal_point"].at(1).get<double>();
    }
    if (j.contains("image_size")) {
      cam.image_w = j["image_size"].at(0).get<int>();
      cam.image_h = j["image_size"].at(1).get<int>();
    }
    cam.z_near = j.value("z_near", cam.z_near);
    if (j.contains("R")) {
      for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) cam.R(r, c) = j["R"].at(r).at(c).get<double>();
      }
      for (int r = 0; r < 3; ++r) cam.t(r) = j.at("t").at(r).get<double>();
    } else if (j.contains("mount")) {
      const auto& m = j["mount"];
      const double height = m.value("height", 1.2);
      const double forward = m.value("forward", 0.0);
      const double lateral = m.value("lateral", 0.0);
      const double pitch = m.value("pitch_deg", 0.0) * M_PI / 180.0;
      const double yaw = m.value("yaw_deg", 0.0) * M_PI / 180.0;
      // Positive pitch looks down, positive yaw looks left.
      const Eigen::Matrix3d body =
          (Eigen::AngleAxisd(yaw, Eigen::Vector3d::UnitZ()) *
           Eigen::AngleAxisd(pitch, Eigen::Vector3d::UnitY()))
              .toRotationMatrix();
      cam.R = vehicle_to_camera_axes() * body.transpose();
      cam.t = -cam.R * Eigen::Vector3d(forward, lateral, height);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("camera", e.what());
  }
  cam.validate();
  return cam;
}

CameraModel CameraModel::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("camera", fmt::format("cannot open {}", path));
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str());
}

CameraModel with_pose(const CameraModel& mount, const Pose2& pose) {
  const Eigen::Matrix3d world_to_vehicle =
      Eigen::AngleAxisd(-pose.heading, Eigen::Vector3d::UnitZ()).toRotationMatrix();
  CameraModel cam = mount;
  cam.R = mount.R * world_to_vehicle;
  cam.t = mount.t - cam.R * lift(pose.position);
  return cam;
}

Eigen::Vector3d world_to_ar_frame(const Eigen::Vector3d& p_w, const CameraModel& cam) {
  return cam.R * p_w + cam.t;
}

std::optional<Eigen::Vector2d> ar_frame_to_image(const Eigen::Vector3d& p_a,
                                                 const CameraModel& cam) {
  if (!(p_a.z() > cam.z_near)) {
    return std::nullopt;
  }
  return Eigen::Vector2d((cam.f / cam.d_x) * (p_a.x() / p_a.z()) + cam.u_0,
                         (cam.f / cam.d_y) * (p_a.y() / p_a.z()) + cam.v_0);
}

Eigen::Vector3d image_to_ar_frame(const Eigen::Vector2d& uv, double z_a, const CameraModel& cam) {
  Eigen::Matrix3d m;
  m << z_a * cam.d_x / cam.f, 0.0, -cam.u_0 * z_a * cam.d_x / cam.f,
       0.0, z_a * cam.d_y / cam.f, -cam.v_0 * z_a * cam.d_y / cam.f,
       0.0, 0.0, z_a;
  return m * Eigen::Vector3d(uv.x(), uv.y(), 1.0);
}

std::vector<Eigen::Vector3d> slot_corners_world(const SlotGeometry& slot, const Path& ego_path) {
  const Polyline& line = ego_path.polyline;
  auto at = [&](double s) {
    const double len = line.length();
    const double sc = std::clamp(s, 0.0, len);
    const Vec2 tan = line.tangent_at(sc);
    const Vec2 base = line.point_at(sc) + (s - sc) * tan;
    const Vec2 left{-tan.y, tan.x};
    return std::pair{base, left};
  };
  const double rear = slot.r_s - slot.l_s / 2.0;
  const double front = slot.r_s + slot.l_s / 2.0;
  const double right_off = slot.x_s - slot.w_s / 2.0;
  const double left_off = slot.x_s + slot.w_s / 2.0;
  const auto [pr, nr] = at(rear);
  const auto [pf, nf] = at(front);
  return {lift(pr + right_off * nr), lift(pf + right_off * nf), lift(pf + left_off * nf),
          lift(pr + left_off * nr)};
}

std::vector<Eigen::Vector2d> clip_polygon(const std::vector<Eigen::Vector2d>& poly, double a,
                                          double b, double c) {
  std::vector<Eigen::Vector2d> out;
  if (poly.empty()) return out;
  auto value = [&](const Eigen::Vector2d& p) { return a * p.x() + b * p.y() - c; };
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Eigen::Vector2d& cur = poly[i];
    const Eigen::Vector2d& nxt = poly[(i + 1) % poly.size()];
    const double fc = value(cur);
    const double fn = value(nxt);
    if (fc <= 0.0) out.push_back(cur);
    if ((fc < 0.0 && fn > 0.0) || (fc > 0.0 && fn < 0.0)) {
      const double s = fc / (fc - fn);
      out.push_back(cur + s * (nxt - cur));
    }
  }
  return out;
}

std::optional<ProjectedQuad> project_slot(const SlotGeometry& slot, const Path& ego_path,
                                          const CameraModel& cam) {
  std::vector<Eigen::Vector3d> cam_pts;
  for (const auto& p : slot_corners_world(slot, ego_path)) {
    cam_pts.push_back(world_to_ar_frame(p, cam));
  }

  // Near-plane clip in the camera frame.
  std::vector<Eigen::Vector3d> near;
  for (std::size_t i = 0; i < cam_pts.size(); ++i) {
    const auto& cur = cam_pts[i];
    const auto& nxt = cam_pts[(i + 1) % cam_pts.size()];
    const double fc = cur.z() - cam.z_near;
    const double fn = nxt.z() - cam.z_near;
    if (fc > 0.0) near.push_back(cur);
    if ((fc > 0.0 && fn < 0.0) || (fc < 0.0 && fn > 0.0)) {
      const double s = fc / (fc - fn);
      Eigen::Vector3d q = cur + s * (nxt - cur);
      q.z() = cam.z_near * (1.0 + 1e-12);
      near.push_back(q);
    }
  }
  if (near.size() < 3) return std::nullopt;

  std::vector<Eigen::Vector2d> img;
  img.reserve(near.size());
  for (const auto& p : near) {
    img.push_back(Eigen::Vector2d((cam.f / cam.d_x) * (p.x() / p.z()) + cam.u_0,
                                  (cam.f / cam.d_y) * (p.y() / p.z()) + cam.v_0));
  }
  img = clip_polygon(img, -1.0, 0.0, 0.0);
  img = clip_polygon(img, 1.0, 0.0, cam.image_w);
  img = clip_polygon(img, 0.0, -1.0, 0.0);
  img = clip_polygon(img, 0.0, 1.0, cam.image_h);
  if (img.size() < 3) return std::nullopt;

  ProjectedQuad quad;
  quad.ref_id = slot.ref_vehicle;
  quad.availability = slot.availability;
  quad.corners = std::move(img);
  return quad;
}

}  // namespace slotsim
