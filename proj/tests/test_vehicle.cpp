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

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "slotsim/vehicle.hpp"

using namespace slotsim;

TEST(StepVehicle, UniformMotion) {
  VehicleState s;
  s.v = 10;
  const auto n = step_vehicle(s, DriveCommand::accel(0.0), 0.1, {});
  EXPECT_DOUBLE_EQ(n.r, 1.0);
  EXPECT_DOUBLE_EQ(n.v, 10.0);
}

TEST(StepVehicle, NeverReverses) {
  VehicleState s;
  s.r = 5.0;
  const auto n = step_vehicle(s, DriveCommand::accel(-2.0), 0.1, {});
  EXPECT_DOUBLE_EQ(n.v, 0.0);
  EXPECT_DOUBLE_EQ(n.r, 5.0);
}

TEST(StepVehicle, SpeedTargetClampArithmetic) {
  VehicleState s;
  s.v = 10;
  ActuatorLimits lim;
  lim.a_min = -4.0;
  const auto cmd = DriveCommand::speed(9.9);
  EXPECT_NEAR(resolve_acceleration(s, cmd, 0.1, lim), -1.0, 1e-12);
  EXPECT_NEAR(step_vehicle(s, cmd, 0.1, lim).v, 9.9, 1e-12);
  // Far target saturates at the comfort limit.
  EXPECT_DOUBLE_EQ(resolve_acceleration(s, DriveCommand::speed(0.0), 0.1, lim), -4.0);
}

TEST(StepVehicle, StopsMidStepWithoutOvershoot) {
  VehicleState s;
  s.v = 0.1;
  const auto n = step_vehicle(s, DriveCommand::accel(-4.0), 0.1, {});
  EXPECT_DOUBLE_EQ(n.v, 0.0);
  // v^2 / (2 * 4)
  EXPECT_NEAR(n.r, 0.1 * 0.1 / 8.0, 1e-12);
}

TEST(StepVehicle, SpeedCapped) {
  VehicleState s;
  s.v = 14.9;
  ActuatorLimits lim;
  const auto n = step_vehicle(s, DriveCommand::accel(3.0), 0.1, lim);
  EXPECT_DOUBLE_EQ(n.v, lim.v_max);
}

TEST(StepVehicle, NonFiniteCommandCoasts) {
  VehicleState s;
  s.v = 8;
  const auto n =
      step_vehicle(s, DriveCommand::accel(std::numeric_limits<double>::quiet_NaN()), 0.1, {});
  EXPECT_DOUBLE_EQ(n.v, 8.0);
  EXPECT_DOUBLE_EQ(n.a, 0.0);
}

TEST(HumanAdapter, LinearMap) {
  ActuatorLimits lim;
  lim.a_max = 3;
  lim.a_min = -4;
  auto accel = [&](double th, double br) {
    return std::get<TargetAccel>(human_input_adapter({th, br, 0}, lim).target).value;
  };
  EXPECT_DOUBLE_EQ(accel(0, 0), 0.0);
  EXPECT_DOUBLE_EQ(accel(1, 0), 3.0);
  EXPECT_DOUBLE_EQ(accel(0.5, 0.5), -0.5);
  EXPECT_EQ(human_input_adapter({}, lim).source, CommandSource::Human);
}

// Follower at the safe speed reacts after `reaction_time` and then brakes at
// `decel` behind a leader that brakes at the same rate from t = 0. The
// bumper gap must not drop below the standstill gap.
TEST(SafeFollowSpeed, NoCollisionUnderWorstCaseBraking) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> gap_d(0.0, 80.0), vl_d(0.0, 20.0);
  FollowGuard g;
  for (int n = 0; n < 500; ++n) {
    const double gap0 = gap_d(rng);
    const double vl0 = vl_d(rng);
    const double v0 = safe_follow_speed(gap0, vl0, g);
    ASSERT_GE(v0, 0.0);
    double xf = 0, vf = v0, xl = gap0, vl = vl0, t = 0;
    const double h = 1e-3;
    double min_gap = gap0;
    while ((vf > 0 || vl > 0) && t < 60) {
      const double af = t < g.reaction_time ? 0.0 : -g.decel;
      vl = std::max(0.0, vl - g.decel * h);
      vf = std::max(0.0, vf + af * h);
      xl += vl * h;
      xf += vf * h;
      t += h;
      min_gap = std::min(min_gap, xl - xf);
    }
    if (v0 > 0) EXPECT_GE(min_gap, std::min(gap0, g.standstill_gap) - 0.05) << gap0 << " " << vl0;
  }
}

TEST(SafeFollowSpeed, ZeroInsideStandstillGap) {
  FollowGuard g;
  EXPECT_DOUBLE_EQ(safe_follow_speed(1.0, 0.0, g), 0.0);
  EXPECT_GT(safe_follow_speed(50.0, 0.0, g), 0.0);
  EXPECT_LT(safe_follow_speed(10.0, 5.0, g), safe_follow_speed(20.0, 5.0, g));
}
