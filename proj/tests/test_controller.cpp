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

#include <random>

#include "slotsim/controller.hpp"
#include "slotsim/errors.hpp"

using namespace slotsim;

namespace {

ControllerParams params(double k = 0.5, double dt = 0.1) {
  ControllerParams p;
  p.k = k;
  p.dt = dt;
  p.v_max = 30;
  return p;
}

GainTable grid() {
  std::vector<double> ve{0, 10}, vl{0, 10, 20}, gap{-20, 0};
  std::vector<Gains> vals;
  for (std::size_t i = 0; i < ve.size(); ++i)
    for (std::size_t j = 0; j < vl.size(); ++j)
      for (std::size_t g = 0; g < gap.size(); ++g)
        vals.push_back({0.05 + 0.1 * i + 0.01 * j + 0.001 * g, 1.0 + i + 2.0 * j + 4.0 * g});
  return GainTable(ve, vl, gap, vals);
}

ReferenceSlot ref_slot(VehicleId id, int slot, double r_s, double v) {
  ReferenceSlot rs;
  rs.ref = id;
  rs.slot = slot;
  rs.geometry.ref_vehicle = id;
  rs.geometry.r_s = r_s;
  rs.v_ref = v;
  return rs;
}

}  // namespace

TEST(TargetSpeed, FixedPoint) {
  const auto p = params(0.45, 0.05);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> vd(0, 20), rd(-100, 100), td(0, 0.2);
  for (int n = 0; n < 1000; ++n) {
    const double v = vd(rng), tau = td(rng), r = rd(rng);
    const double r_slot = r + v * (p.t_h + tau);
    const auto out = target_speed(r, v, {r_slot, v, tau}, p, {0.45, 1.3});
    EXPECT_NEAR(out.raw, v, 1e-12);
  }
}

TEST(TargetSpeed, PositionTermExample) {
  const auto p = params();
  // position term +2 m, equal speeds: 10 - 0.5 * 2 * 0.1
  const double r_slot = 0 + 10 * (1.2 + 0.0) - 2.0;
  const auto out = target_speed(0.0, 10.0, {r_slot, 10.0, 0.0}, p, {0.5, 7.0});
  EXPECT_NEAR(out.value, 9.9, 1e-12);
  EXPECT_NEAR(position_error(0.0, 10.0, {r_slot, 10.0, 0.0}, 1.2), 2.0, 1e-12);
}

TEST(TargetSpeed, SpeedTermExample) {
  const auto p = params();
  const double r_slot = 12 * 1.2;  // position term 0
  const auto out = target_speed(0.0, 12.0, {r_slot, 10.0, 0.0}, p, {0.5, 1.0});
  EXPECT_NEAR(out.value, 11.9, 1e-12);
}

TEST(TargetSpeed, MonotoneInPositionError) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> vd(0, 15), ed(-50, 50), kd(0.05, 1.0), gd(0.1, 3.0),
      td(0, 0.2);
  for (int n = 0; n < 1000; ++n) {
    auto p = params(kd(rng), 0.05);
    const Gains g{p.k, gd(rng)};
    const double v = vd(rng), vj = vd(rng), tau = td(rng);
    const double e1 = ed(rng), e2 = e1 + 0.01 + std::abs(ed(rng));
    auto at = [&](double e) {
      const double r_slot = v * (p.t_h + tau) - e;
      return target_speed(0.0, v, {r_slot, vj, tau}, p, g).raw;
    };
    EXPECT_LT(at(e2), at(e1));
  }
}

TEST(TargetSpeed, ClampedButRawKept) {
  const auto p = params();
  const auto out = target_speed(0.0, 1.0, {-500.0, 1.0, 0.0}, p, {0.5, 1.0});
  EXPECT_LT(out.raw, 0.0);
  EXPECT_DOUBLE_EQ(out.value, 0.0);
}

TEST(ControllerParams, Validation) {
  ControllerParams p;
  EXPECT_NO_THROW(p.validate());
  p.alpha = 0.5;
  EXPECT_THROW(p.validate(), ConfigError);
  p = {};
  p.dt = 0;
  EXPECT_THROW(p.validate(), ConfigError);
}

TEST(GainTable, NodeIdentity) {
  const auto t = grid();
  const auto g = t.interpolate(10, 20, -20);
  EXPECT_DOUBLE_EQ(g.k, t.at(1, 2, 0).k);
  EXPECT_DOUBLE_EQ(g.gamma, t.at(1, 2, 0).gamma);
}

TEST(GainTable, MidpointIsMean) {
  const auto t = grid();
  const auto g = t.interpolate(10, 15, 0);
  EXPECT_DOUBLE_EQ(g.k, 0.5 * (t.at(1, 1, 1).k + t.at(1, 2, 1).k));
  EXPECT_DOUBLE_EQ(g.gamma, 0.5 * (t.at(1, 1, 1).gamma + t.at(1, 2, 1).gamma));
}

TEST(GainTable, ClampsOutside) {
  const auto t = grid();
  const auto g = t.interpolate(-5, 99, 50);
  EXPECT_DOUBLE_EQ(g.k, t.at(0, 2, 1).k);
}

// Independent oracle: weighted sum over the eight cell corners.
TEST(GainTable, MatchesCornerWeights) {
  const auto t = grid();
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> a(0, 10), b(0, 20), c(-20, 0);
  for (int n = 0; n < 200; ++n) {
    const double x = a(rng), y = b(rng), z = c(rng);
    const std::size_t j0 = y < 10 ? 0 : 1;
    const double wx = x / 10, wy = (y - 10.0 * j0) / 10, wz = (z + 20) / 20;
    double k = 0;
    for (int di = 0; di < 2; ++di)
      for (int dj = 0; dj < 2; ++dj)
        for (int dg = 0; dg < 2; ++dg) {
          const double w = (di ? wx : 1 - wx) * (dj ? wy : 1 - wy) * (dg ? wz : 1 - wz);
          k += w * t.at(di, j0 + dj, dg).k;
        }
    EXPECT_NEAR(t.interpolate(x, y, z).k, k, 1e-12);
  }
}

TEST(GainTable, JsonAndErrors) {
  const auto t = GainTable::from_json_text(
      R"({"v_ego":[0,10],"v_leader":[5],"gap":[0],"k":[0.3,0.5],"gamma":[1,2]})");
  EXPECT_DOUBLE_EQ(t.interpolate(5, 5, 0).k, 0.4);
  EXPECT_THROW(GainTable::from_json_text(R"({"v_ego":[0,10]})"), ConfigError);
  EXPECT_THROW(GainTable::from_json_text(
                   R"({"v_ego":[0,10],"v_leader":[5],"gap":[0],"k":[0.3],"gamma":[1]})"),
               ConfigError);
  EXPECT_THROW(GainTable::from_json_text(
                   R"({"v_ego":[10,0],"v_leader":[5],"gap":[0],"k":[0.3,0.5],"gamma":[1,2]})"),
               ConfigError);
  try {
    GainTable::from_json_text("{");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.field(), "gains");
  }
}

TEST(GainTable, DefaultFileLoads) {
  const auto t = GainTable::load(std::string(SLOTSIM_CONFIG_DIR) + "/gains_default.json");
  EXPECT_EQ(t.v_ego_axis().size(), 3u);
  EXPECT_EQ(t.v_leader_axis().size(), 3u);
  EXPECT_EQ(t.gap_axis().size(), 3u);
}

TEST(LookupGains, EmptyTableFallsBack) {
  const auto g = lookup_gains(GainTable{}, 1, 2, 3, {0.45, 1.0});
  EXPECT_DOUBLE_EQ(g.k, 0.45);
  EXPECT_DOUBLE_EQ(g.gamma, 1.0);
}

TEST(StepController, FirstSlotDrivesFree) {
  VehicleState ego;
  ego.v = 8;
  ReservationRecord rec;
  rec.slot = 1;
  ControllerParams p;
  const auto d = step_controller(ego, rec, {}, p, {});
  EXPECT_EQ(d.mode, ControlMode::FreeDrive);
  EXPECT_DOUBLE_EQ(d.target.value, p.v_max);
  EXPECT_FALSE(d.fault);
}

TEST(StepController, FollowsHighestSlotWithLawTarget) {
  VehicleState ego;
  ego.r = 50;
  ego.v = 10;
  ReservationRecord rec;
  rec.slot = 3;
  rec.references = {1, 2};
  ReferenceSlots refs;
  refs.slots = {ref_slot(1, 1, 90, 10), ref_slot(2, 2, 70, 10)};
  ControllerParams p;
  const auto d = step_controller(ego, rec, refs, p, {});
  EXPECT_EQ(d.mode, ControlMode::Follow);
  ASSERT_TRUE(d.leader);
  EXPECT_EQ(*d.leader, 2);
  EXPECT_DOUBLE_EQ(d.r_slot, 70.0);
  const auto expect = target_speed(50, 10, {70, 10, 0}, p, {p.k, p.gamma});
  EXPECT_DOUBLE_EQ(d.target.value, expect.value);
  ASSERT_TRUE(d.captured);
  EXPECT_DOUBLE_EQ(d.captured->spacing, 50.0 - 70.0);
}

TEST(StepController, CloserNonLeaderSlotBounds) {
  VehicleState ego;
  ego.r = 50;
  ego.v = 10;
  ReservationRecord rec;
  rec.slot = 3;
  ReferenceSlots refs;
  refs.slots = {ref_slot(1, 1, 55, 10), ref_slot(2, 2, 90, 10)};
  ControllerParams p;
  const auto d = step_controller(ego, rec, refs, p, {});
  EXPECT_EQ(*d.leader, 2);
  const auto bound = target_speed(50, 10, {55, 10, 0}, p, {p.k, p.gamma});
  EXPECT_DOUBLE_EQ(d.target.value, bound.value);
}

TEST(StepController, CapturedGainsReused) {
  VehicleState ego;
  ego.r = 50;
  ego.v = 10;
  ReservationRecord rec;
  rec.slot = 2;
  rec.initial = InitialConditions{0.0, 0.0, -40.0};
  ReferenceSlots refs;
  refs.slots = {ref_slot(1, 1, 70, 10)};
  const auto t = grid();
  const auto d = step_controller(ego, rec, refs, {}, t);
  EXPECT_FALSE(d.captured);
  EXPECT_DOUBLE_EQ(d.gains.k, t.at(0, 0, 0).k);
}

TEST(StepController, CrossedLeaderRevertsToFreeDrive) {
  VehicleState ego;
  ego.v = 10;
  ReservationRecord rec;
  rec.slot = 2;
  rec.references = {1};
  ReferenceSlots refs;
  refs.crossed = {1};
  const auto d = step_controller(ego, rec, refs, {}, {});
  EXPECT_EQ(d.mode, ControlMode::FreeDrive);
}

TEST(StepController, MissingSampleHolds) {
  VehicleState ego;
  ego.v = 7;
  ReservationRecord rec;
  rec.slot = 2;
  ReferenceSlots refs;
  refs.unseen = {1};
  const auto d = step_controller(ego, rec, refs, {}, {});
  EXPECT_EQ(d.mode, ControlMode::Hold);
  EXPECT_TRUE(d.fault);
  EXPECT_DOUBLE_EQ(d.target.value, 7.0);
  ReferenceSlots bad;
  bad.inconsistent = true;
  EXPECT_TRUE(step_controller(ego, rec, bad, {}, {}).fault);
}
