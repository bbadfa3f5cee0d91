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

#include "slotsim/planner.hpp"

using namespace slotsim;

namespace {

RoadNetwork single() {
  NetworkConfig c;
  c.intersections = 1;
  return build_network(c);
}

// Forward simulation at 1 ms with the speed held in [0, v_limit]; arrival
// time by linear interpolation inside the crossing step.
std::optional<double> brute_eta(double v, double a, double d, double v_limit) {
  const double h = 1e-3;
  double x = 0, t = 0;
  while (t < 1000) {
    const double v_next = std::clamp(v + a * h, 0.0, std::max(v_limit, v));
    const double dx = 0.5 * (v + v_next) * h;
    if (x + dx >= d) return t + h * (d - x) / dx;
    x += dx;
    v = v_next;
    t += h;
    if (v == 0.0 && a <= 0.0) return std::nullopt;
  }
  return std::nullopt;
}

ReservationRecord held(VehicleId id, PathId path, int slot) {
  ReservationRecord r;
  r.vehicle = id;
  r.intersection = 0;
  r.path = path;
  r.slot = slot;
  return r;
}

}  // namespace

TEST(EstimateEta, Examples) {
  EXPECT_DOUBLE_EQ(estimate_eta(10, 0, 100, 15), 10.0);
  EXPECT_DOUBLE_EQ(estimate_eta(10, 1, 100, 15), 7.5);
  EXPECT_DOUBLE_EQ(estimate_eta(0, 0, 50, 15, 0.5), 100.0);
  EXPECT_DOUBLE_EQ(estimate_eta(7, 2, 0, 15), 0.0);
  EXPECT_THROW(estimate_eta(10, 0, -1, 15), std::invalid_argument);
}

TEST(EstimateEta, MatchesBruteForce) {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> vd(0.0, 15.0), ad(-3.0, 3.0), dd(1.0, 200.0);
  int compared = 0;
  for (int n = 0; n < 300; ++n) {
    const double v = vd(rng), a = ad(rng), d = dd(rng);
    const auto oracle = brute_eta(v, a, d, 15.0);
    const double eta = estimate_eta(v, a, d, 15.0, 0.5);
    if (!oracle || (std::abs(a) < 1e-6 && v < 0.5)) {
      EXPECT_DOUBLE_EQ(eta, d / 0.5);  // stops short: floor fallback
      continue;
    }
    EXPECT_NEAR(eta, *oracle, 0.01) << v << " " << a << " " << d;
    ++compared;
  }
  EXPECT_GT(compared, 150);
}

TEST(Predecessor, MinAndMaxRules) {
  EXPECT_DOUBLE_EQ(eta_with_predecessor(8, 9.0, 1.2), 8.0);
  EXPECT_DOUBLE_EQ(eta_with_predecessor(12, 9.0, 1.2), 10.2);
  EXPECT_DOUBLE_EQ(eta_with_predecessor(12, std::nullopt, 1.2), 12.0);
  EXPECT_DOUBLE_EQ(eta_with_predecessor(8, 9.0, 1.2, PredecessorRule::Max), 10.2);
}

TEST(SlotPoolMax, Examples) {
  const auto net = single();
  SlotPool pool;
  const PathId ns = net.path_for(0, Heading::North, Turn::Straight);
  const PathId es = net.path_for(0, Heading::East, Turn::Straight);
  EXPECT_EQ(slot_pool_max(pool, 0, {}), 0);
  pool.insert(held(1, es, 1));
  pool.insert(held(2, es, 3));
  EXPECT_EQ(slot_pool_max(pool, 0, {1, 2}), 3);
  // Only the vehicles named as conflicting count.
  EXPECT_EQ(slot_pool_max(pool, 0, {}), 0);
  EXPECT_EQ(slot_pool_max(pool, 0, {1}), 1);
  (void)ns;
}

TEST(MaybeReserve, TimeTriggerFirstSlot) {
  const auto net = single();
  SlotPool pool;
  PlannerParams p;
  const PathId ns = net.path_for(0, Heading::North, Turn::Straight);
  ReservationRequest req{5, ns, net.path(ns).stop_line - 160.0, std::nullopt};
  auto rec = maybe_reserve(req, {9.0, 160.0, 0.0}, p, pool, net, 0.0);
  ASSERT_TRUE(rec);
  EXPECT_EQ(rec->slot, 1);
  EXPECT_TRUE(rec->references.empty());
  // Holding a slot already: no second reservation.
  EXPECT_FALSE(maybe_reserve(req, {9.0, 160.0, 0.0}, p, pool, net, 0.1));
}

TEST(MaybeReserve, DistanceTriggerStacksOnConflict) {
  const auto net = single();
  SlotPool pool;
  PlannerParams p;
  const PathId ns = net.path_for(0, Heading::North, Turn::Straight);
  const PathId es = net.path_for(0, Heading::East, Turn::Straight);
  const PathId ss = net.path_for(0, Heading::South, Turn::Straight);
  pool.insert(held(7, es, 2));
  pool.insert(held(8, ss, 5));  // parallel, not conflicting
  ReservationRequest req{5, ns, net.path(ns).stop_line - 120.0, std::nullopt};
  auto rec = maybe_reserve(req, {15.0, 120.0, 0.0}, p, pool, net, 1.0);
  ASSERT_TRUE(rec);
  EXPECT_EQ(rec->slot, 3);
  EXPECT_EQ(rec->references, std::set<VehicleId>{7});
}

TEST(MaybeReserve, NoTriggerNoReservation) {
  const auto net = single();
  SlotPool pool;
  const PathId ns = net.path_for(0, Heading::North, Turn::Straight);
  ReservationRequest req{5, ns, 0.0, std::nullopt};
  EXPECT_FALSE(maybe_reserve(req, {15.0, 200.0, 0.0}, {}, pool, net, 0.0));
  EXPECT_EQ(pool.size(), 0u);
}

TEST(MaybeReserve, WaitsForPredecessor) {
  const auto net = single();
  SlotPool pool;
  const PathId ns = net.path_for(0, Heading::North, Turn::Straight);
  ReservationRequest req{5, ns, 100.0, VehicleId{4}};
  EXPECT_FALSE(maybe_reserve(req, {5.0, 100.0, 0.0}, {}, pool, net, 0.0));
  pool.insert(held(4, ns, 1));
  auto rec = maybe_reserve(req, {5.0, 100.0, 0.0}, {}, pool, net, 0.0);
  ASSERT_TRUE(rec);
  EXPECT_EQ(rec->slot, 2);  // same approach conflicts with itself
}

TEST(MaybeReserve, PastStopLineThrows) {
  const auto net = single();
  SlotPool pool;
  const PathId ns = net.path_for(0, Heading::North, Turn::Straight);
  ReservationRequest req{5, ns, net.path(ns).stop_line + 1.0, std::nullopt};
  EXPECT_THROW(maybe_reserve(req, {0.0, 0.0, 0.0}, {}, pool, net, 0.0), std::invalid_argument);
}

TEST(Release, ResetsAndUnlinks) {
  const auto net = single();
  SlotPool pool;
  const PathId ns = net.path_for(0, Heading::North, Turn::Straight);
  const PathId es = net.path_for(0, Heading::East, Turn::Straight);
  pool.insert(held(1, es, 1));
  auto rec = maybe_reserve({2, ns, 100.0, std::nullopt}, {5, 100, 0}, {}, pool, net, 0.0);
  ASSERT_TRUE(rec);
  ASSERT_EQ(rec->references.count(1), 1u);
  release_on_exit(1, 0, pool);
  EXPECT_EQ(pool.find(1, 0), nullptr);
  EXPECT_TRUE(pool.find(2, 0)->references.empty());
  // Missing record: no-op.
  release_on_exit(1, 0, pool);
  EXPECT_EQ(pool.size(), 1u);
}

TEST(Release, ReservationsAtTwoNodesCoexist) {
  NetworkConfig c;
  c.intersections = 2;
  const auto net = build_network(c);
  SlotPool pool;
  ReservationRecord a = held(0, net.path_for(0, Heading::North, Turn::Straight), 4);
  ReservationRecord b = held(0, net.path_for(1, Heading::North, Turn::Straight), 3);
  b.intersection = 1;
  pool.insert(a);
  pool.insert(b);
  EXPECT_EQ(pool.held_by(0), (std::vector<IntersectionId>{0, 1}));
  release_on_exit(0, 0, pool);
  EXPECT_EQ(pool.held_by(0), (std::vector<IntersectionId>{1}));
  EXPECT_EQ(pool.find(0, 1)->slot, 3);
}
