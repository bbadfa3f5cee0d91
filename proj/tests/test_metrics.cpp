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

#include "slotsim/fuel.hpp"
#include "slotsim/metrics.hpp"

using namespace slotsim;

TEST(Metrics, ConstantSpeedCorridor) {
  MetricsAccumulator acc;
  const double dt = 0.05;
  acc.spawn(1, 0.0);
  const int steps = static_cast<int>(800.0 / 10.0 / dt);
  for (int i = 0; i < steps; ++i) acc.observe(1, i * dt, 10.0, 0.5, dt);
  acc.exit(1, steps * dt);
  const auto* m = acc.find(1);
  ASSERT_NE(m, nullptr);
  EXPECT_NEAR(m->travel_time, 80.0, 1e-9);
  EXPECT_EQ(m->stops, 0);
  EXPECT_NEAR(m->distance, 800.0, 1e-6);
  EXPECT_NEAR(m->fuel, 40.0, 1e-6);
}

TEST(Metrics, FiveSecondHaltIsOneStop) {
  std::vector<double> v;
  const double dt = 0.05;
  for (int i = 0; i < 200; ++i) v.push_back(8.0);
  for (int i = 0; i < 100; ++i) v.push_back(0.0);
  for (int i = 0; i < 200; ++i) v.push_back(8.0);
  EXPECT_EQ(count_stops(v, dt), 1);

  MetricsAccumulator acc;
  acc.spawn(2, 0);
  for (std::size_t i = 0; i < v.size(); ++i) acc.observe(2, i * dt, v[i], 0.3, dt);
  EXPECT_EQ(acc.find(2)->stops, 1);
}

TEST(Metrics, ShortDipIsNoStop) {
  std::vector<double> v(100, 5.0);
  for (int i = 40; i < 55; ++i) v[i] = 0.05;  // 0.75 s
  EXPECT_EQ(count_stops(v, 0.05), 0);
  for (int i = 40; i < 62; ++i) v[i] = 0.05;  // 1.1 s
  EXPECT_EQ(count_stops(v, 0.05), 1);
}

// Threshold-scan oracle over random speed series.
TEST(Metrics, StopCountMatchesRunScan) {
  std::mt19937_64 rng(12);
  std::uniform_int_distribution<int> len(1, 60), pick(0, 1);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> v;
    int expected = 0;
    while (v.size() < 2000) {
      const bool low = pick(rng) == 1;
      const int n = len(rng);
      // avoid adjacent low runs merging
      if (low && !v.empty() && v.back() < 0.1) continue;
      for (int i = 0; i < n; ++i) v.push_back(low ? 0.0 : 6.0);
      if (low && n * 0.05 > 1.0 + 1e-9) ++expected;
    }
    EXPECT_EQ(count_stops(v, 0.05), expected);
  }
}

TEST(Metrics, RelativeReduction) {
  EXPECT_DOUBLE_EQ(relative_reduction(100, 80), 0.2);
  EXPECT_DOUBLE_EQ(relative_reduction(100, 100), 0.0);
  EXPECT_DOUBLE_EQ(relative_reduction(0, 5), 0.0);
}

TEST(Metrics, MeanAndStddev) {
  EXPECT_DOUBLE_EQ(mean({1, 2, 3, 4}), 2.5);
  EXPECT_NEAR(stddev({1, 2, 3, 4}), std::sqrt(5.0 / 3.0), 1e-12);
  EXPECT_DOUBLE_EQ(stddev({7}), 0.0);
}

// Oracle: the bootstrap interval of a large normal sample approaches the
// normal-theory interval mean +- 1.96 s / sqrt(n).
TEST(Metrics, BootstrapAgreesWithNormalTheory) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> nd(0.2, 0.05);
  std::vector<double> x;
  for (int i = 0; i < 400; ++i) x.push_back(nd(rng));
  const auto ci = bootstrap_mean_ci(x, 4000);
  const double half = 1.96 * stddev(x) / std::sqrt(400.0);
  EXPECT_NEAR(ci.lo, mean(x) - half, 0.15 * half);
  EXPECT_NEAR(ci.hi, mean(x) + half, 0.15 * half);
  const auto again = bootstrap_mean_ci(x, 4000);
  EXPECT_DOUBLE_EQ(ci.lo, again.lo);
}

TEST(Metrics, TruncatedVehicle) {
  MetricsAccumulator acc;
  acc.spawn(1, 0);
  acc.observe(1, 0, 5, 0.3, 0.05);
  const auto s = acc.summary();
  EXPECT_EQ(s.spawned, 1);
  EXPECT_EQ(s.completed, 0);
  EXPECT_EQ(s.truncated, 1);
}

TEST(Fuel, VspAndRate) {
  FuelModel f;
  EXPECT_DOUBLE_EQ(f.rate(0, 0), f.idle);
  const double v = 10, a = 0.5;
  const double vsp = v * (1.1 * a + 0.132) + 0.000302 * v * v * v;
  EXPECT_NEAR(f.vsp(v, a), vsp, 1e-12);
  EXPECT_NEAR(f.rate(v, a), f.idle + f.c1 * vsp + f.c2 * vsp * vsp, 1e-12);
  EXPECT_DOUBLE_EQ(f.rate(10, -3), f.idle);  // braking: idle
  EXPECT_GT(f.rate(15, 0), f.rate(10, 0));
}
