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

#include "slotsim/errors.hpp"
#include "slotsim/v2x_bus.hpp"

using namespace slotsim;

namespace {

VehicleState at(double r) {
  VehicleState s;
  s.r = r;
  return s;
}

}  // namespace

TEST(DelayModel, ZeroStdIsExact) {
  std::mt19937_64 rng(1);
  V2xBus bus(DelayModel::with_default_clamp(0.040, 0.0));
  bus.send(at(0), 1, 2.0, rng);
  auto got = bus.poll(kCyberWorld, 10.0);
  ASSERT_EQ(got.size(), 1u);
  EXPECT_DOUBLE_EQ(got[0].deliver_at, 2.0 + 0.040);
}

TEST(DelayModel, ClampedBelow) {
  DelayModel m{-1.0, 0.0, 0.01, 0.2};
  std::mt19937_64 rng(1);
  EXPECT_DOUBLE_EQ(m.sample(rng), 0.01);
  DelayModel wide{0.0, 1.0, 0.0, 0.5};
  for (int i = 0; i < 1000; ++i) {
    const double x = wide.sample(rng);
    ASSERT_GE(x, 0.0);
    ASSERT_LE(x, 0.5);
  }
}

TEST(DelayModel, SampleMoments) {
  std::mt19937_64 rng(2024);
  DelayModel m;
  const int n = 10000;
  double sum = 0, sq = 0;
  for (int i = 0; i < n; ++i) {
    const double x = m.sample(rng);
    sum += x;
    sq += x * x;
  }
  const double mean = sum / n;
  const double sd = std::sqrt((sq - n * mean * mean) / (n - 1));
  EXPECT_NEAR(mean, 0.040, 0.002);
  EXPECT_NEAR(sd, 0.0259, 0.003);
}

TEST(DelayModel, ValidateRejectsBadInput) {
  EXPECT_THROW((DelayModel{0.04, -1.0, 0.0, 1.0}.validate()), ConfigError);
  EXPECT_THROW((DelayModel{0.04, 0.01, 0.5, 0.1}.validate()), ConfigError);
  EXPECT_NO_THROW(DelayModel{}.validate());
}

TEST(V2xBus, EmptyPoll) {
  V2xBus bus(DelayModel{});
  EXPECT_TRUE(bus.poll(kCyberWorld, 5.0).empty());
}

TEST(V2xBus, DeliversInOrderUpToNow) {
  V2xBus bus(DelayModel{});
  bus.send_with_latency(at(1), 1, 0.9, 0.1);   // due 1.0
  bus.send_with_latency(at(2), 2, 1.0, 0.1);   // due 1.1
  auto first = bus.poll(kCyberWorld, 1.05);
  ASSERT_EQ(first.size(), 1u);
  EXPECT_EQ(first[0].sender, 1);
  EXPECT_EQ(bus.pending(kCyberWorld), 1u);
  auto second = bus.poll(kCyberWorld, 1.2);
  ASSERT_EQ(second.size(), 1u);
  EXPECT_EQ(second[0].sender, 2);
}

TEST(V2xBus, TieBrokenBySender) {
  V2xBus bus(DelayModel{});
  bus.send_with_latency(at(0), 7, 1.0, 0.05);
  bus.send_with_latency(at(0), 3, 1.0, 0.05);
  auto got = bus.poll(kCyberWorld, 2.0);
  ASSERT_EQ(got.size(), 2u);
  EXPECT_EQ(got[0].sender, 3);
  EXPECT_EQ(got[1].sender, 7);
}

TEST(V2xBus, EveryReceiverGetsACopy) {
  V2xBus bus(DelayModel{}, {kCyberWorld, 4});
  bus.send_with_latency(at(0), 1, 0.0, 0.0);
  EXPECT_EQ(bus.poll(kCyberWorld, 0.0).size(), 1u);
  EXPECT_EQ(bus.poll(4, 0.0).size(), 1u);
}

TEST(Inbox, NoSampleForUnknownSender) {
  Inbox in;
  EXPECT_FALSE(latest_sample(in, 9, 1.0));
}

TEST(Inbox, KeepsNewestBySendTime) {
  V2xBus bus(DelayModel{});
  Inbox in;
  bus.send_with_latency(at(2), 1, 2.0, 0.01);
  bus.send_with_latency(at(1), 1, 1.0, 1.5);  // older, delivered later
  in.accept_all(bus.poll(kCyberWorld, 3.0));
  auto s = latest_sample(in, 1, 3.0);
  ASSERT_TRUE(s);
  EXPECT_DOUBLE_EQ(s->sent_at, 2.0);
  EXPECT_DOUBLE_EQ(s->state.r, 2.0);
}

TEST(Inbox, AgeIsElapsedSinceSend) {
  V2xBus bus(DelayModel{});
  Inbox in;
  bus.send_with_latency(at(0), 1, 5.0, 0.04);
  in.accept_all(bus.poll(kCyberWorld, 5.06));
  auto s = latest_sample(in, 1, 5.06);
  ASSERT_TRUE(s);
  EXPECT_NEAR(s->age, 0.06, 1e-12);
  in.forget(1);
  EXPECT_FALSE(latest_sample(in, 1, 5.06));
}
