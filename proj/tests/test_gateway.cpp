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

#include <nlohmann/json.hpp>
#include <sstream>
#include <thread>

#include "slotsim/errors.hpp"
#include "slotsim/gateway.hpp"
#include "slotsim/trace_io.hpp"

using namespace slotsim;
using nlohmann::json;
using namespace std::chrono_literals;

namespace {

ScenarioConfig pedal_scenario(double duration) {
  auto c = two_vehicle_preset();
  c.duration = duration;
  for (auto& v : c.vehicles) {
    if (v.ego) v.kind = VehicleKind::Human;
  }
  return c;
}

EngineOptions pedal() {
  EngineOptions o;
  o.ego_driver = EgoDriver::Pedal;
  return o;
}

json next_snapshot(GatewayClient& c) {
  auto msg = c.receive(2000ms);
  if (!msg) return json();
  return json::parse(*msg);
}

}  // namespace

TEST(Wire, RoundToSixDigits) {
  EXPECT_DOUBLE_EQ(wire_round(123.456789), 123.457);
  EXPECT_DOUBLE_EQ(wire_round(0.000123456789), 0.000123457);
  EXPECT_DOUBLE_EQ(wire_round(0.0), 0.0);
  EXPECT_DOUBLE_EQ(wire_round(-9.87654321), -9.87654);
}

TEST(Wire, FramingRoundTrip) {
  const std::string a = frame("hello"), b = frame("");
  ASSERT_EQ(a.size(), 9u);
  EXPECT_EQ(static_cast<unsigned char>(a[3]), 5u);
  FrameReader r;
  const std::string both = a + b + frame("world");
  for (char ch : both) r.feed(&ch, 1);
  EXPECT_EQ(*r.next(), "hello");
  EXPECT_EQ(*r.next(), "");
  EXPECT_EQ(*r.next(), "world");
  EXPECT_FALSE(r.next());
}

TEST(Wire, OversizedFrameRejected) {
  FrameReader r;
  const char huge[4] = {0x7f, 0, 0, 0};
  r.feed(huge, 4);
  EXPECT_THROW(r.next(), FormatError);
}

TEST(Wire, InputDecoding) {
  const auto m = decode_input(R"({"type":"input","ack_tick":12,"throttle":0.5,"brake":0})");
  ASSERT_TRUE(m);
  EXPECT_EQ(m->ack_tick, 12);
  EXPECT_DOUBLE_EQ(m->pedals.throttle, 0.5);
  EXPECT_FALSE(decode_input("not json"));
  EXPECT_FALSE(decode_input(R"({"type":"snapshot"})"));
  EXPECT_FALSE(decode_input(R"({"type":"input","throttle":"full"})"));
  EXPECT_FALSE(decode_input(R"([1,2])"));
  const auto back = decode_input(encode_input(*m));
  ASSERT_TRUE(back);
  EXPECT_EQ(back->ack_tick, 12);
}

TEST(Snapshot, SchemaAndKeyOrder) {
  Engine e(seven_vehicle_preset());
  for (int i = 0; i < 10; ++i) e.step();
  const auto j = json::parse(encode_snapshot(e, CameraModel::canonical()));
  std::vector<std::string> keys;
  for (auto it = j.begin(); it != j.end(); ++it) keys.push_back(it.key());
  // nlohmann::json sorts keys on parse; the writer order is checked on text.
  const std::string text = encode_snapshot(e, CameraModel::canonical());
  const std::vector<std::string> order{"\"type\"", "\"schema_version\"", "\"tick\"", "\"t\"",
                                       "\"ego\"",  "\"vehicles\"",       "\"slots\"", "\"phases\"",
                                       "\"metrics\""};
  std::size_t pos = 0;
  for (const auto& k : order) {
    const auto at = text.find(k, pos);
    ASSERT_NE(at, std::string::npos) << k;
    pos = at;
  }
  EXPECT_EQ(j["type"], "snapshot");
  EXPECT_EQ(j["schema_version"], kWireSchemaVersion);
  EXPECT_EQ(j["tick"], 10);
  EXPECT_EQ(j["ego"]["id"], 0);
  EXPECT_EQ(j["vehicles"].size(), 7u);
  EXPECT_TRUE(j["phases"].empty());
  bool red = false, green = false;
  for (const auto& s : j["slots"]) {
    ASSERT_GE(s["quad"].size(), 3u);
    if (s["color"] == "red") red = true;
    if (s["color"] == "green") {
      green = true;
      EXPECT_EQ(s["ref_id"], -1);
    }
  }
  EXPECT_TRUE(red);
  EXPECT_TRUE(green);
}

TEST(Snapshot, BaselineCarriesPhases) {
  auto c = corridor_preset();
  c.mode = Mode::Baseline;
  Engine e(c);
  e.step();
  const auto j = json::parse(encode_snapshot(e, CameraModel::canonical()));
  ASSERT_EQ(j["phases"].size(), 4u);
  EXPECT_EQ(j["phases"][0]["ns"], "green");
  EXPECT_EQ(j["phases"][0]["ew"], "red");
}

TEST(Snapshot, QuadsMatchProjection) {
  Engine e(seven_vehicle_preset());
  for (int i = 0; i < 5; ++i) e.step();
  const auto mount = CameraModel::canonical();
  const auto j = json::parse(encode_snapshot(e, mount));
  const Agent* ego = e.ego();
  ASSERT_NE(ego, nullptr);
  const auto cam = with_pose(mount, e.pose_of(ego->state));
  const Path& path = e.network().path(ego->state.path);
  for (const auto& g : ego->slots.slots()) {
    const auto q = project_slot(g, path, cam);
    for (const auto& s : j["slots"]) {
      if (s["ref_id"] != g.ref_vehicle) continue;
      ASSERT_TRUE(q);
      ASSERT_EQ(s["quad"].size(), q->corners.size());
      for (std::size_t k = 0; k < q->corners.size(); ++k) {
        EXPECT_NEAR(s["quad"][k][0].get<double>(), q->corners[k].x(),
                    1e-5 * std::max(1.0, std::abs(q->corners[k].x())));
      }
    }
  }
}

TEST(Gateway, PausedUntilClientAndAppliesInput) {
  Engine engine(pedal_scenario(20.0), 1, pedal());
  GatewayOptions opts;
  opts.time_scale = 1.0;
  opts.disconnect_grace = 0.2;
  Gateway gw(engine, CameraModel::canonical(), opts);
  gw.start();
  std::thread loop([&] { gw.run(); });

  std::this_thread::sleep_for(100ms);
  EXPECT_TRUE(gw.paused());
  EXPECT_EQ(engine.tick(), 0);

  GatewayClient client;
  client.connect(gw.port());
  auto first = next_snapshot(client);
  ASSERT_FALSE(first.is_null());
  EXPECT_EQ(first["type"], "snapshot");
  const long t0 = first["tick"];
  client.send_input({t0, {1.0, 0.0, 0.0}});

  // Applied within one tick of the acknowledged snapshot.
  long applied_at = -1;
  for (int i = 0; i < 40; ++i) {
    const auto s = next_snapshot(client);
    ASSERT_FALSE(s.is_null());
    if (s["ego"].is_null()) continue;
    if (std::abs(s["ego"]["a"].get<double>() - 3.0) < 1e-9) {
      applied_at = s["tick"];
      break;
    }
  }
  ASSERT_GE(applied_at, 0);
  ASSERT_FALSE(gw.input_log().empty());
  EXPECT_LE(gw.input_log().front().tick, t0 + 2);

  client.send_raw("{broken");
  std::this_thread::sleep_for(100ms);
  EXPECT_EQ(gw.malformed(), 1);

  client.close();
  std::this_thread::sleep_for(600ms);
  EXPECT_TRUE(gw.paused());
  const long held = engine.tick();
  std::this_thread::sleep_for(200ms);
  EXPECT_EQ(engine.tick(), held);
  gw.stop();
  loop.join();
}

TEST(Gateway, FullThrottleReachesSpeedLimit) {
  auto c = pedal_scenario(12.0);
  c.vehicles.erase(c.vehicles.begin());  // ego alone
  Engine engine(c, 1, pedal());
  GatewayOptions opts;
  opts.realtime = false;
  Gateway gw(engine, CameraModel::canonical(), opts);
  gw.start();
  std::thread loop([&] { gw.run(); });
  GatewayClient client;
  client.connect(gw.port());
  client.send_input({0, {1.0, 0.0, 0.0}});
  double v_last = 0;
  while (auto msg = client.receive(2000ms)) {
    const auto s = json::parse(*msg);
    if (!s["ego"].is_null()) v_last = s["ego"]["v"];
  }
  loop.join();
  EXPECT_TRUE(engine.finished());
  EXPECT_NEAR(v_last, c.limits.v_max, 1e-6);
}

// A recorded session replays headless to the identical trace.
TEST(Gateway, HeadlessReplayEquivalence) {
  const auto c = pedal_scenario(8.0);
  std::ostringstream live;
  std::vector<InputLogEntry> log;
  {
    Engine engine(c, 3, pedal());
    CsvTraceWriter w(live);
    engine.set_trace_sink(&w);
    GatewayOptions opts;
    opts.realtime = false;
    opts.trace = &w;
    Gateway gw(engine, CameraModel::canonical(), opts);
    gw.start();
    std::thread loop([&] { gw.run(); });
    GatewayClient client;
    client.connect(gw.port());
    int n = 0;
    while (auto msg = client.receive(2000ms)) {
      const auto s = json::parse(*msg);
      if (++n % 25 == 0) {
        const double th = (n / 25) % 2 ? 0.8 : 0.0;
        client.send_input({s["tick"].get<long>(), {th, th > 0 ? 0.0 : 0.6, 0.0}});
      }
    }
    loop.join();
    w.flush();
    log = gw.input_log();
  }
  ASSERT_FALSE(log.empty());
  std::ostringstream replayed;
  {
    Engine engine(c, 3, pedal());
    CsvTraceWriter w(replayed);
    engine.set_trace_sink(&w);
    replay_inputs(engine, log);
    w.flush();
  }
  EXPECT_EQ(live.str(), replayed.str());
}

TEST(Gateway, PortInUse) {
  Engine a(pedal_scenario(1.0), 1, pedal());
  Gateway first(a, CameraModel::canonical());
  first.start();
  GatewayOptions opts;
  opts.port = first.port();
  Engine b(pedal_scenario(1.0), 1, pedal());
  Gateway second(b, CameraModel::canonical(), opts);
  EXPECT_THROW(second.start(), std::runtime_error);
}
