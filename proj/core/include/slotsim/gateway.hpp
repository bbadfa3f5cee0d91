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

#include <atomic>
#include <chrono>
#include <cstdint>
#include <deque>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "slotsim/ar_projection.hpp"
#include "slotsim/engine.hpp"

namespace slotsim {

inline constexpr int kWireSchemaVersion = 1;
inline constexpr std::size_t kMaxFrameBytes = 1u << 20;

/// Rounds to six significant digits, the precision used on the wire.
double wire_round(double x);

/// Per-tick world snapshot for the driver console. Keys are emitted in a
/// fixed order; see docs/wire.md.
std::string encode_snapshot(const Engine& engine, const CameraModel& mount);

struct InputMsg {
  long ack_tick{0};
  PedalInput pedals;
};

/// Parses a client message; empty when it is not a well-formed input message.
std::optional<InputMsg> decode_input(const std::string& text);
std::string encode_input(const InputMsg& msg);

/// 4-byte big-endian length prefix followed by the payload.
std::string frame(const std::string& payload);

/// Incremental de-framer over a byte stream.
class FrameReader {
 public:
  void feed(const char* data, std::size_t n);
  /// Next complete payload, if any. Throws FormatError on an oversized frame.
  std::optional<std::string> next();

 private:
  std::string buf_;
};

/// Inputs applied to the ego, keyed by the tick at which they took effect.
struct InputLogEntry {
  long tick{0};
  PedalInput pedals;
};

/// Runs an engine headless, applying each logged input from its tick on.
/// Reproduces a gateway session's trace without a network client.
void replay_inputs(Engine& engine, const std::vector<InputLogEntry>& log);

struct GatewayOptions {
  int port{0};  // 0 picks an ephemeral port
  double time_scale{1.0};
  double disconnect_grace{2.0};
  int max_catch_up{5};
  bool realtime{true};
  TraceSink* trace{nullptr};  // flushed whenever the session pauses
};

/// Single-client live session. A reader thread owns the socket; the engine
/// loop runs on the caller's thread and exchanges messages with it through
/// two queues.
class Gateway {
 public:
  Gateway(Engine& engine, CameraModel mount, GatewayOptions options = {});
  ~Gateway();
  Gateway(const Gateway&) = delete;
  Gateway& operator=(const Gateway&) = delete;

  /// Binds and listens on 127.0.0.1. Throws std::runtime_error when the port
  /// is unavailable.
  void start();
  int port() const { return port_; }
  /// Steps the engine until it finishes or `stop()` is called. Paused while
  /// no client is connected.
  void run();
  void stop();

  bool paused() const { return paused_.load(); }
  long malformed() const { return malformed_.load(); }
  const std::vector<InputLogEntry>& input_log() const { return input_log_; }

 private:
  void io_loop();
  void close_client();

  Engine& engine_;
  CameraModel mount_;
  GatewayOptions options_;
  int listen_fd_{-1};
  int client_fd_{-1};
  int port_{0};
  std::thread io_;
  std::atomic<bool> stop_{false};
  std::atomic<bool> connected_{false};
  std::atomic<bool> paused_{true};
  std::atomic<long> malformed_{0};
  std::atomic<std::int64_t> disconnected_at_ns_{0};

  std::mutex mu_;
  std::deque<InputMsg> inbound_;
  std::deque<std::string> outbound_;

  PedalInput latched_;
  std::vector<InputLogEntry> input_log_;
};

/// Minimal blocking client used by tests and tooling.
class GatewayClient {
 public:
  GatewayClient() = default;
  ~GatewayClient();
  GatewayClient(const GatewayClient&) = delete;
  GatewayClient& operator=(const GatewayClient&) = delete;

  /// Throws std::runtime_error if the connection fails.
  void connect(int port);
  void send_raw(const std::string& payload);
  void send_input(const InputMsg& msg);
  /// Next message payload, or empty on timeout or disconnect.
  std::optional<std::string> receive(std::chrono::milliseconds timeout);
  void close();

 private:
  int fd_{-1};
  FrameReader reader_;
};

}  // namespace slotsim
