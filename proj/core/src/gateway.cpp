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

#include "slotsim/gateway.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cmath>
#include <cstring>

#include <fmt/format.h>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "slotsim/errors.hpp"

namespace slotsim {

namespace {

using nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

constexpr double kGreenHorizon = 120.0;

std::int64_t now_ns() {
  return std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now().time_since_epoch())
      .count();
}

bool send_all(int fd, const std::string& bytes) {
  std::size_t off = 0;
  while (off < bytes.size()) {
    const ssize_t n = ::send(fd, bytes.data() + off, bytes.size() - off, MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      return false;
    }
    off += static_cast<std::size_t>(n);
  }
  return true;
}

ordered_json slot_entry(const SlotGeometry& g, const Path& ego_path, const CameraModel& cam) {
  ordered_json s;
  s["ref_id"] = g.ref_vehicle;
  s["color"] = g.availability == SlotAvailability::UnavailableRed ? "red" : "green";
  ordered_json quad = ordered_json::array();
  if (auto q = project_slot(g, ego_path, cam)) {
    for (const auto& c : q->corners) quad.push_back({wire_round(c.x()), wire_round(c.y())});
  }
  s["quad"] = quad;
  s["r_s"] = wire_round(g.r_s);
  s["l_s"] = wire_round(g.l_s);
  return s;
}

}  // namespace

double wire_round(double x) {
  if (!std::isfinite(x) || x == 0.0) return x == 0.0 ? 0.0 : x;
  return std::stod(fmt::format("{:.6g}", x));
}

std::string encode_snapshot(const Engine& engine, const CameraModel& mount) {
  const auto& net = engine.network();
  ordered_json j;
  j["type"] = "snapshot";
  j["schema_version"] = kWireSchemaVersion;
  j["tick"] = engine.tick();
  j["t"] = wire_round(engine.time());

  const Agent* ego = engine.ego();
  ordered_json slots = ordered_json::array();
  if (ego != nullptr) {
    const VehicleState& s = ego->state;
    const Path& p = net.path(s.path);
    const ReservationRecord* rec = engine.pool().find(s.id, p.intersection);
    j["ego"] = {{"id", s.id},
                {"r", wire_round(s.r)},
                {"v", wire_round(s.v)},
                {"a", wire_round(s.a)},
                {"intersection", p.intersection},
                {"d_arrival", wire_round(p.stop_line - s.r)},
                {"slot", rec ? rec->slot : 0}};
    const CameraModel cam = with_pose(mount, engine.pose_of(s));
    for (const auto& g : ego->slots.slots()) slots.push_back(slot_entry(g, p, cam));
    if (engine.config().mode == Mode::Unsignalized) {
      for (const auto& [lo, hi] : available_gaps(ego->slots.slots(), s.r, kGreenHorizon)) {
        SlotGeometry g;
        g.ref_vehicle = -1;
        g.r_s = (lo + hi) / 2.0;
        g.l_s = hi - lo;
        g.x_s = s.x;
        g.w_s = s.width;
        g.availability = SlotAvailability::AvailableGreen;
        slots.push_back(slot_entry(g, p, cam));
      }
    }
  } else {
    j["ego"] = nullptr;
  }

  ordered_json vehicles = ordered_json::array();
  for (const auto& a : engine.agents()) {
    const Pose2 pose = engine.pose_of(a.state);
    vehicles.push_back({{"id", a.state.id},
                        {"x", wire_round(pose.position.x)},
                        {"y", wire_round(pose.position.y)},
                        {"heading", wire_round(pose.heading)},
                        {"v", wire_round(a.state.v)}});
  }
  j["vehicles"] = vehicles;
  j["slots"] = slots;

  ordered_json phases = ordered_json::array();
  if (engine.config().mode == Mode::Baseline) {
    for (const auto& node : net.intersections()) {
      phases.push_back({{"intersection", node.id},
                        {"ns", to_string(engine.phase(node.id, Heading::North))},
                        {"ew", to_string(engine.phase(node.id, Heading::East))}});
    }
  }
  j["phases"] = phases;

  const auto& safety = engine.safety();
  j["metrics"] = {{"active", engine.agents().size()},
                  {"co_occupancy", safety.co_occupancy},
                  {"ego_speed", ego ? wire_round(ego->state.v) : 0.0}};
  return j.dump();
}

std::optional<InputMsg> decode_input(const std::string& text) {
  const auto j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) return std::nullopt;
  if (!j.contains("type") || j["type"] != "input") return std::nullopt;
  auto number = [&](const char* key) -> std::optional<double> {
    if (!j.contains(key)) return 0.0;
    if (!j[key].is_number()) return std::nullopt;
    return j[key].get<double>();
  };
  const auto throttle = number("throttle");
  const auto brake = number("brake");
  const auto steering = number("steering");
  if (!throttle || !brake || !steering) return std::nullopt;
  InputMsg m;
  if (j.contains("ack_tick")) {
    if (!j["ack_tick"].is_number_integer()) return std::nullopt;
    m.ack_tick = j["ack_tick"].get<long>();
  }
  m.pedals = {*throttle, *brake, *steering};
  return m;
}

std::string encode_input(const InputMsg& msg) {
  ordered_json j;
  j["type"] = "input";
  j["ack_tick"] = msg.ack_tick;
  j["throttle"] = msg.pedals.throttle;
  j["brake"] = msg.pedals.brake;
  j["steering"] = msg.pedals.steering;
  return j.dump();
}

std::string frame(const std::string& payload) {
  const auto n = static_cast<std::uint32_t>(payload.size());
  std::string out;
  out.reserve(payload.size() + 4);
  out.push_back(static_cast<char>((n >> 24) & 0xff));
  out.push_back(static_cast<char>((n >> 16) & 0xff));
  out.push_back(static_cast<char>((n >> 8) & 0xff));
  out.push_back(static_cast<char>(n & 0xff));
  out += payload;
  return out;
}

void FrameReader::feed(const char* data, std::size_t n) { buf_.append(data, n); }

std::optional<std::string> FrameReader::next() {
  if (buf_.size() < 4) return std::nullopt;
  const auto b = [&](int i) { return static_cast<std::uint32_t>(static_cast<unsigned char>(buf_[i])); };
  const std::uint32_t n = (b(0) << 24) | (b(1) << 16) | (b(2) << 8) | b(3);
  if (n > kMaxFrameBytes) {
    buf_.clear();
    throw FormatError(fmt::format("frame of {} bytes exceeds the limit", n));
  }
  if (buf_.size() < 4 + n) return std::nullopt;
  std::string payload = buf_.substr(4, n);
  buf_.erase(0, 4 + n);
  return payload;
}

void replay_inputs(Engine& engine, const std::vector<InputLogEntry>& log) {
  std::size_t k = 0;
  while (!engine.finished()) {
    while (k < log.size() && log[k].tick <= engine.tick()) {
      engine.set_ego_input(log[k].pedals);
      ++k;
    }
    engine.step();
  }
}

Gateway::Gateway(Engine& engine, CameraModel mount, GatewayOptions options)
    : engine_(engine), mount_(std::move(mount)), options_(options) {
  mount_.validate();
  if (!(options_.time_scale > 0.0)) throw ConfigError("gateway.time_scale", "must be positive");
}

Gateway::~Gateway() {
  stop();
  if (io_.joinable()) io_.join();
  close_client();
  if (listen_fd_ >= 0) ::close(listen_fd_);
}

void Gateway::start() {
  listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listen_fd_ < 0) throw std::runtime_error(fmt::format("socket: {}", std::strerror(errno)));
  int one = 1;
  ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = htons(static_cast<std::uint16_t>(options_.port));
  if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0 ||
      ::listen(listen_fd_, 1) != 0) {
    const std::string err = std::strerror(errno);
    ::close(listen_fd_);
    listen_fd_ = -1;
    throw std::runtime_error(fmt::format("cannot listen on port {}: {}", options_.port, err));
  }
  socklen_t len = sizeof(addr);
  ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
  io_ = std::thread([this] { io_loop(); });
  spdlog::info("gateway listening on 127.0.0.1:{}", port_);
}

void Gateway::stop() { stop_.store(true); }

void Gateway::close_client() {
  if (client_fd_ >= 0) {
    ::close(client_fd_);
    client_fd_ = -1;
  }
}

void Gateway::io_loop() {
  FrameReader reader;
  char buf[4096];
  while (!stop_.load()) {
    if (client_fd_ < 0) {
      pollfd p{listen_fd_, POLLIN, 0};
      if (::poll(&p, 1, 20) > 0 && (p.revents & POLLIN)) {
        client_fd_ = ::accept(listen_fd_, nullptr, nullptr);
        if (client_fd_ >= 0) {
          int one = 1;
          ::setsockopt(client_fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
          reader = FrameReader{};
          {
            std::lock_guard<std::mutex> lock(mu_);
            outbound_.clear();
          }
          connected_.store(true);
          spdlog::info("gateway: client connected");
        }
      }
      continue;
    }

    std::deque<std::string> out;
    {
      std::lock_guard<std::mutex> lock(mu_);
      out.swap(outbound_);
    }
    bool alive = true;
    for (const auto& msg : out) {
      if (!send_all(client_fd_, frame(msg))) {
        alive = false;
        break;
      }
    }

    pollfd p{client_fd_, POLLIN, 0};
    if (alive && ::poll(&p, 1, 2) > 0) {
      if (p.revents & (POLLIN | POLLHUP | POLLERR)) {
        const ssize_t n = ::recv(client_fd_, buf, sizeof(buf), 0);
        if (n <= 0) {
          alive = false;
        } else {
          reader.feed(buf, static_cast<std::size_t>(n));
          try {
            while (auto payload = reader.next()) {
              if (auto msg = decode_input(*payload)) {
                std::lock_guard<std::mutex> lock(mu_);
                inbound_.push_back(*msg);
              } else {
                ++malformed_;
                spdlog::warn("gateway: ignoring malformed client message");
              }
            }
          } catch (const FormatError& e) {
            ++malformed_;
            spdlog::warn("gateway: {}", e.what());
            alive = false;
          }
        }
      }
    }
    if (!alive) {
      close_client();
      disconnected_at_ns_.store(now_ns());
      connected_.store(false);
      spdlog::info("gateway: client disconnected");
    }
  }
}

void Gateway::run() {
  const double tick_s = engine_.config().dt / options_.time_scale;
  const auto tick = std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(tick_s));
  auto deadline = Clock::now();
  bool was_paused = true;
  bool ever_connected = false;

  while (!stop_.load() && !engine_.finished()) {
    const bool connected = connected_.load();
    bool pause = !connected;
    if (!connected && ever_connected) {
      const double away = static_cast<double>(now_ns() - disconnected_at_ns_.load()) * 1e-9;
      pause = away > options_.disconnect_grace;
    }
    if (pause) {
      if (!was_paused && options_.trace != nullptr) options_.trace->flush();
      was_paused = true;
      paused_.store(true);
      std::this_thread::sleep_for(std::chrono::milliseconds(5));
      continue;
    }
    if (was_paused) {
      was_paused = false;
      paused_.store(false);
      deadline = Clock::now();
      std::lock_guard<std::mutex> lock(mu_);
      outbound_.push_back(encode_snapshot(engine_, mount_));
    }
    ever_connected = true;

    {
      std::lock_guard<std::mutex> lock(mu_);
      while (!inbound_.empty()) {
        latched_ = inbound_.front().pedals;
        inbound_.pop_front();
        if (input_log_.empty() || input_log_.back().tick != engine_.tick()) {
          input_log_.push_back({engine_.tick(), latched_});
        } else {
          input_log_.back().pedals = latched_;
        }
      }
    }
    engine_.set_ego_input(latched_);
    engine_.step();
    {
      std::string snap = encode_snapshot(engine_, mount_);
      std::lock_guard<std::mutex> lock(mu_);
      outbound_.push_back(std::move(snap));
    }

    if (options_.realtime) {
      deadline += tick;
      const auto now = Clock::now();
      if (now < deadline) {
        std::this_thread::sleep_until(deadline);
      } else if (now - deadline > options_.max_catch_up * tick) {
        deadline = now;
      }
    }
  }
  if (options_.trace != nullptr) options_.trace->flush();
  // Let the reader thread drain the final snapshots.
  for (int i = 0; i < 50 && connected_.load(); ++i) {
    {
      std::lock_guard<std::mutex> lock(mu_);
      if (outbound_.empty()) break;
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(2));
  }
}

GatewayClient::~GatewayClient() { close(); }

void GatewayClient::connect(int port) {
  fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd_ < 0) throw std::runtime_error("socket failed");
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = htons(static_cast<std::uint16_t>(port));
  if (::connect(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
    const std::string err = std::strerror(errno);
    close();
    throw std::runtime_error(fmt::format("connect to port {}: {}", port, err));
  }
  int one = 1;
  ::setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
}

void GatewayClient::send_raw(const std::string& payload) {
  if (fd_ < 0 || !send_all(fd_, frame(payload))) throw std::runtime_error("send failed");
}

void GatewayClient::send_input(const InputMsg& msg) { send_raw(encode_input(msg)); }

std::optional<std::string> GatewayClient::receive(std::chrono::milliseconds timeout) {
  const auto until = Clock::now() + timeout;
  char buf[8192];
  while (fd_ >= 0) {
    if (auto msg = reader_.next()) return msg;
    const auto left =
        std::chrono::duration_cast<std::chrono::milliseconds>(until - Clock::now()).count();
    if (left <= 0) return std::nullopt;
    pollfd p{fd_, POLLIN, 0};
    if (::poll(&p, 1, static_cast<int>(left)) <= 0) return std::nullopt;
    const ssize_t n = ::recv(fd_, buf, sizeof(buf), 0);
    if (n <= 0) {
      close();
      return std::nullopt;
    }
    reader_.feed(buf, static_cast<std::size_t>(n));
  }
  return std::nullopt;
}

void GatewayClient::close() {
  if (fd_ >= 0) {
    ::close(fd_);
    fd_ = -1;
  }
}

}  // namespace slotsim
