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

#include <cstdint>
#include <optional>
#include <random>
#include <unordered_map>
#include <vector>

#include "slotsim/vehicle.hpp"

namespace slotsim {

using ReceiverId = int;

/// Receiver id of the cyber-world planner/controller relay.
inline constexpr ReceiverId kCyberWorld = -1;

/// Normal latency model, clamped (not resampled) so every send consumes
/// exactly one draw.
struct DelayModel {
  double mean{0.040};
  double std{0.0259};
  double clamp_lo{0.0};
  double clamp_hi{0.040 + 4.0 * 0.0259};

  static DelayModel with_default_clamp(double mean, double std) {
    return {mean, std, 0.0, mean + 4.0 * std};
  }
  /// Throws ConfigError when the invariants do not hold.
  void validate() const;
  double sample(std::mt19937_64& rng) const;
};

struct DelayedMessage {
  VehicleId sender{-1};
  VehicleState payload;
  double sent_at{0.0};
  double deliver_at{0.0};
};

/// Broadcast bus with per-receiver delivery queues. Each send draws one
/// latency sample shared by all subscribed receivers.
class V2xBus {
 public:
  explicit V2xBus(DelayModel model, std::vector<ReceiverId> receivers = {kCyberWorld});

  const DelayModel& model() const { return model_; }

  void send(const VehicleState& msg, VehicleId sender, double t_now, std::mt19937_64& rng);
  /// Enqueues with an explicit latency (no draw); used by scripted tests.
  void send_with_latency(const VehicleState& msg, VehicleId sender, double t_now, double latency);

  /// Messages due by `t_now`, ordered by (deliver_at, sender_id); removed from
  /// the receiver's queue.
  std::vector<DelayedMessage> poll(ReceiverId receiver, double t_now);
  std::size_t pending(ReceiverId receiver) const;

 private:
  struct Queued {
    DelayedMessage msg;
    std::uint64_t seq;
  };
  struct Later {
    bool operator()(const Queued& a, const Queued& b) const;
  };

  void enqueue(const DelayedMessage& msg);

  DelayModel model_;
  std::unordered_map<ReceiverId, std::vector<Queued>> queues_;
  std::uint64_t next_seq_{0};
};

struct Sample {
  VehicleState state;
  double age{0.0};
  double sent_at{0.0};
};

/// Newest delivered sample per sender, as seen by one receiver.
class Inbox {
 public:
  void accept(const DelayedMessage& msg);
  void accept_all(const std::vector<DelayedMessage>& msgs);
  std::optional<Sample> latest(VehicleId sender, double t_now) const;
  void forget(VehicleId sender);
  std::size_t size() const { return latest_.size(); }

 private:
  std::unordered_map<VehicleId, DelayedMessage> latest_;
};

/// Newest delivered state of `sender` and its age (t_now - sent_at).
std::optional<Sample> latest_sample(const Inbox& inbox, VehicleId sender, double t_now);

}  // namespace slotsim
