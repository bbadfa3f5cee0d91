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

#include "slotsim/v2x_bus.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "slotsim/errors.hpp"

namespace slotsim {

void DelayModel::validate() const {
  if (!(mean > 0.0)) {
    throw ConfigError("delay.mean", fmt::format("must be positive (got {})", mean));
  }
  if (!(std >= 0.0)) {
    throw ConfigError("delay.std", fmt::format("must be non-negative (got {})", std));
  }
  if (!(clamp_lo <= mean && mean <= clamp_hi)) {
    throw ConfigError("delay.clamp", fmt::format("need clamp_lo <= mean <= clamp_hi (got {} {} {})",
                                                 clamp_lo, mean, clamp_hi));
  }
  if (clamp_lo < 0.0) {
    throw ConfigError("delay.clamp_lo", "latency cannot be negative");
  }
}

double DelayModel::sample(std::mt19937_64& rng) const {
  if (std == 0.0) {
    return std::clamp(mean, clamp_lo, clamp_hi);
  }
  std::normal_distribution<double> dist(mean, std);
  return std::clamp(dist(rng), clamp_lo, clamp_hi);
}

bool V2xBus::Later::operator()(const Queued& a, const Queued& b) const {
  if (a.msg.deliver_at != b.msg.deliver_at) {
    return a.msg.deliver_at > b.msg.deliver_at;
  }
  if (a.msg.sender != b.msg.sender) {
    return a.msg.sender > b.msg.sender;
  }
  return a.seq > b.seq;
}

V2xBus::V2xBus(DelayModel model, std::vector<ReceiverId> receivers) : model_(model) {
  model_.validate();
  for (ReceiverId r : receivers) {
    queues_[r];
  }
}

void V2xBus::send(const VehicleState& msg, VehicleId sender, double t_now, std::mt19937_64& rng) {
  send_with_latency(msg, sender, t_now, model_.sample(rng));
}

void V2xBus::send_with_latency(const VehicleState& msg, VehicleId sender, double t_now,
                               double latency) {
  enqueue({sender, msg, t_now, t_now + std::max(0.0, latency)});
}

void V2xBus::enqueue(const DelayedMessage& msg) {
  for (auto& [receiver, heap] : queues_) {
    heap.push_back({msg, next_seq_});
    std::push_heap(heap.begin(), heap.end(), Later{});
  }
  ++next_seq_;
}

std::vector<DelayedMessage> V2xBus::poll(ReceiverId receiver, double t_now) {
  std::vector<DelayedMessage> out;
  auto it = queues_.find(receiver);
  if (it == queues_.end()) {
    return out;
  }
  auto& heap = it->second;
  while (!heap.empty() && heap.front().msg.deliver_at <= t_now) {
    std::pop_heap(heap.begin(), heap.end(), Later{});
    out.push_back(heap.back().msg);
    heap.pop_back();
  }
  return out;
}

std::size_t V2xBus::pending(ReceiverId receiver) const {
  auto it = queues_.find(receiver);
  return it == queues_.end() ? 0 : it->second.size();
}

void Inbox::accept(const DelayedMessage& msg) {
  auto [it, inserted] = latest_.try_emplace(msg.sender, msg);
  if (!inserted && msg.sent_at >= it->second.sent_at) {
    it->second = msg;
  }
}

void Inbox::accept_all(const std::vector<DelayedMessage>& msgs) {
  for (const auto& m : msgs) {
    accept(m);
  }
}

std::optional<Sample> Inbox::latest(VehicleId sender, double t_now) const {
  auto it = latest_.find(sender);
  if (it == latest_.end()) {
    return std::nullopt;
  }
  return Sample{it->second.payload, t_now - it->second.sent_at, it->second.sent_at};
}

void Inbox::forget(VehicleId sender) { latest_.erase(sender); }

std::optional<Sample> latest_sample(const Inbox& inbox, VehicleId sender, double t_now) {
  return inbox.latest(sender, t_now);
}

}  // namespace slotsim
