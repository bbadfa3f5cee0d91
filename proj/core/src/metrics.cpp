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

#include "slotsim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <spdlog/spdlog.h>

namespace slotsim {

void MetricsAccumulator::spawn(VehicleId id, double t, bool ego) {
  Track tr;
  tr.m.id = id;
  tr.m.ego = ego;
  tr.m.spawn_time = t;
  tracks_[id] = tr;
}

void MetricsAccumulator::observe(VehicleId id, double t, double v, double fuel_rate, double dt) {
  auto it = tracks_.find(id);
  if (it == tracks_.end()) {
    spawn(id, t - dt);
    it = tracks_.find(id);
  }
  Track& tr = it->second;
  tr.m.fuel += fuel_rate * dt;
  tr.m.distance += v * dt;
  if (v < rule_.speed_threshold) {
    if (!tr.low_since) {
      tr.low_since = t;
      tr.counted = false;
    }
    if (!tr.counted && t + dt - *tr.low_since > rule_.min_duration + 1e-9) {
      ++tr.m.stops;
      tr.counted = true;
    }
  } else {
    tr.low_since.reset();
  }
}

void MetricsAccumulator::exit(VehicleId id, double t) {
  auto it = tracks_.find(id);
  if (it == tracks_.end()) {
    spdlog::warn("metrics: exit of unknown vehicle {}", id);
    return;
  }
  it->second.m.exit_time = t;
  it->second.m.travel_time = t - it->second.m.spawn_time;
}

const VehicleMetrics* MetricsAccumulator::find(VehicleId id) const {
  auto it = tracks_.find(id);
  return it == tracks_.end() ? nullptr : &it->second.m;
}

MetricsSummary MetricsAccumulator::summary() const {
  MetricsSummary s;
  double tt = 0.0;
  double stops = 0.0;
  for (const auto& [id, tr] : tracks_) {
    s.vehicles.push_back(tr.m);
    ++s.spawned;
    s.total_fuel += tr.m.fuel;
    if (tr.m.ego) s.ego = tr.m;
    if (tr.m.completed()) {
      ++s.completed;
      tt += tr.m.travel_time;
      stops += tr.m.stops;
    } else {
      ++s.truncated;
    }
  }
  if (s.completed > 0) {
    s.mean_travel_time = tt / s.completed;
    s.mean_stops = stops / s.completed;
  }
  return s;
}

int count_stops(const std::vector<double>& speeds, double dt, const StopRule& rule) {
  MetricsAccumulator acc(rule);
  acc.spawn(0, 0.0);
  for (std::size_t i = 0; i < speeds.size(); ++i) {
    acc.observe(0, static_cast<double>(i) * dt, speeds[i], 0.0, dt);
  }
  return acc.find(0)->stops;
}

double relative_reduction(double base, double treatment) {
  if (base == 0.0) return 0.0;
  return (base - treatment) / base;
}

double mean(const std::vector<double>& x) {
  if (x.empty()) return 0.0;
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double stddev(const std::vector<double>& x) {
  if (x.size() < 2) return 0.0;
  const double m = mean(x);
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  return std::sqrt(ss / static_cast<double>(x.size() - 1));
}

namespace {

// Linear interpolation between order statistics.
double quantile(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace

Interval bootstrap_mean_ci(const std::vector<double>& x, int resamples, std::uint64_t seed,
                           double level) {
  if (x.empty()) return {};
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, x.size() - 1);
  std::vector<double> means(static_cast<std::size_t>(resamples));
  for (auto& m : means) {
    double sum = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) sum += x[pick(rng)];
    m = sum / static_cast<double>(x.size());
  }
  std::sort(means.begin(), means.end());
  const double tail = (1.0 - level) / 2.0;
  return {quantile(means, tail), quantile(means, 1.0 - tail)};
}

}  // namespace slotsim
