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

#include "slotsim/trace_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "slotsim/errors.hpp"

namespace slotsim {

namespace {

double parse_double(std::string_view s, std::size_t line) {
  double out = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(out)) {
    throw FormatError(fmt::format("line {}: '{}' is not a number", line, s));
  }
  return out;
}

int parse_int(std::string_view s, std::size_t line) {
  int out = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw FormatError(fmt::format("line {}: '{}' is not an integer", line, s));
  }
  return out;
}

}  // namespace

CsvTraceWriter::CsvTraceWriter(std::ostream& out) : out_(out) {
  out_ << kTraceHeader << '\n';
}

std::string format_trace_row(const TraceRow& r) {
  return fmt::format("{:.3f},{},{},{:.4f},{:.4f},{:.4f},{},{:.4f},{:.5f}\n", r.t, r.vehicle, r.node,
                     r.r, r.v, r.a, r.slot, r.d_arrival, r.fuel_rate);
}

void CsvTraceWriter::write(const TraceRow& row) {
  buffer_ += format_trace_row(row);
  if (buffer_.size() > (1u << 16)) flush();
}

void CsvTraceWriter::flush() {
  out_ << buffer_;
  buffer_.clear();
  out_.flush();
}

std::vector<TraceRow> read_trace(std::istream& in) {
  std::vector<TraceRow> rows;
  std::string line;
  if (!std::getline(in, line)) return rows;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kTraceHeader) {
    throw FormatError(fmt::format("unexpected trace header '{}'", line));
  }
  std::size_t n = 1;
  double last_t = -std::numeric_limits<double>::infinity();
  while (std::getline(in, line)) {
    ++n;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string_view> f;
    std::string_view rest(line);
    while (true) {
      const auto pos = rest.find(',');
      f.push_back(rest.substr(0, pos));
      if (pos == std::string_view::npos) break;
      rest.remove_prefix(pos + 1);
    }
    if (f.size() != 9) {
      throw FormatError(fmt::format("line {}: expected 9 fields, got {}", n, f.size()));
    }
    TraceRow r;
    r.t = parse_double(f[0], n);
    r.vehicle = parse_int(f[1], n);
    r.node = parse_int(f[2], n);
    r.r = parse_double(f[3], n);
    r.v = parse_double(f[4], n);
    r.a = parse_double(f[5], n);
    r.slot = parse_int(f[6], n);
    r.d_arrival = parse_double(f[7], n);
    r.fuel_rate = parse_double(f[8], n);
    if (r.t < last_t) throw FormatError(fmt::format("line {}: time goes backwards", n));
    last_t = r.t;
    rows.push_back(r);
  }
  return rows;
}

std::vector<TraceRow> read_trace_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(fmt::format("cannot open trace {}", path));
  return read_trace(in);
}

double infer_dt(const std::vector<TraceRow>& rows) {
  for (const auto& r : rows) {
    if (r.t > rows.front().t) return r.t - rows.front().t;
  }
  return 0.0;
}

MetricsSummary metrics_from_trace(const std::vector<TraceRow>& rows, double dt, VehicleId ego) {
  MetricsAccumulator acc;
  if (rows.empty()) return acc.summary();
  const double t_end = rows.back().t;
  std::map<VehicleId, double> last_seen;
  for (const auto& r : rows) {
    if (last_seen.find(r.vehicle) == last_seen.end()) acc.spawn(r.vehicle, r.t - dt, r.vehicle == ego);
    acc.observe(r.vehicle, r.t, r.v, r.fuel_rate, dt);
    last_seen[r.vehicle] = r.t;
  }
  for (const auto& [id, t] : last_seen) {
    if (t < t_end - dt / 2.0) acc.exit(id, t + dt);
  }
  return acc.summary();
}

std::map<VehicleId, std::vector<SeriesPoint>> distance_series(const std::vector<TraceRow>& rows) {
  std::map<VehicleId, std::vector<SeriesPoint>> out;
  std::map<VehicleId, TraceRow> prev;
  for (const auto& r : rows) {
    auto& s = out[r.vehicle];
    auto it = prev.find(r.vehicle);
    const double x = it == prev.end()
                         ? 0.0
                         : s.back().y + 0.5 * (it->second.v + r.v) * (r.t - it->second.t);
    s.push_back({r.t, x});
    prev[r.vehicle] = r;
  }
  return out;
}

std::map<VehicleId, std::vector<SeriesPoint>> slot_series(const std::vector<TraceRow>& rows) {
  std::map<VehicleId, std::vector<SeriesPoint>> out;
  for (const auto& r : rows) out[r.vehicle].push_back({r.t, static_cast<double>(r.slot)});
  return out;
}

std::vector<SeriesPoint> speed_distance_series(const std::vector<TraceRow>& rows, VehicleId id) {
  std::vector<SeriesPoint> out;
  const auto dist = distance_series(rows);
  auto it = dist.find(id);
  if (it == dist.end()) return out;
  std::size_t k = 0;
  for (const auto& r : rows) {
    if (r.vehicle != id) continue;
    out.push_back({it->second[k++].y, r.v});
  }
  return out;
}

std::string summary_to_json(const MetricsSummary& s, const std::string& scenario,
                            const std::string& mode, std::uint64_t seed) {
  using nlohmann::ordered_json;
  auto vehicle = [](const VehicleMetrics& m) {
    ordered_json j;
    j["id"] = m.id;
    j["ego"] = m.ego;
    j["spawn_time"] = m.spawn_time;
    j["completed"] = m.completed();
    j["travel_time"] = m.completed() ? ordered_json(m.travel_time) : ordered_json();
    j["stops"] = m.stops;
    j["fuel"] = m.fuel;
    return j;
  };
  ordered_json j;
  j["scenario"] = scenario;
  j["mode"] = mode;
  j["seed"] = seed;
  j["spawned"] = s.spawned;
  j["completed"] = s.completed;
  j["truncated"] = s.truncated;
  j["mean_travel_time"] = s.mean_travel_time;
  j["mean_stops"] = s.mean_stops;
  j["total_fuel"] = s.total_fuel;
  j["ego"] = s.ego ? vehicle(*s.ego) : ordered_json();
  ordered_json safety;
  safety["co_occupancy"] = s.safety.co_occupancy;
  safety["slot_conflicts"] = s.safety.slot_conflicts;
  safety["release_violations"] = s.safety.release_violations;
  safety["conservation_violations"] = s.safety.conservation_violations;
  safety["crossings"] = s.safety.crossings;
  safety["min_crossing_gap"] = std::isfinite(s.safety.min_crossing_gap)
                                   ? ordered_json(s.safety.min_crossing_gap)
                                   : ordered_json();
  j["safety"] = safety;
  ordered_json vs = ordered_json::array();
  for (const auto& m : s.vehicles) vs.push_back(vehicle(m));
  j["vehicles"] = vs;
  return j.dump(2);
}

}  // namespace slotsim
