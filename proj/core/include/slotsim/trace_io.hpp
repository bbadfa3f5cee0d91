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

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "slotsim/engine.hpp"
#include "slotsim/metrics.hpp"

namespace slotsim {

inline constexpr const char* kTraceHeader = "t,vehicle_id,intersection_id,r,v,a,slot,d_arrival,fuel_rate";

/// Writes trace rows as CSV with fixed decimal formatting.
class CsvTraceWriter : public TraceSink {
 public:
  explicit CsvTraceWriter(std::ostream& out);
  void write(const TraceRow& row) override;
  void flush() override;

 private:
  std::ostream& out_;
  std::string buffer_;
};

std::string format_trace_row(const TraceRow& row);

/// Parses a trace; throws FormatError on a bad header, a short or
/// non-numeric row, or decreasing time.
std::vector<TraceRow> read_trace(std::istream& in);
std::vector<TraceRow> read_trace_file(const std::string& path);

/// Step length inferred from the first two distinct timestamps; zero when the
/// trace holds fewer than two ticks.
double infer_dt(const std::vector<TraceRow>& rows);

/// Travel time, stops and fuel recomputed from trace rows. Vehicles still
/// present at the final timestamp count as truncated. `ego` marks which id
/// is reported as the ego.
MetricsSummary metrics_from_trace(const std::vector<TraceRow>& rows, double dt,
                                  VehicleId ego = kEgoId);

struct SeriesPoint {
  double x{0.0};
  double y{0.0};
};

/// Travelled distance against time per vehicle (trapezoidal integral of v).
std::map<VehicleId, std::vector<SeriesPoint>> distance_series(const std::vector<TraceRow>& rows);
/// Slot number against time per vehicle.
std::map<VehicleId, std::vector<SeriesPoint>> slot_series(const std::vector<TraceRow>& rows);
/// Speed against travelled distance for one vehicle.
std::vector<SeriesPoint> speed_distance_series(const std::vector<TraceRow>& rows, VehicleId id);

/// Run summary as JSON (ordered keys, stable formatting).
std::string summary_to_json(const MetricsSummary& summary, const std::string& scenario,
                            const std::string& mode, std::uint64_t seed);

}  // namespace slotsim
