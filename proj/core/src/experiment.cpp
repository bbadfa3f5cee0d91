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

#include "slotsim/experiment.hpp"

#include <spdlog/spdlog.h>

#include "slotsim/engine.hpp"

namespace slotsim {

std::vector<PairedRun> run_paired(const ScenarioConfig& config,
                                  const std::vector<std::uint64_t>& seeds, Mode treatment,
                                  Mode baseline) {
  std::vector<PairedRun> out;
  out.reserve(seeds.size());
  for (std::uint64_t seed : seeds) {
    PairedRun pr;
    pr.seed = seed;
    ScenarioConfig c = config;
    c.mode = treatment;
    const auto a = run_scenario(c, seed).summary;
    c.mode = baseline;
    const auto b = run_scenario(c, seed).summary;
    if (a.ego) pr.treatment = *a.ego;
    if (b.ego) pr.baseline = *b.ego;
    pr.complete = a.ego && b.ego && a.ego->completed() && b.ego->completed();
    if (!pr.complete) spdlog::warn("seed {}: ego did not finish in both modes", seed);
    out.push_back(pr);
  }
  return out;
}

ReductionStats summarize_pairs(const std::vector<PairedRun>& runs, int resamples) {
  ReductionStats st;
  std::vector<double> tt, fuel, sb, stt;
  int lower = 0;
  for (const auto& r : runs) {
    if (!r.complete) continue;
    tt.push_back(relative_reduction(r.baseline.travel_time, r.treatment.travel_time));
    fuel.push_back(relative_reduction(r.baseline.fuel, r.treatment.fuel));
    sb.push_back(r.baseline.stops);
    stt.push_back(r.treatment.stops);
    if (r.treatment.fuel < r.baseline.fuel) ++lower;
  }
  st.pairs = static_cast<int>(tt.size());
  if (st.pairs == 0) return st;
  st.travel_time = mean(tt);
  st.fuel = mean(fuel);
  st.stops_baseline = mean(sb);
  st.stops_treatment = mean(stt);
  st.fuel_lower_share = static_cast<double>(lower) / st.pairs;
  if (st.pairs > 1) {
    st.travel_time_ci = bootstrap_mean_ci(tt, resamples);
    st.fuel_ci = bootstrap_mean_ci(fuel, resamples);
  }
  return st;
}

}  // namespace slotsim
