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

#include <benchmark/benchmark.h>

#include "slotsim/ar_projection.hpp"
#include "slotsim/engine.hpp"
#include "slotsim/road_network.hpp"

using namespace slotsim;

namespace {

void BM_ConflictTable(benchmark::State& state) {
  NetworkConfig nc;
  nc.intersections = 1;
  const auto net = build_network(nc);
  const auto& paths = net.paths();
  for (auto _ : state) {
    int found = 0;
    for (const auto& a : paths) {
      for (const auto& b : paths) {
        if (a.id != b.id && conflict_point(a, b)) ++found;
      }
    }
    benchmark::DoNotOptimize(found);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(paths.size() * paths.size()));
}
BENCHMARK(BM_ConflictTable);

void BM_CorridorTicks(benchmark::State& state) {
  auto cfg = corridor_preset();
  cfg.end_on_ego_exit = false;
  long ticks = 0;
  for (auto _ : state) {
    Engine e(cfg, 1);
    for (long n = 0; n < state.range(0) && e.step(); ++n) ++ticks;
  }
  state.SetItemsProcessed(ticks);
}
BENCHMARK(BM_CorridorTicks)->Arg(2000)->Unit(benchmark::kMillisecond);

void BM_ProjectSlot(benchmark::State& state) {
  NetworkConfig nc;
  nc.intersections = 1;
  const auto net = build_network(nc);
  const Path& ego = net.path(net.path_for(0, Heading::North, Turn::Straight));
  const auto cam = with_pose(CameraModel::canonical(), Pose2{{1.75, -30.0}, 1.5707963267948966});
  const SlotGeometry slot{1, 190.0, 0.0, 4.5, 2.0, SlotAvailability::AvailableGreen};
  for (auto _ : state) benchmark::DoNotOptimize(project_slot(slot, ego, cam));
}
BENCHMARK(BM_ProjectSlot);

}  // namespace
BENCHMARK_MAIN();
