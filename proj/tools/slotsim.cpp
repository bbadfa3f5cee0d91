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

#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>
#include <nlohmann/json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "slotsim/engine.hpp"
#include "slotsim/errors.hpp"
#include "slotsim/experiment.hpp"
#include "slotsim/gateway.hpp"
#include "slotsim/scenario.hpp"
#include "slotsim/trace_io.hpp"

namespace fs = std::filesystem;
using namespace slotsim;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitIo = 1;
constexpr int kExitMissingScenario = 2;
constexpr int kExitInvalidConfig = 3;
constexpr int kExitMalformedTrace = 4;

struct ExitCode {
  int code;
};

ScenarioConfig load_or_exit(const std::string& path) {
  if (path.rfind("preset:", 0) == 0) {
    const std::string name = path.substr(7);
    if (name == "corridor") return corridor_preset();
    if (name == "seven-vehicle") return seven_vehicle_preset();
    if (name == "two-vehicle") return two_vehicle_preset();
    fmt::print(stderr, "error: unknown preset '{}'\n", name);
    throw ExitCode{kExitMissingScenario};
  }
  if (!fs::exists(path)) {
    fmt::print(stderr, "error: scenario '{}' not found\n", path);
    throw ExitCode{kExitMissingScenario};
  }
  try {
    return load_scenario(path);
  } catch (const ConfigError& e) {
    fmt::print(stderr, "error: invalid scenario '{}': {}\n", path, e.what());
    throw ExitCode{kExitInvalidConfig};
  }
}

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      seeds.push_back(std::stoull(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      fmt::print(stderr, "error: bad seed '{}'\n", item);
      throw ExitCode{kExitInvalidConfig};
    }
  }
  if (seeds.empty()) {
    fmt::print(stderr, "error: no seeds given\n");
    throw ExitCode{kExitInvalidConfig};
  }
  return seeds;
}

Mode mode_or_exit(const std::string& text) {
  try {
    return parse_mode(text);
  } catch (const ConfigError& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    throw ExitCode{kExitInvalidConfig};
  }
}

nlohmann::ordered_json moments(const std::vector<double>& x) {
  return {{"mean", mean(x)}, {"stddev", stddev(x)}, {"n", x.size()}};
}

int cmd_run(const std::string& scenario_path, const std::string& seed_text,
            const std::string& mode_text, const std::string& out_dir, bool write_trace) {
  ScenarioConfig cfg = load_or_exit(scenario_path);
  if (!mode_text.empty()) cfg.mode = mode_or_exit(mode_text);
  const auto seeds = seed_text.empty() ? std::vector<std::uint64_t>{cfg.seed} : parse_seeds(seed_text);

  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) {
    fmt::print(stderr, "error: cannot create {}: {}\n", out_dir, ec.message());
    return kExitIo;
  }

  nlohmann::ordered_json runs = nlohmann::ordered_json::array();
  std::vector<double> ego_tt, ego_fuel, ego_stops, mean_tt, fleet_fuel;
  for (std::uint64_t seed : seeds) {
    std::optional<std::ofstream> trace;
    std::optional<CsvTraceWriter> writer;
    if (write_trace) {
      const auto path = fs::path(out_dir) / fmt::format("trace_seed{}.csv", seed);
      trace.emplace(path);
      if (!*trace) {
        fmt::print(stderr, "error: cannot write {}\n", path.string());
        return kExitIo;
      }
      writer.emplace(*trace);
    }
    RunResult res;
    try {
      res = run_scenario(cfg, seed, writer ? &*writer : nullptr);
    } catch (const ConfigError& e) {
      fmt::print(stderr, "error: invalid scenario: {}\n", e.what());
      return kExitInvalidConfig;
    }
    runs.push_back(nlohmann::ordered_json::parse(
        summary_to_json(res.summary, cfg.name, to_string(cfg.mode), seed)));
    if (res.summary.ego && res.summary.ego->completed()) {
      ego_tt.push_back(res.summary.ego->travel_time);
      ego_fuel.push_back(res.summary.ego->fuel);
      ego_stops.push_back(res.summary.ego->stops);
    }
    mean_tt.push_back(res.summary.mean_travel_time);
    fleet_fuel.push_back(res.summary.total_fuel);
    spdlog::info("seed {}: {} vehicles, {} completed", seed, res.summary.spawned,
                 res.summary.completed);
  }

  nlohmann::ordered_json summary;
  summary["scenario"] = cfg.name;
  summary["mode"] = to_string(cfg.mode);
  summary["seeds"] = seeds;
  summary["aggregate"] = {{"ego_travel_time", moments(ego_tt)},
                          {"ego_fuel", moments(ego_fuel)},
                          {"ego_stops", moments(ego_stops)},
                          {"mean_travel_time", moments(mean_tt)},
                          {"total_fuel", moments(fleet_fuel)}};
  summary["runs"] = runs;
  std::ofstream out(fs::path(out_dir) / "summary.json");
  if (!out) {
    fmt::print(stderr, "error: cannot write summary\n");
    return kExitIo;
  }
  out << summary.dump(2) << '\n';
  return kExitOk;
}

int cmd_compare(const std::string& scenario_path, int n_seeds, std::uint64_t first_seed,
                const std::string& treat_text, const std::string& base_text,
                const std::string& out_path) {
  ScenarioConfig cfg = load_or_exit(scenario_path);
  if (n_seeds < 1) {
    fmt::print(stderr, "error: --seeds must be at least 1\n");
    return kExitInvalidConfig;
  }
  const Mode treat = mode_or_exit(treat_text);
  const Mode base = mode_or_exit(base_text);
  std::vector<std::uint64_t> seeds;
  for (int i = 0; i < n_seeds; ++i) seeds.push_back(first_seed + static_cast<std::uint64_t>(i));

  std::vector<PairedRun> runs;
  try {
    runs = run_paired(cfg, seeds, treat, base);
  } catch (const ConfigError& e) {
    fmt::print(stderr, "error: invalid scenario: {}\n", e.what());
    return kExitInvalidConfig;
  }
  const ReductionStats st = summarize_pairs(runs);

  std::ostringstream table;
  table << "seed,base_travel_time,treat_travel_time,travel_time_reduction,base_fuel,treat_fuel,"
           "fuel_reduction,base_stops,treat_stops\n";
  for (const auto& r : runs) {
    if (!r.complete) {
      table << fmt::format("{},,,,,,,,\n", r.seed);
      continue;
    }
    table << fmt::format("{},{:.3f},{:.3f},{:.4f},{:.3f},{:.3f},{:.4f},{},{}\n", r.seed,
                         r.baseline.travel_time, r.treatment.travel_time,
                         relative_reduction(r.baseline.travel_time, r.treatment.travel_time),
                         r.baseline.fuel, r.treatment.fuel,
                         relative_reduction(r.baseline.fuel, r.treatment.fuel), r.baseline.stops,
                         r.treatment.stops);
  }
  table << fmt::format("mean,,,{:.4f},,,{:.4f},{:.3f},{:.3f}\n", st.travel_time, st.fuel,
                       st.stops_baseline, st.stops_treatment);
  if (st.travel_time_ci && st.fuel_ci) {
    table << fmt::format("ci95_low,,,{:.4f},,,{:.4f},,\n", st.travel_time_ci->lo, st.fuel_ci->lo);
    table << fmt::format("ci95_high,,,{:.4f},,,{:.4f},,\n", st.travel_time_ci->hi,
                         st.fuel_ci->hi);
  }
  if (out_path.empty()) {
    std::cout << table.str();
  } else {
    std::ofstream out(out_path);
    if (!out) {
      fmt::print(stderr, "error: cannot write {}\n", out_path);
      return kExitIo;
    }
    out << table.str();
  }
  return kExitOk;
}

int cmd_replay(const std::string& trace_path, const std::string& series, int ego) {
  if (!fs::exists(trace_path)) {
    fmt::print(stderr, "error: trace '{}' not found\n", trace_path);
    return kExitIo;
  }
  std::vector<TraceRow> rows;
  try {
    rows = read_trace_file(trace_path);
  } catch (const FormatError& e) {
    fmt::print(stderr, "error: malformed trace: {}\n", e.what());
    return kExitMalformedTrace;
  }
  if (series == "speed") {
    std::cout << "distance,speed\n";
    for (const auto& p : speed_distance_series(rows, ego)) {
      std::cout << fmt::format("{:.4f},{:.4f}\n", p.x, p.y);
    }
    return kExitOk;
  }
  const auto data = series == "distance" ? distance_series(rows) : slot_series(rows);
  std::cout << fmt::format("vehicle_id,t,{}\n", series);
  for (const auto& [id, points] : data) {
    for (const auto& p : points) {
      std::cout << (series == "distance" ? fmt::format("{},{:.3f},{:.4f}\n", id, p.x, p.y)
                                         : fmt::format("{},{:.3f},{}\n", id, p.x, static_cast<int>(p.y)));
    }
  }
  return kExitOk;
}

Gateway* g_gateway = nullptr;

void on_signal(int) {
  if (g_gateway != nullptr) g_gateway->stop();
}

int cmd_serve(const std::string& scenario_path, int port, const std::string& camera_path,
              double time_scale, const std::string& trace_path) {
  ScenarioConfig cfg = load_or_exit(scenario_path);
  CameraModel cam = CameraModel::canonical();
  if (!camera_path.empty()) {
    if (!fs::exists(camera_path)) {
      fmt::print(stderr, "error: camera '{}' not found\n", camera_path);
      return kExitMissingScenario;
    }
    try {
      cam = CameraModel::load(camera_path);
    } catch (const ConfigError& e) {
      fmt::print(stderr, "error: invalid camera: {}\n", e.what());
      return kExitInvalidConfig;
    }
  }
  if (cfg.ego.enabled && cfg.ego.kind != VehicleKind::Human) {
    spdlog::info("serve: ego kind set to human for the live session");
    cfg.ego.kind = VehicleKind::Human;
  }
  EngineOptions opts;
  opts.ego_driver = EgoDriver::Pedal;
  Engine engine(cfg, std::nullopt, opts);

  std::optional<std::ofstream> trace;
  std::optional<CsvTraceWriter> writer;
  if (!trace_path.empty()) {
    trace.emplace(trace_path);
    writer.emplace(*trace);
    engine.set_trace_sink(&*writer);
  }
  GatewayOptions gopts;
  gopts.port = port;
  gopts.time_scale = time_scale;
  gopts.trace = writer ? &*writer : nullptr;
  Gateway gateway(engine, cam, gopts);
  try {
    gateway.start();
  } catch (const std::runtime_error& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kExitIo;
  }
  fmt::print("listening on 127.0.0.1:{}\n", gateway.port());
  std::fflush(stdout);
  g_gateway = &gateway;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  gateway.run();
  g_gateway = nullptr;
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"slotsim: slot-reservation corridor simulator"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string level = "warn";
  app.add_option("--log-level", level, "trace|debug|info|warn|error|off");

  std::string scenario, seeds, mode, out = "out";
  bool no_trace = false;
  auto* run = app.add_subcommand("run", "run a scenario for one or more seeds");
  run->add_option("--scenario", scenario, "scenario file or preset:<name>")->required();
  run->add_option("--seed", seeds, "seed list, comma separated");
  run->add_option("--mode", mode, "unsignalized|baseline (overrides the scenario)");
  run->add_option("--out", out, "output directory");
  run->add_flag("--no-trace", no_trace, "skip per-tick trace files");

  int n_seeds = 50;
  std::uint64_t first_seed = 1;
  std::string treat = "unsignalized", base = "baseline", table_out;
  auto* compare = app.add_subcommand("compare", "paired-seed comparison of two modes");
  compare->add_option("--scenario", scenario, "scenario file or preset:<name>")->required();
  compare->add_option("--seeds", n_seeds, "number of paired seeds");
  compare->add_option("--first-seed", first_seed, "first seed of the range");
  compare->add_option("--treatment", treat, "treatment mode");
  compare->add_option("--baseline", base, "baseline mode");
  compare->add_option("--out", table_out, "write the table here instead of stdout");

  std::string trace_path, series = "distance";
  int ego = kEgoId;
  auto* replay = app.add_subcommand("replay", "emit plot-ready series from a trace");
  replay->add_option("--trace", trace_path, "trace CSV")->required();
  replay->add_option("--series", series, "distance|slot|speed")
      ->check(CLI::IsMember({"distance", "slot", "speed"}));
  replay->add_option("--ego", ego, "vehicle id for the speed series");

  int port = 7400;
  std::string camera, serve_trace;
  double time_scale = 1.0;
  auto* serve = app.add_subcommand("serve", "live session for the driver console");
  serve->add_option("--scenario", scenario, "scenario file or preset:<name>")->required();
  serve->add_option("--port", port, "TCP port (0 = ephemeral)");
  serve->add_option("--camera", camera, "camera config file");
  serve->add_option("--time-scale", time_scale, "sim seconds per wall second");
  serve->add_option("--trace", serve_trace, "write the session trace here");

  std::string preset_name;
  auto* preset = app.add_subcommand("preset", "print a built-in scenario as JSON");
  preset->add_option("name", preset_name, "corridor|seven-vehicle|two-vehicle")->required();

  CLI11_PARSE(app, argc, argv);
  spdlog::set_default_logger(spdlog::stderr_color_st("slotsim"));
  spdlog::set_level(spdlog::level::from_str(level));

  try {
    if (*run) return cmd_run(scenario, seeds, mode, out, !no_trace);
    if (*compare) return cmd_compare(scenario, n_seeds, first_seed, treat, base, table_out);
    if (*replay) return cmd_replay(trace_path, series, ego);
    if (*preset) {
      std::cout << dump_scenario(load_or_exit("preset:" + preset_name)) << '\n';
      return kExitOk;
    }
    if (*serve) return cmd_serve(scenario, port, camera, time_scale, serve_trace);
  } catch (const ExitCode& e) {
    return e.code;
  } catch (const ConfigError& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kExitInvalidConfig;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kExitIo;
  }
  return kExitOk;
}
