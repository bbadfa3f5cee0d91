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

#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
};

Result run(const std::string& args) {
  const std::string cmd = std::string(SLOTSIM_CLI) + " " + args + " 2>/dev/null";
  FILE* p = popen(cmd.c_str(), "r");
  std::string out;
  char buf[4096];
  while (std::size_t n = std::fread(buf, 1, sizeof(buf), p)) out.append(buf, n);
  const int status = pclose(p);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("slotsim_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

const std::string kScenarios = std::string(SLOTSIM_CONFIG_DIR) + "/scenarios/";

}  // namespace

TEST(Cli, MissingScenarioExit2) {
  EXPECT_EQ(run("run --scenario /nonexistent.json").code, 2);
  EXPECT_EQ(run("compare --scenario /nonexistent.json --seeds 2").code, 2);
}

TEST(Cli, InvalidScenarioExit3) {
  const auto dir = scratch("invalid");
  std::ofstream(dir / "bad.json") << R"({"schema_version": 1, "dt": 3})";
  EXPECT_EQ(run("run --scenario " + (dir / "bad.json").string()).code, 3);
}

TEST(Cli, MalformedTraceExit4) {
  const auto dir = scratch("trace");
  std::ofstream(dir / "bad.csv") << "t,x\n1,2\n";
  EXPECT_EQ(run("replay --trace " + (dir / "bad.csv").string()).code, 4);
}

TEST(Cli, RunOneSeed) {
  const auto dir = scratch("one");
  const auto r = run("run --scenario " + kScenarios + "two-vehicle.json --seed 4 --out " +
                     dir.string());
  ASSERT_EQ(r.code, 0);
  EXPECT_TRUE(fs::exists(dir / "trace_seed4.csv"));
  std::ifstream in(dir / "summary.json");
  const auto j = nlohmann::json::parse(in);
  EXPECT_EQ(j["runs"].size(), 1u);
}

TEST(Cli, RunTenSeedsAggregates) {
  const auto dir = scratch("ten");
  const auto r = run("run --scenario preset:two-vehicle --seed 1,2,3,4,5,6,7,8,9,10 --out " +
                     dir.string());
  ASSERT_EQ(r.code, 0);
  int traces = 0;
  for (const auto& e : fs::directory_iterator(dir)) traces += e.path().extension() == ".csv";
  EXPECT_EQ(traces, 10);
  std::ifstream in(dir / "summary.json");
  const auto j = nlohmann::json::parse(in);
  ASSERT_EQ(j["runs"].size(), 10u);
  double sum = 0;
  for (const auto& run : j["runs"]) sum += run["mean_travel_time"].get<double>();
  EXPECT_NEAR(j["aggregate"]["mean_travel_time"]["mean"].get<double>(), sum / 10, 1e-9);
}

TEST(Cli, CompareSelfIsZero) {
  const auto r = run("compare --scenario preset:corridor --seeds 3 --treatment baseline "
                     "--baseline baseline");
  ASSERT_EQ(r.code, 0);
  std::istringstream in(r.out);
  std::string line;
  bool saw_mean = false;
  while (std::getline(in, line)) {
    if (line.rfind("mean,", 0) == 0) {
      saw_mean = true;
      EXPECT_NE(line.find(",0.0000,"), std::string::npos) << line;
    }
  }
  EXPECT_TRUE(saw_mean);
}

TEST(Cli, CompareSingleSeedHasNoInterval) {
  const auto r = run("compare --scenario preset:corridor --seeds 1");
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(r.out.find("ci95"), std::string::npos);
  int rows = 0;
  std::istringstream in(r.out);
  std::string line;
  while (std::getline(in, line)) rows += std::isdigit(static_cast<unsigned char>(line[0])) != 0;
  EXPECT_EQ(rows, 1);
}

TEST(Cli, ReplaySeries) {
  const auto dir = scratch("replay");
  ASSERT_EQ(run("run --scenario " + kScenarios + "seven-vehicle.json --out " + dir.string()).code,
            0);
  const auto trace = (dir / "trace_seed1.csv").string();
  for (const char* series : {"distance", "slot"}) {
    const auto r = run("replay --trace " + trace + " --series " + series);
    ASSERT_EQ(r.code, 0);
    std::set<std::string> ids;
    std::istringstream in(r.out);
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) ids.insert(line.substr(0, line.find(',')));
    EXPECT_EQ(ids.size(), 7u) << series;
  }
  EXPECT_EQ(run("replay --trace " + trace + " --series speed --ego 0").code, 0);
}

TEST(Cli, ReplayEmptyTrace) {
  const auto dir = scratch("empty");
  std::ofstream(dir / "empty.csv").close();
  const auto r = run("replay --trace " + (dir / "empty.csv").string());
  EXPECT_EQ(r.code, 0);
}
