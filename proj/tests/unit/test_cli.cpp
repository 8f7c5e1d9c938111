// Copyright 2026 The qtp Authors
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

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "qtp/cli.hpp"
#include "qtp/error.hpp"

using namespace qtp;
namespace fs = std::filesystem;

namespace {

std::string tmp_dir(const std::string& leaf) {
  const fs::path p = fs::path(QTP_TEST_TMP) / "unit_cli" / leaf;
  fs::remove_all(p);
  fs::create_directories(p);
  return p.string();
}

std::string write_file(const std::string& dir, const std::string& name, const std::string& text) {
  const std::string path = (fs::path(dir) / name).string();
  std::ofstream(path) << text;
  return path;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const std::string kZeroCoupling = R"({
  "name": "silent",
  "field": {"builder": "free_scalar", "sites": 1, "n_max": 1, "mass": 1.0, "length": 1.0},
  "detectors": [{"model": "two_level", "gap": 1.0, "coupling": 0.0, "sigma": 1.0, "taus": [2.0, 3.0]}],
  "T": 5.0,
  "tasks": ["density", "no_detection"]
})";

}  // namespace

TEST_CASE("task list parsing") {
  CHECK(parse_task_list("density,zeno") == std::vector<std::string>{"density", "zeno"});
  CHECK(parse_task_list("").empty());
  CHECK_THROWS_AS(parse_task_list("density,plot"), DomainError);
  CHECK(known_tasks().size() == 7);
}

TEST_CASE("value formatting round trips exactly") {
  for (double v : {0.0, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 1e-17}) {
    CHECK(std::stod(format_value(v)) == v);
  }
  const std::string dir = tmp_dir("csv");
  CsvTable t{{"grid test"}, {"tau", "density"}, {{0.1, 1.0 / 7.0}, {0.2, 2.0 / 7.0}}};
  write_csv(dir + "/t.csv", t);
  const CsvTable back = read_csv(dir + "/t.csv");
  CHECK(back.columns == t.columns);
  CHECK(back.rows == t.rows);
  CsvTable empty{{}, {"tau", "density"}, {}};
  write_csv(dir + "/e.csv", empty);
  CHECK(read_csv(dir + "/e.csv").rows.empty());
}

TEST_CASE("zero coupling run writes zero densities and unit no-detection") {
  const std::string dir = tmp_dir("zero");
  RunConfig cfg;
  cfg.scenario_path = write_file(dir, "silent.json", kZeroCoupling);
  cfg.tasks = {"density", "no_detection"};
  cfg.out_dir = dir + "/out";
  const ExitReport r = run_scenario(cfg);
  REQUIRE(r.status == kExitOk);
  const CsvTable d = read_csv(cfg.out_dir + "/density_0.csv");
  REQUIRE(d.rows.size() == 2);
  for (const auto& row : d.rows) CHECK(row.back() == 0.0);
  const auto report = nlohmann::json::parse(slurp(cfg.out_dir + "/report.json"));
  CHECK(report["results"]["no_detection"]["assembled"].get<double>() == 1.0);
}

TEST_CASE("validation failures report the condition") {
  const std::string dir = tmp_dir("invalid");
  std::string text = kZeroCoupling;
  text.replace(text.find("\"model\""), 7, "\"delta\": 1.0, \"tube\": {\"kind\": \"at_rest\", \"body\": {\"half_widths\": [0.2, 0, 0], \"counts\": [3, 1, 1]}}, \"model\"");
  const std::string path = write_file(dir, "wide.json", text);
  const ExitReport r = validate_scenario_file(path);
  CHECK(r.status == kExitValidation);
  CHECK(r.diagnostic.find("nons") != std::string::npos);
}

TEST_CASE("parse failures exit with the parse status") {
  const std::string dir = tmp_dir("parse");
  const std::string path = write_file(dir, "broken.json", "{ \"field\": ");
  CHECK(validate_scenario_file(path).status == kExitParse);
}

TEST_CASE("run configuration file") {
  const std::string dir = tmp_dir("config");
  write_file(dir, "silent.json", kZeroCoupling);
  const std::string cfg_path =
      write_file(dir, "run.json", R"({"scenario": "silent.json", "tasks": ["density"], "out": "o", "seed": 7})");
  const RunConfig cfg = load_run_config(cfg_path);
  CHECK(cfg.tasks == std::vector<std::string>{"density"});
  CHECK(cfg.seed == 7);
  CHECK(fs::path(cfg.scenario_path).filename() == "silent.json");
  const RunConfig self = load_run_config(dir + "/silent.json");
  CHECK(self.scenario_path == dir + "/silent.json");
  CHECK(self.tasks.empty());
}
