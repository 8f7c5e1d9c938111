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

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qtp/scenario.hpp"

namespace qtp {

struct GridOverrides {
  std::optional<int> nodes_time;
  std::optional<int> nodes_space;
  std::optional<double> sigma;
};

struct RunConfig {
  std::string scenario_path;
  std::vector<std::string> tasks;
  GridOverrides overrides;
  std::string out_dir = "qtp-out";
  std::uint64_t seed = 0;
};

/// Result of a run: exit status, a JSON diagnostic and the files written.
struct ExitReport {
  int status = 0;
  std::string diagnostic;
  std::vector<std::string> files;
};

enum ExitStatus : int { kExitOk = 0, kExitUsage = 1, kExitValidation = 2, kExitParse = 3, kExitFailure = 4 };

const std::vector<std::string>& known_tasks();
/// Comma-separated task list; throws DomainError on an unknown name.
std::vector<std::string> parse_task_list(const std::string& list);

/// Reads a run configuration. A file holding a scenario (it has a "field"
/// section) is taken as its own configuration.
RunConfig load_run_config(const std::string& path);

void apply_overrides(Scenario& scenario, const GridOverrides& overrides);

ExitReport run_scenario(const RunConfig& config);
ExitReport validate_scenario_file(const std::string& path);

/// Self-describing CSV: '#' provenance lines, a header row, numeric rows.
struct CsvTable {
  std::vector<std::string> provenance;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

/// Seventeen significant digits ("%.16e"), enough for an exact round trip.
std::string format_value(double value);
void write_csv(const std::string& path, const CsvTable& table);
CsvTable read_csv(const std::string& path);

}  // namespace qtp
