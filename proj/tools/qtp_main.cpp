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

// Command-line driver: run, validate and sweep scenario files.

#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "qtp/cli.hpp"

namespace {

struct Flags {
  std::string out;
  std::string tasks;
  int nodes_time = 0;
  int nodes_space = 0;
  double sigma = 0.0;
  bool have_tasks = false;
};

void add_run_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--out", f.out, "Output directory");
  cmd->add_option("--tasks", f.tasks, "Comma-separated task list");
  cmd->add_option("--nodes-time", f.nodes_time, "Gauss-Legendre nodes per panel on the s axis");
  cmd->add_option("--nodes-space", f.nodes_space, "Nodes per body axis for the r integral");
  cmd->add_option("--sigma", f.sigma, "Smearing scale for every detector");
}

int fail(int status, const char* kind, const std::string& message) {
  std::cerr << nlohmann::json{{"status", "error"}, {"kind", kind}, {"message", message}}.dump() << '\n';
  return status;
}

int finish(const qtp::ExitReport& r) {
  (r.status == 0 ? std::cout : std::cerr) << r.diagnostic << '\n';
  return r.status;
}

int execute(const std::string& config_path, const Flags& f, const CLI::App* cmd, bool sweep) {
  qtp::RunConfig cfg;
  try {
    cfg = qtp::load_run_config(config_path);
    if (!f.out.empty()) cfg.out_dir = f.out;
    if (cmd->count("--tasks")) {
      cfg.tasks = qtp::parse_task_list(f.tasks);
      if (cfg.tasks.empty()) return fail(qtp::kExitUsage, "usage", "empty task list");
    }
    if (cmd->count("--nodes-time")) cfg.overrides.nodes_time = f.nodes_time;
    if (cmd->count("--nodes-space")) cfg.overrides.nodes_space = f.nodes_space;
    if (cmd->count("--sigma")) cfg.overrides.sigma = f.sigma;
    if (sweep) cfg.tasks = {"convergence_sweep"};
  } catch (const qtp::ParseError& e) {
    return fail(qtp::kExitParse, "parse", e.what());
  } catch (const qtp::DomainError& e) {
    return fail(qtp::kExitUsage, "usage", e.what());
  }
  return finish(qtp::run_scenario(cfg));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Relativistic detection-probability engine"};
  app.require_subcommand(1);

  Flags run_flags, sweep_flags;
  std::string run_config, sweep_config, scenario;

  auto* run = app.add_subcommand("run", "Execute the tasks of a run configuration or scenario");
  run->add_option("config", run_config, "Run configuration or scenario file")->required()->check(CLI::ExistingFile);
  add_run_flags(run, run_flags);

  auto* validate = app.add_subcommand("validate", "Parse a scenario and run its validity checks");
  validate->add_option("scenario", scenario, "Scenario file")->required()->check(CLI::ExistingFile);

  auto* sweep = app.add_subcommand("sweep", "Convergence sweep over doubled quadrature grids");
  sweep->add_option("config", sweep_config, "Run configuration or scenario file")->required()->check(CLI::ExistingFile);
  add_run_flags(sweep, sweep_flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : qtp::kExitUsage;
  }

  if (*run) return execute(run_config, run_flags, run, false);
  if (*sweep) return execute(sweep_config, sweep_flags, sweep, true);
  if (*validate) return finish(qtp::validate_scenario_file(scenario));
  return qtp::kExitUsage;
}
