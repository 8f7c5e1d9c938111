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

#include "qtp/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "qtp/dynamics.hpp"
#include "qtp/povm.hpp"

namespace qtp {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

json rule_json(const QuadratureRule& r) {
  return {{"scheme", scheme_name(r.scheme)}, {"nodes", r.nodes}, {"panels", r.panels}};
}

std::string rule_text(const char* name, const QuadratureRule& r) {
  return std::string("grid ") + name + " " + scheme_name(r.scheme) + " nodes=" + std::to_string(r.nodes) +
         " panels=" + std::to_string(r.panels);
}

json error_json(const char* kind, const std::string& message, const std::string& condition = "") {
  json j{{"status", "error"}, {"kind", kind}, {"message", message}};
  if (!condition.empty()) j["condition"] = condition;
  return j;
}

std::string density_unit(const DetectorModel& det) {
  int axes = 0;
  if (!det.tube.body().pointlike()) {
    for (bool a : det.tube.body().active_axes()) axes += a ? 1 : 0;
  }
  if (axes == 0) return "density[1/time]";
  return "density[1/(time*length^" + std::to_string(axes) + ")]";
}

/// Everything a task needs, shared across tasks of one run.
struct RunContext {
  const ScenarioDocument* doc;
  const Scenario* scenario;
  std::string hash;
  fs::path out;
  std::vector<std::string> provenance;
  Warnings warnings;
  std::vector<std::string> files;
  json results = json::object();

  std::string write(const std::string& name, const CsvTable& table) {
    const fs::path p = out / name;
    write_csv(p.string(), table);
    files.push_back(name);
    return name;
  }

  void write_plot(const std::string& name, const std::vector<std::pair<double, double>>& curve) {
    const fs::path p = out / name;
    std::ofstream f(p);
    if (!f) throw Error("unwritable output path: " + p.string());
    for (const auto& [x, y] : curve) f << format_value(x) << ' ' << format_value(y) << '\n';
    files.push_back(name);
  }

  CsvTable table(std::vector<std::string> columns) const {
    CsvTable t;
    t.provenance = provenance;
    t.columns = std::move(columns);
    return t;
  }
};

void task_density(RunContext& ctx, const Assembler& assembler) {
  const Scenario& sc = *ctx.scenario;
  json out = json::array();
  for (std::size_t d = 0; d < sc.detectors.size(); ++d) {
    const DetectorSetup& setup = sc.detectors[d];
    const std::vector<double> values = assembler.density_grid(d, &ctx.warnings);
    const std::vector<int> mus = setup.record_indices();
    CsvTable t = ctx.table({"tau[time]", "Q_x[length]", "Q_y[length]", "Q_z[length]", "record", density_unit(setup.model)});
    std::vector<std::pair<double, double>> curve;
    std::size_t k = 0;
    double peak = -1e300, peak_tau = 0.0;
    for (double tau : setup.taus) {
      for (std::size_t q = 0; q < setup.Q.size(); ++q) {
        for (std::size_t m = 0; m < mus.size(); ++m) {
          const double v = values[k++];
          t.rows.push_back({tau, setup.Q[q][0], setup.Q[q][1], setup.Q[q][2], static_cast<double>(mus[m]), v});
          if (q == 0 && m == 0) curve.push_back({tau, v});
          if (v > peak) {
            peak = v;
            peak_tau = tau;
          }
        }
      }
    }
    const std::string name = "density_" + std::to_string(d) + ".csv";
    ctx.write(name, t);
    ctx.write_plot("plot_density_" + std::to_string(d) + ".dat", curve);
    out.push_back({{"detector", d}, {"file", name}, {"points", values.size()},
                   {"peak_density", values.empty() ? 0.0 : peak}, {"peak_tau", peak_tau}});
  }
  ctx.results["density"] = out;

  if (const auto& scan = ctx.doc->scan) {
    CsvTable t = ctx.table({"gap[1/time]", density_unit(sc.detectors[scan->detector].model)});
    std::vector<std::pair<double, double>> curve;
    double best = -1e300, best_gap = 0.0;
    for (double gap : scan->gaps) {
      Scenario copy = sc;
      set_detector_gap(copy.detectors[scan->detector].model, gap);
      Assembler a(copy);
      const auto& setup = copy.detectors[scan->detector];
      double v = 0.0;
      for (int mu : setup.record_indices()) {
        v += a.probability({scan->detector}, {EventOutcome{scan->tau, setup.Q.front(), mu}}, &ctx.warnings);
      }
      t.rows.push_back({gap, v});
      curve.push_back({gap, v});
      if (v > best) {
        best = v;
        best_gap = gap;
      }
    }
    const std::string name = "scan_" + std::to_string(scan->detector) + ".csv";
    ctx.write(name, t);
    ctx.write_plot("plot_scan_" + std::to_string(scan->detector) + ".dat", curve);
    ctx.results["scan"] = {{"detector", scan->detector}, {"file", name}, {"tau", scan->tau},
                           {"peak_gap", best_gap}, {"peak_density", best}};
  }

  if (ctx.doc->joint_density && sc.detectors.size() >= 2) {
    std::vector<std::string> cols;
    for (std::size_t d = 0; d < sc.detectors.size(); ++d) cols.push_back("tau" + std::to_string(d) + "[time]");
    cols.push_back("density[1/time^" + std::to_string(sc.detectors.size()) + "]");
    CsvTable t = ctx.table(cols);
    std::vector<std::size_t> idx(sc.detectors.size(), 0);
    while (true) {
      std::vector<EventOutcome> outcomes;
      std::vector<double> row;
      for (std::size_t d = 0; d < sc.detectors.size(); ++d) {
        const auto& s = sc.detectors[d];
        outcomes.push_back({s.taus[idx[d]], s.Q.front(), s.record_indices().front()});
        row.push_back(s.taus[idx[d]]);
      }
      row.push_back(assembler.probability(outcomes, &ctx.warnings));
      t.rows.push_back(row);
      std::size_t d = sc.detectors.size();
      bool done = true;
      while (d-- > 0) {
        if (++idx[d] < sc.detectors[d].taus.size()) {
          done = false;
          break;
        }
        idx[d] = 0;
      }
      if (done) break;
    }
    ctx.write("density_joint.csv", t);
    ctx.results["joint_density"] = {{"file", "density_joint.csv"}, {"points", t.rows.size()}};
  }
}

void task_no_detection(RunContext& ctx, const Assembler& assembler) {
  const Scenario& sc = *ctx.scenario;
  json out{{"assembled", assembler.no_detection(1, &ctx.warnings)}, {"window", sc.T}};
  if (sc.detectors.size() == 1) {
    try {
      const Composite c = build_composite(sc);
      std::vector<ClassFamily> family;
      for (int mu : sc.detectors[0].record_indices()) family.push_back(c.perturbative_family(0, mu));
      const PovmElement e = no_detection_operator(family, sc.T, sc.detectors[0].sigma, ctx.doc->povm_time_rule,
                                                  ctx.doc->povm_smear_rule);
      out["composite"] = real_part_checked((c.rho0 * e.op).trace(), "no-detection expectation", 1e-8);
      out["composite_min_eigenvalue"] = e.min_eigenvalue;
      if (!e.positive) ctx.warnings.add("no-detection operator is not positive");
    } catch (const DimensionError& e) {
      ctx.warnings.add(std::string("no_detection: composite check skipped: ") + e.what());
    }
  }
  if (out["assembled"].get<double>() < 0.0) ctx.warnings.add("assembled no-detection probability is negative");
  ctx.results["no_detection"] = out;
}

void task_povm_family(RunContext& ctx) {
  const Scenario& sc = *ctx.scenario;
  const Composite c = build_composite(sc);
  PerturbativeHistories hist(c.events, c.h0, c.hi);
  std::vector<double> sigmas;
  for (const auto& d : sc.detectors) sigmas.push_back(d.sigma);
  const PovmFamily fam = povm_n_family(hist, sigmas, sc.T, ctx.doc->povm_time_rule, ctx.doc->povm_smear_rule);
  const std::size_t n = sc.detectors.size();
  std::vector<std::string> cols{"member"};
  for (std::size_t i = 0; i < n; ++i) {
    cols.push_back("occurred" + std::to_string(i));
    cols.push_back("record" + std::to_string(i));
    cols.push_back("t" + std::to_string(i) + "[time]");
  }
  for (const char* c2 : {"weight", "min_eigenvalue", "max_eigenvalue", "probability"}) cols.push_back(c2);
  CsvTable t = ctx.table(cols);
  double total = 0.0;
  for (std::size_t k = 0; k < fam.members.size(); ++k) {
    const FamilyMember& m = fam.members[k];
    std::vector<double> row{static_cast<double>(k)};
    std::size_t used = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const bool occ = m.occurred[i];
      row.push_back(occ ? 1.0 : 0.0);
      row.push_back(occ ? static_cast<double>(m.outcomes[used]) : -1.0);
      row.push_back(occ ? m.times[used] : 0.0);
      if (occ) ++used;
    }
    const double p = m.weight * real_part_checked((c.rho0 * m.element.op).trace(), "povm expectation", 1e-8);
    total += p;
    row.insert(row.end(), {m.weight, m.element.min_eigenvalue, m.element.max_eigenvalue, p});
    t.rows.push_back(row);
  }
  ctx.write("povm_family.csv", t);
  if (fam.terminal_min_eigenvalue < -1e-8) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "no-detection element has eigenvalue %.3g", fam.terminal_min_eigenvalue);
    ctx.warnings.add(buf);
  }
  ctx.results["povm_family"] = {{"file", "povm_family.csv"},
                                {"members", fam.members.size()},
                                {"completeness_residual", fam.completeness_residual},
                                {"min_detection_eigenvalue", fam.min_detection_eigenvalue},
                                {"terminal_min_eigenvalue", fam.terminal_min_eigenvalue},
                                {"all_detection_positive", fam.all_detection_positive},
                                {"probability_total", total}};
}

void task_zeno(RunContext& ctx) {
  const Scenario& sc = *ctx.scenario;
  const Composite c = build_composite(sc);
  const Matrix h = c.h0 + c.hi;
  const SubspaceSplit& split = c.splits.front();
  const Matrix c_plus = detection_history(h, split, sc.T, ctx.doc->povm_time_rule);
  const Matrix s_t = restricted_propagator(h, split, sc.T);
  const ZenoReport z = zeno_diagnostic(c_plus, s_t, c.rho0, split, true);
  ctx.results["zeno"] = {{"detected", z.detected},        {"undetected", z.undetected},
                         {"interference", z.interference}, {"sum", z.sum},
                         {"target", z.target},             {"normalized", z.normalized},
                         {"detected_at_most_one", z.detected_at_most_one},
                         {"balance_checked", z.balance_checked}, {"balance_lhs", z.balance_lhs},
                         {"balance_rhs", z.balance_rhs},     {"balance_holds", z.balance_holds}};
}

void task_consistency(RunContext& ctx) {
  const Scenario& sc = *ctx.scenario;
  const Composite c = build_composite(sc);
  const Matrix h = c.h0 + c.hi;
  const int mu = sc.detectors[0].record_indices().front();
  const ClassFamily fam = exact_family(h, c.splits.front(), c.events.povm_roots[0][static_cast<std::size_t>(mu)]);
  const ConsistencyReport r = consistency_offdiagonal(fam, c.rho0, {0.0, 0.5 * sc.T}, {0.5 * sc.T, sc.T},
                                                      ctx.doc->povm_time_rule);
  ctx.results["consistency"] = {{"offdiagonal_re", r.offdiagonal.real()}, {"offdiagonal_im", r.offdiagonal.imag()},
                                {"p_first", r.p_first}, {"p_second", r.p_second}, {"p_union", r.p_union},
                                {"additivity_defect", r.additivity_defect}, {"residual", r.residual}};
}

void task_covariance(RunContext& ctx, const Assembler& assembler) {
  const Scenario& sc = *ctx.scenario;
  const CorrelatorEngine& engine = assembler.engine();
  const DetectorSetup& setup = sc.detectors.front();
  const std::string index = setup.model.currents.begin()->first;
  const double tau = setup.taus[setup.taus.size() / 2];
  const std::vector<CtpPoint> fwd{{setup.model.tube.eval(tau + 0.5 * setup.sigma, {0, 0, 0}), index}};
  const std::vector<CtpPoint> bwd{{setup.model.tube.eval(tau - 0.5 * setup.sigma, {0, 0, 0}), index}};
  json out;
  auto report = [](const TranslationReport& r) {
    return json{{"applicable", r.applicable}, {"reason", r.reason}, {"deviation", r.deviation}, {"pass", r.pass}};
  };
  out["correlator_time_shift"] = report(translation_covariance_check(engine, {0.25 * sc.T, 0, 0, 0}, fwd, bwd, 1e-8));
  out["correlator_space_shift"] =
      report(translation_covariance_check(engine, {0, sc.field.spacing(), 0, 0}, fwd, bwd, 1e-10));

  const bool stationary = engine.rho_time_defect() <= 1e-10;
  json assembled{{"applicable", stationary}};
  if (stationary) {
    Scenario moved = sc;
    const FourVector shift{0.25 * sc.T, 0.0, 0.0, 0.0};
    for (auto& d : moved.detectors) d.model.tube = boost_embedding(d.model.tube, Lorentz::Identity(), shift);
    Assembler other(moved);
    double worst = 0.0;
    const std::size_t count = std::min<std::size_t>(3, setup.taus.size());
    for (std::size_t k = 0; k < count; ++k) {
      const EventOutcome o{setup.taus[k * setup.taus.size() / count], setup.Q.front(), setup.record_indices().front()};
      const double a = assembler.probability({0}, {o}, &ctx.warnings);
      const double b = other.probability({0}, {o}, &ctx.warnings);
      worst = std::max(worst, std::abs(a - b) / std::max(std::abs(a), 1e-300));
    }
    assembled["relative_deviation"] = worst;
    assembled["pass"] = worst <= 1e-8;
  }
  out["assembled_time_shift"] = assembled;
  ctx.results["covariance_check"] = out;
}

void task_convergence(RunContext& ctx) {
  const Scenario& sc = *ctx.scenario;
  std::vector<std::unique_ptr<Scenario>> refined;
  std::vector<std::unique_ptr<Assembler>> assemblers;
  for (int factor : {1, 2, 4}) {
    auto copy = std::make_unique<Scenario>(sc);
    copy->time_rule.panels *= factor;
    assemblers.push_back(std::make_unique<Assembler>(*copy));
    refined.push_back(std::move(copy));
  }
  CsvTable t = ctx.table({"detector", "tau[time]", "mu", "p_n", "p_2n", "p_4n", "error_estimate"});
  double worst = 0.0;
  for (std::size_t d = 0; d < sc.detectors.size(); ++d) {
    const DetectorSetup& setup = sc.detectors[d];
    for (double tau : setup.taus) {
      for (int mu : setup.record_indices()) {
        const EventOutcome o{tau, setup.Q.front(), mu};
        double p[3];
        for (int r = 0; r < 3; ++r) p[r] = assemblers[static_cast<std::size_t>(r)]->probability({d}, {o}, &ctx.warnings);
        // Richardson: the observed contraction ratio sets the tail estimate.
        const double d1 = std::abs(p[1] - p[0]);
        const double d2 = std::abs(p[2] - p[1]);
        const double ratio = d2 > 0.0 ? d1 / d2 : 0.0;
        const double est = ratio > 1.0 ? d2 / (ratio - 1.0) : d2;
        worst = std::max(worst, est);
        t.rows.push_back({static_cast<double>(d), tau, static_cast<double>(mu), p[0], p[1], p[2], est});
      }
    }
  }
  ctx.write("sweep.csv", t);
  ctx.results["convergence_sweep"] = {{"file", "sweep.csv"}, {"max_error_estimate", worst},
                                      {"base_panels", sc.time_rule.panels}};
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path, 0, "", "cannot open file");
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

const std::vector<std::string>& known_tasks() {
  static const std::vector<std::string> tasks{"density",     "povm_family",       "no_detection",     "zeno",
                                              "consistency", "covariance_check", "convergence_sweep"};
  return tasks;
}

std::vector<std::string> parse_task_list(const std::string& list) {
  std::vector<std::string> out;
  std::stringstream in(list);
  std::string item;
  while (std::getline(in, item, ',')) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (item.empty()) continue;
    if (std::find(known_tasks().begin(), known_tasks().end(), item) == known_tasks().end()) {
      throw DomainError("unknown task '" + item + "'");
    }
    out.push_back(item);
  }
  return out;
}

RunConfig load_run_config(const std::string& path) {
  const std::string text = read_text(path);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    int line = 1;
    for (std::size_t k = 0; k < std::min<std::size_t>(e.byte, text.size()); ++k) line += text[k] == '\n';
    throw ParseError(path, line, "", "malformed JSON");
  }
  RunConfig cfg;
  if (!j.is_object()) throw ParseError(path, 0, "", "expected a JSON object");
  if (j.contains("field")) {
    cfg.scenario_path = path;
    return cfg;
  }
  if (!j.contains("scenario") || !j.at("scenario").is_string()) throw ParseError(path, 0, "/scenario", "missing");
  fs::path sp(j.at("scenario").get<std::string>());
  if (sp.is_relative()) sp = fs::path(path).parent_path() / sp;
  cfg.scenario_path = sp.string();
  if (!fs::exists(sp)) throw ParseError(path, 0, "/scenario", "file does not exist: " + sp.string());
  try {
    if (j.contains("tasks")) {
      for (const auto& t : j.at("tasks")) cfg.tasks.push_back(parse_task_list(t.get<std::string>()).at(0));
    }
    if (j.contains("out")) cfg.out_dir = j.at("out").get<std::string>();
    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("overrides")) {
      const json& o = j.at("overrides");
      if (o.contains("nodes_time")) cfg.overrides.nodes_time = o.at("nodes_time").get<int>();
      if (o.contains("nodes_space")) cfg.overrides.nodes_space = o.at("nodes_space").get<int>();
      if (o.contains("sigma")) cfg.overrides.sigma = o.at("sigma").get<double>();
    }
  } catch (const json::exception& e) {
    throw ParseError(path, 0, "", e.what());
  } catch (const std::out_of_range&) {
    throw ParseError(path, 0, "/tasks", "empty task name");
  } catch (const DomainError& e) {
    throw ParseError(path, 0, "/tasks", e.what());
  }
  return cfg;
}

void apply_overrides(Scenario& scenario, const GridOverrides& overrides) {
  if (overrides.nodes_time) {
    if (*overrides.nodes_time < 2) throw DomainError("--nodes-time must be >= 2");
    scenario.time_rule.nodes = *overrides.nodes_time;
  }
  if (overrides.nodes_space) {
    if (*overrides.nodes_space < 2) throw DomainError("--nodes-space must be >= 2");
    scenario.space_rule.nodes = *overrides.nodes_space;
  }
  if (overrides.sigma) {
    for (auto& d : scenario.detectors) d.sigma = *overrides.sigma;
  }
}

ExitReport run_scenario(const RunConfig& config) {
  ExitReport report;
  try {
    ScenarioDocument doc = load_scenario_file(config.scenario_path);
    apply_overrides(doc.scenario, config.overrides);
    std::vector<std::string> tasks = config.tasks.empty() ? doc.tasks : config.tasks;
    if (tasks.empty()) {
      report.status = kExitUsage;
      report.diagnostic = error_json("usage", "no tasks requested").dump();
      return report;
    }
    for (const auto& t : tasks) {
      if (std::find(known_tasks().begin(), known_tasks().end(), t) == known_tasks().end()) {
        report.status = kExitUsage;
        report.diagnostic = error_json("usage", "unknown task '" + t + "'").dump();
        return report;
      }
    }
    const Scenario& sc = doc.scenario;
    json overrides = json::object();
    if (config.overrides.nodes_time) overrides["nodes_time"] = *config.overrides.nodes_time;
    if (config.overrides.nodes_space) overrides["nodes_space"] = *config.overrides.nodes_space;
    if (config.overrides.sigma) overrides["sigma"] = *config.overrides.sigma;

    RunContext ctx;
    ctx.doc = &doc;
    ctx.scenario = &sc;
    ctx.hash = fnv1a_hex(doc.canonical + "|" + overrides.dump() + "|" + json(tasks).dump() + "|" +
                         std::to_string(config.seed));
    ctx.out = config.out_dir;
    std::error_code ec;
    fs::create_directories(ctx.out, ec);
    if (ec || !fs::is_directory(ctx.out)) throw Error("unwritable output path: " + ctx.out.string());
    ctx.provenance = {"scenario " + sc.name,
                      "hash " + ctx.hash,
                      rule_text("time", sc.time_rule),
                      rule_text("space", sc.space_rule),
                      rule_text("window", sc.window_rule),
                      "tolerances residue=" + format_value(kResidueTolerance) +
                          " nonsimultaneity=" + format_value(kNonsimultaneityThreshold) +
                          " pointer=" + format_value(kPointerThreshold) +
                          " stationarity=" + format_value(kStationarityThreshold)};

    Assembler assembler(sc);
    ctx.warnings.merge(assembler.warnings());
    for (const auto& task : tasks) {
      if (task == "density") task_density(ctx, assembler);
      if (task == "no_detection") task_no_detection(ctx, assembler);
      if (task == "povm_family") task_povm_family(ctx);
      if (task == "zeno") task_zeno(ctx);
      if (task == "consistency") task_consistency(ctx);
      if (task == "covariance_check") task_covariance(ctx, assembler);
      if (task == "convergence_sweep") task_convergence(ctx);
    }

    json checks = json::array();
    for (const auto& c : assembler.checks()) {
      checks.push_back({{"nons1_ratio", c.nonsimultaneity.extent_ratio},
                        {"nons2_ratio", c.nonsimultaneity.metric_ratio},
                        {"stationarity_residual", c.stationarity.residual},
                        {"pointer_ratio", c.pointer.max_ratio},
                        {"general_kernel", c.general_kernel}});
    }
    std::set<std::string> unique(ctx.warnings.messages().begin(), ctx.warnings.messages().end());
    json grids{{"time", rule_json(sc.time_rule)},
               {"space", rule_json(sc.space_rule)},
               {"window", rule_json(sc.window_rule)},
               {"povm_time", rule_json(doc.povm_time_rule)},
               {"povm_smear", rule_json(doc.povm_smear_rule)}};
    json out{{"status", "ok"},
             {"scenario", sc.name},
             {"source", fs::path(config.scenario_path).filename().string()},
             {"hash", ctx.hash},
             {"seed", config.seed},
             {"tasks", tasks},
             {"overrides", overrides},
             {"grids", grids},
             {"tolerances",
              {{"residue", kResidueTolerance},
               {"nonsimultaneity", kNonsimultaneityThreshold},
               {"pointer", kPointerThreshold},
               {"stationarity", kStationarityThreshold}}},
             {"checks", checks},
             {"results", ctx.results},
             {"warnings", std::vector<std::string>(unique.begin(), unique.end())},
             {"files", ctx.files}};
    const fs::path rp = ctx.out / "report.json";
    std::ofstream f(rp);
    if (!f) throw Error("unwritable output path: " + rp.string());
    f << out.dump(2) << '\n';
    ctx.files.push_back("report.json");
    report.files = ctx.files;
    report.diagnostic = json{{"status", "ok"}, {"hash", ctx.hash}, {"out", ctx.out.string()}}.dump();
    report.status = kExitOk;
  } catch (const ParseError& e) {
    json j = error_json("parse", e.what());
    j["source"] = e.source();
    j["line"] = e.line();
    j["field"] = e.field();
    report.status = kExitParse;
    report.diagnostic = j.dump();
  } catch (const ValidationError& e) {
    report.status = kExitValidation;
    report.diagnostic = error_json("validation", e.what(), e.condition()).dump();
  } catch (const std::exception& e) {
    report.status = kExitFailure;
    report.diagnostic = error_json("failure", e.what()).dump();
  }
  return report;
}

ExitReport validate_scenario_file(const std::string& path) {
  ExitReport report;
  try {
    const ScenarioDocument doc = load_scenario_file(path);
    Warnings w;
    const auto checks = validate_scenario(doc.scenario, w);
    json c = json::array();
    for (const auto& k : checks) {
      c.push_back({{"nons1_ratio", k.nonsimultaneity.extent_ratio},
                   {"nons2_ratio", k.nonsimultaneity.metric_ratio},
                   {"stationarity_residual", k.stationarity.residual},
                   {"pointer_ratio", k.pointer.max_ratio},
                   {"general_kernel", k.general_kernel}});
    }
    report.diagnostic = json{{"status", "ok"}, {"checks", c}, {"warnings", w.messages()}}.dump();
  } catch (const ParseError& e) {
    json j = error_json("parse", e.what());
    j["line"] = e.line();
    j["field"] = e.field();
    report.status = kExitParse;
    report.diagnostic = j.dump();
  } catch (const ValidationError& e) {
    report.status = kExitValidation;
    report.diagnostic = error_json("validation", e.what(), e.condition()).dump();
  } catch (const std::exception& e) {
    report.status = kExitFailure;
    report.diagnostic = error_json("failure", e.what()).dump();
  }
  return report;
}

std::string format_value(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16e", value);
  return buf;
}

void write_csv(const std::string& path, const CsvTable& table) {
  std::ofstream f(path);
  if (!f) throw Error("unwritable output path: " + path);
  for (const auto& line : table.provenance) f << "# " << line << '\n';
  for (std::size_t k = 0; k < table.columns.size(); ++k) f << (k ? "," : "") << table.columns[k];
  f << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t k = 0; k < row.size(); ++k) f << (k ? "," : "") << format_value(row[k]);
    f << '\n';
  }
  if (!f) throw Error("failed writing " + path);
}

CsvTable read_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ParseError(path, 0, "", "cannot open file");
  CsvTable t;
  std::string line;
  int number = 0;
  bool header = false;
  while (std::getline(f, line)) {
    ++number;
    if (line.rfind("# ", 0) == 0) {
      t.provenance.push_back(line.substr(2));
      continue;
    }
    std::stringstream in(line);
    std::string cell;
    if (!header) {
      while (std::getline(in, cell, ',')) t.columns.push_back(cell);
      header = true;
      continue;
    }
    std::vector<double> row;
    while (std::getline(in, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw ParseError(path, number, "", "malformed number '" + cell + "'");
      }
    }
    if (row.size() != t.columns.size()) throw ParseError(path, number, "", "column count mismatch");
    t.rows.push_back(std::move(row));
  }
  return t;
}

}  // namespace qtp
