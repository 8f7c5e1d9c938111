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

#include "qtp/scenario.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace qtp {

namespace {

using nlohmann::json;

struct Ctx {
  std::string source;
  std::string base_dir;

  [[noreturn]] void fail(const std::string& path, const std::string& msg) const {
    throw ParseError(source, 0, path, msg);
  }

  const json& req(const json& j, const std::string& key, const std::string& path) const {
    if (!j.is_object() || !j.contains(key)) fail(path + "/" + key, "missing");
    return j.at(key);
  }

  double number(const json& j, const std::string& path) const {
    if (!j.is_number()) fail(path, "expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) fail(path, "not finite");
    return v;
  }

  double number(const json& j, const std::string& key, const std::string& path, std::optional<double> fallback) const {
    if (!j.contains(key)) {
      if (fallback) return *fallback;
      fail(path + "/" + key, "missing");
    }
    return number(j.at(key), path + "/" + key);
  }

  int integer(const json& j, const std::string& key, const std::string& path, std::optional<int> fallback) const {
    if (!j.contains(key)) {
      if (fallback) return *fallback;
      fail(path + "/" + key, "missing");
    }
    const json& v = j.at(key);
    if (!v.is_number_integer()) fail(path + "/" + key, "expected an integer");
    return v.get<int>();
  }

  std::string text(const json& j, const std::string& key, const std::string& path,
                    std::optional<std::string> fallback) const {
    if (!j.contains(key)) {
      if (fallback) return *fallback;
      fail(path + "/" + key, "missing");
    }
    if (!j.at(key).is_string()) fail(path + "/" + key, "expected a string");
    return j.at(key).get<std::string>();
  }

  Complex complex(const json& j, const std::string& path) const {
    if (j.is_number()) return {number(j, path), 0.0};
    if (j.is_array() && j.size() == 2) return {number(j[0], path + "/0"), number(j[1], path + "/1")};
    if (j.is_string()) {
      std::istringstream in(j.get<std::string>());
      double re = 0.0, im = 0.0;
      std::string rest;
      if (!(in >> re >> im) || (in >> rest)) fail(path, "expected \"re im\"");
      return {re, im};
    }
    fail(path, "expected a complex number as [re, im], \"re im\" or a real");
  }

  Matrix matrix(const json& j, const std::string& path) const {
    if (!j.is_array() || j.empty()) fail(path, "expected a non-empty list of rows");
    const Index d = static_cast<Index>(j.size());
    Matrix m(d, d);
    for (Index r = 0; r < d; ++r) {
      const json& row = j[static_cast<std::size_t>(r)];
      const std::string rp = path + "/" + std::to_string(r);
      if (!row.is_array() || static_cast<Index>(row.size()) != d) fail(rp, "row length must equal the row count");
      for (Index c = 0; c < d; ++c) m(r, c) = complex(row[static_cast<std::size_t>(c)], rp + "/" + std::to_string(c));
    }
    return m;
  }

  Vector vector(const json& j, const std::string& path) const {
    if (!j.is_array() || j.empty()) fail(path, "expected a non-empty list");
    Vector v(static_cast<Index>(j.size()));
    for (std::size_t k = 0; k < j.size(); ++k) v(static_cast<Index>(k)) = complex(j[k], path + "/" + std::to_string(k));
    return v;
  }

  std::vector<double> numbers(const json& j, const std::string& path) const {
    if (!j.is_array()) fail(path, "expected a list of numbers");
    std::vector<double> out;
    for (std::size_t k = 0; k < j.size(); ++k) out.push_back(number(j[k], path + "/" + std::to_string(k)));
    return out;
  }

  /// Either a list or {"from", "to", "count"} with inclusive ends.
  std::vector<double> range(const json& j, const std::string& path) const {
    if (j.is_array()) return numbers(j, path);
    const double lo = number(j, "from", path, std::nullopt);
    const double hi = number(j, "to", path, std::nullopt);
    const int n = integer(j, "count", path, std::nullopt);
    if (n < 1) fail(path + "/count", "must be positive");
    std::vector<double> out;
    for (int k = 0; k < n; ++k) out.push_back(n == 1 ? lo : lo + (hi - lo) * k / (n - 1));
    return out;
  }

  Point3 point3(const json& j, const std::string& path) const {
    const auto v = numbers(j, path);
    if (v.size() != 3) fail(path, "expected three coordinates");
    return {v[0], v[1], v[2]};
  }

  FourVector point4(const json& j, const std::string& path) const {
    const auto v = numbers(j, path);
    if (v.size() != 4) fail(path, "expected four coordinates");
    return {v[0], v[1], v[2], v[3]};
  }

  std::string resolve(const std::string& file) const {
    std::filesystem::path p(file);
    if (p.is_relative() && !base_dir.empty()) p = std::filesystem::path(base_dir) / p;
    return p.string();
  }

  QuadratureRule rule(const json& j, const std::string& path, QuadratureRule fallback) const {
    QuadratureRule r = fallback;
    if (j.contains("scheme")) {
      try {
        r.scheme = parse_scheme(text(j, "scheme", path, std::nullopt));
      } catch (const DomainError& e) {
        fail(path + "/scheme", e.what());
      }
    }
    r.nodes = integer(j, "nodes", path, fallback.nodes);
    r.panels = integer(j, "panels", path, fallback.panels);
    if (r.nodes < 2 || r.panels < 1) fail(path, "nodes must be >= 2 and panels >= 1");
    return r;
  }
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path, 0, "", "cannot open file");
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

FieldModel parse_field(const json& j, const Ctx& ctx, const std::string& path) {
  const std::string builder = ctx.text(j, "builder", path, std::nullopt);
  try {
    if (builder == "free_scalar") {
      FockOptions fock;
      if (j.contains("occupations")) {
        for (double v : ctx.numbers(j.at("occupations"), path + "/occupations")) fock.occupations.push_back(static_cast<int>(v));
      }
      return free_scalar_builder(ctx.integer(j, "sites", path, 1), ctx.integer(j, "n_max", path, 2),
                                 ctx.number(j, "mass", path, 1.0), ctx.number(j, "length", path, std::nullopt), fock);
    }
    if (builder == "file") {
      return load_field_file(ctx.resolve(ctx.text(j, "path", path, std::nullopt)));
    }
    if (builder == "product") {
      const json& sectors = ctx.req(j, "sectors", path);
      if (!sectors.is_array() || sectors.size() != 2) ctx.fail(path + "/sectors", "expected two sectors");
      std::vector<std::string> suffixes{"_1", "_2"};
      if (j.contains("suffixes")) {
        const json& s = j.at("suffixes");
        if (!s.is_array() || s.size() != 2 || !s[0].is_string() || !s[1].is_string()) {
          ctx.fail(path + "/suffixes", "expected two strings");
        }
        suffixes = {s[0].get<std::string>(), s[1].get<std::string>()};
      }
      return product_field(parse_field(sectors[0], ctx, path + "/sectors/0"), suffixes[0],
                           parse_field(sectors[1], ctx, path + "/sectors/1"), suffixes[1]);
    }
    if (builder == "custom") {
      FieldModel f;
      f.h_phi = ctx.matrix(ctx.req(j, "hamiltonian", path), path + "/hamiltonian");
      f.rho0 = ctx.matrix(ctx.req(j, "rho0", path), path + "/rho0");
      if (j.contains("sites")) f.sites = ctx.numbers(j.at("sites"), path + "/sites");
      f.length = ctx.number(j, "length", path, 0.0);
      if (j.contains("momentum")) f.momentum = ctx.matrix(j.at("momentum"), path + "/momentum");
      const json& comps = ctx.req(j, "composites", path);
      if (!comps.is_object()) ctx.fail(path + "/composites", "expected {index: [matrix per site]}");
      for (const auto& [name, list] : comps.items()) {
        const std::string cp = path + "/composites/" + name;
        if (!list.is_array()) ctx.fail(cp, "expected a list of matrices, one per site");
        for (std::size_t k = 0; k < list.size(); ++k) {
          f.composites[name].push_back(ctx.matrix(list[k], cp + "/" + std::to_string(k)));
        }
      }
      f.validate();
      return f;
    }
  } catch (const ValidationError& e) {
    ctx.fail(path, std::string(e.condition()) + ": " + e.what());
  } catch (const DomainError& e) {
    ctx.fail(path, e.what());
  }
  ctx.fail(path + "/builder", "unknown field builder '" + builder + "'");
}

BodySet parse_body(const json& j, const Ctx& ctx, const std::string& path) {
  if (!j.contains("body")) return BodySet::point();
  const json& b = j.at("body");
  const std::string bp = path + "/body";
  const Point3 half = ctx.point3(ctx.req(b, "half_widths", bp), bp + "/half_widths");
  const Point3 counts = ctx.point3(ctx.req(b, "counts", bp), bp + "/counts");
  try {
    return BodySet::grid(half, {static_cast<int>(counts[0]), static_cast<int>(counts[1]), static_cast<int>(counts[2])});
  } catch (const DomainError& e) {
    ctx.fail(bp, e.what());
  }
}

WorldTube parse_tube(const json& j, const Ctx& ctx, const std::string& path) {
  const BodySet body = parse_body(j, ctx, path);
  const std::string kind = ctx.text(j, "kind", path, "at_rest");
  const FourVector origin = j.contains("origin") ? ctx.point4(j.at("origin"), path + "/origin") : FourVector{};
  try {
    if (kind == "at_rest") return WorldTube::at_rest(origin, body);
    if (kind == "inertial") {
      return WorldTube::inertial(origin, ctx.point3(ctx.req(j, "velocity", path), path + "/velocity"), body);
    }
    if (kind == "accelerated") {
      const auto range = ctx.numbers(ctx.req(j, "tau_range", path), path + "/tau_range");
      if (range.size() != 2) ctx.fail(path + "/tau_range", "expected [lo, hi]");
      return WorldTube::uniform_acceleration(ctx.number(j, "acceleration", path, std::nullopt), range[0], range[1],
                                             ctx.integer(j, "samples", path, 2049), body);
    }
    if (kind == "tabulated") {
      const std::string file = ctx.resolve(ctx.text(j, "table", path, std::nullopt));
      return WorldTube::tabulated(parse_tube_table(read_file(file), file), body);
    }
  } catch (const ValidationError& e) {
    ctx.fail(path, std::string(e.condition()) + ": " + e.what());
  } catch (const DomainError& e) {
    ctx.fail(path, e.what());
  }
  ctx.fail(path + "/kind", "unknown world-tube kind '" + kind + "'");
}

DetectorModel parse_detector_model(const json& j, const Ctx& ctx, const std::string& path) {
  const std::string model = ctx.text(j, "model", path, "two_level");
  const std::string current = ctx.text(j, "current", path, "phi");
  try {
    if (model == "two_level") return two_level_detector(ctx.number(j, "gap", path, std::nullopt), current);
    if (model == "multilevel") {
      return multilevel_detector(ctx.numbers(ctx.req(j, "gaps", path), path + "/gaps"), current);
    }
    if (model == "custom") {
      DetectorModel det;
      det.self_h = ctx.matrix(ctx.req(j, "self_h", path), path + "/self_h");
      const Index d = det.self_h.rows();
      std::vector<Index> plus;
      for (double v : ctx.numbers(ctx.req(j, "excited_levels", path), path + "/excited_levels")) {
        plus.push_back(static_cast<Index>(v));
      }
      det.split = SubspaceSplit::coordinate(d, plus);
      const json& currents = ctx.req(j, "currents", path);
      if (!currents.is_object()) ctx.fail(path + "/currents", "expected {index: [matrix per body point]}");
      for (const auto& [name, list] : currents.items()) {
        const std::string cp = path + "/currents/" + name;
        if (!list.is_array()) ctx.fail(cp, "expected a list of matrices");
        for (std::size_t k = 0; k < list.size(); ++k) {
          det.currents[name].push_back(ctx.matrix(list[k], cp + "/" + std::to_string(k)));
        }
      }
      det.omega = ctx.vector(ctx.req(j, "omega", path), path + "/omega");
      if (j.contains("omega_prime")) det.omega_prime = ctx.vector(j.at("omega_prime"), path + "/omega_prime");
      const json& records = ctx.req(j, "records", path);
      if (!records.is_array()) ctx.fail(path + "/records", "expected a list of matrices");
      for (std::size_t k = 0; k < records.size(); ++k) {
        det.pointer_other.push_back(ctx.matrix(records[k], path + "/records/" + std::to_string(k)));
      }
      if (j.contains("record_labels")) {
        for (const auto& s : j.at("record_labels")) {
          if (!s.is_string()) ctx.fail(path + "/record_labels", "expected strings");
          det.mu_labels.push_back(s.get<std::string>());
        }
      }
      return det;
    }
  } catch (const DomainError& e) {
    ctx.fail(path, e.what());
  }
  ctx.fail(path + "/model", "unknown detector model '" + model + "'");
}

DetectorSetup parse_detector(const json& j, const Ctx& ctx, const std::string& path) {
  DetectorSetup s;
  s.model = parse_detector_model(j, ctx, path);
  s.model.tube = j.contains("tube") ? parse_tube(j.at("tube"), ctx, path + "/tube")
                                    : WorldTube::at_rest({0.0, 0.0, 0.0, 0.0}, BodySet::point());
  s.model.delta = ctx.number(j, "delta", path, 1.0);
  // A single current operator is a uniform density over the body.
  const std::size_t npts = s.model.tube.body().points.size();
  for (auto& [name, family] : s.model.currents) {
    if (family.size() == 1 && npts > 1) family.assign(npts, family.front());
  }
  s.coupling = ctx.number(j, "coupling", path, std::nullopt);
  s.sigma = ctx.number(j, "sigma", path, std::nullopt);
  if (j.contains("taus")) s.taus = ctx.range(j.at("taus"), path + "/taus");
  if (j.contains("Q")) {
    const json& q = j.at("Q");
    if (!q.is_array() || q.empty()) ctx.fail(path + "/Q", "expected a list of points");
    s.Q.clear();
    for (std::size_t k = 0; k < q.size(); ++k) s.Q.push_back(ctx.point3(q[k], path + "/Q/" + std::to_string(k)));
    s.Q_weights = j.contains("Q_weights") ? ctx.numbers(j.at("Q_weights"), path + "/Q_weights")
                                          : std::vector<double>(s.Q.size(), 1.0);
  }
  if (j.contains("report_records")) {
    for (double v : ctx.numbers(j.at("report_records"), path + "/report_records")) s.mus.push_back(static_cast<int>(v));
  }
  return s;
}

}  // namespace

std::vector<TubeSample> parse_tube_table(const std::string& text, const std::string& source) {
  std::vector<TubeSample> rows;
  std::istringstream in(text);
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::vector<double> v;
    std::string tok;
    while (ls >> tok) {
      try {
        std::size_t used = 0;
        v.push_back(std::stod(tok, &used));
        if (used != tok.size()) throw std::invalid_argument(tok);
      } catch (const std::exception&) {
        throw ParseError(source, number, "row", "malformed number '" + tok + "'");
      }
    }
    if (v.empty()) continue;
    if (v.size() != 8) throw ParseError(source, number, "row", "expected 8 columns: tau q1 q2 q3 E0 E1 E2 E3");
    rows.push_back({v[0], {v[1], v[2], v[3]}, {v[4], v[5], v[6], v[7]}});
  }
  if (rows.empty()) throw ParseError(source, 0, "", "no rows");
  return rows;
}

void set_detector_gap(DetectorModel& det, double gap) {
  if (det.dim() != 2) throw DomainError("gap scan needs a two-level detector");
  det.self_h = gap * det.split.P();
}

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string fnv1a_hex(const std::string& text) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(text)));
  return buf;
}

ScenarioDocument parse_scenario_text(const std::string& text, const std::string& source, const std::string& base_dir) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    int line = 1;
    for (std::size_t k = 0; k < std::min<std::size_t>(e.byte, text.size()); ++k) {
      if (text[k] == '\n') ++line;
    }
    throw ParseError(source, line, "", "malformed JSON");
  }
  Ctx ctx{source, base_dir};
  if (!j.is_object()) ctx.fail("", "expected a JSON object");
  ScenarioDocument doc;
  Scenario& sc = doc.scenario;
  sc.name = ctx.text(j, "name", "", "scenario");
  if (j.contains("dimension_cap")) set_dimension_cap(static_cast<std::size_t>(ctx.integer(j, "dimension_cap", "", 0)));
  sc.field = parse_field(ctx.req(j, "field", ""), ctx, "/field");
  const json& dets = ctx.req(j, "detectors", "");
  if (!dets.is_array() || dets.empty()) ctx.fail("/detectors", "expected a non-empty list");
  for (std::size_t k = 0; k < dets.size(); ++k) {
    sc.detectors.push_back(parse_detector(dets[k], ctx, "/detectors/" + std::to_string(k)));
  }
  sc.T = ctx.number(j, "T", "", std::nullopt);
  if (j.contains("grids")) {
    const json& g = j.at("grids");
    if (g.contains("time")) sc.time_rule = ctx.rule(g.at("time"), "/grids/time", sc.time_rule);
    if (g.contains("space")) sc.space_rule = ctx.rule(g.at("space"), "/grids/space", sc.space_rule);
    if (g.contains("window")) sc.window_rule = ctx.rule(g.at("window"), "/grids/window", sc.window_rule);
    if (g.contains("povm_time")) doc.povm_time_rule = ctx.rule(g.at("povm_time"), "/grids/povm_time", doc.povm_time_rule);
    if (g.contains("povm_smear")) {
      doc.povm_smear_rule = ctx.rule(g.at("povm_smear"), "/grids/povm_smear", doc.povm_smear_rule);
    }
  }
  for (auto& d : sc.detectors) {
    if (d.taus.empty()) d.taus = {0.5 * sc.T};
  }
  if (j.contains("tasks")) {
    const json& t = j.at("tasks");
    if (!t.is_array()) ctx.fail("/tasks", "expected a list of task names");
    for (const auto& name : t) {
      if (!name.is_string()) ctx.fail("/tasks", "expected strings");
      doc.tasks.push_back(name.get<std::string>());
    }
  }
  if (j.contains("scan")) {
    const json& s = j.at("scan");
    ScanSpec scan;
    scan.detector = static_cast<std::size_t>(ctx.integer(s, "detector", "/scan", 0));
    if (scan.detector >= sc.detectors.size()) ctx.fail("/scan/detector", "out of range");
    scan.gaps = ctx.range(ctx.req(s, "gaps", "/scan"), "/scan/gaps");
    scan.tau = ctx.number(s, "tau", "/scan", 0.5 * sc.T);
    if (sc.detectors[scan.detector].model.dim() != 2) ctx.fail("/scan/detector", "gap scan needs a two-level detector");
    doc.scan = scan;
  }
  doc.joint_density = j.contains("joint_density") && j.at("joint_density").is_boolean() && j.at("joint_density").get<bool>();
  doc.canonical = j.dump();
  return doc;
}

ScenarioDocument load_scenario_file(const std::string& path) {
  const std::string base = std::filesystem::path(path).parent_path().string();
  return parse_scenario_text(read_file(path), path, base);
}

}  // namespace qtp
