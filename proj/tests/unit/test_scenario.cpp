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

#include <string>

#include "qtp/error.hpp"
#include "qtp/scenario.hpp"

using namespace qtp;

namespace {

const std::string kMinimal = R"({
  "name": "toy",
  "field": {"builder": "free_scalar", "sites": 1, "n_max": 2, "mass": 1.0, "length": 1.0},
  "detectors": [{"model": "two_level", "gap": 1.0, "coupling": 0.01, "sigma": 1.0,
                 "taus": {"from": 1.0, "to": 3.0, "count": 3}}],
  "T": 4.0,
  "tasks": ["density"]
})";

}  // namespace

TEST_CASE("minimal scenario") {
  const ScenarioDocument doc = parse_scenario_text(kMinimal, "toy.json", ".");
  CHECK(doc.scenario.name == "toy");
  REQUIRE(doc.scenario.detectors.size() == 1);
  CHECK(doc.scenario.detectors[0].taus.size() == 3);
  CHECK(doc.scenario.detectors[0].taus[2] == doctest::Approx(3.0));
  CHECK(doc.tasks == std::vector<std::string>{"density"});
  CHECK(doc.scenario.T == 4.0);
  CHECK(!doc.canonical.empty());
}

TEST_CASE("canonical text and hash are stable") {
  const ScenarioDocument a = parse_scenario_text(kMinimal, "toy.json", ".");
  const ScenarioDocument b = parse_scenario_text(kMinimal, "toy.json", ".");
  CHECK(a.canonical == b.canonical);
  CHECK(fnv1a_hex(a.canonical) == fnv1a_hex(b.canonical));
  CHECK(fnv1a("") == 14695981039346656037ull);
  CHECK(fnv1a("a") == 0xaf63dc4c8601ec8cull);
}

TEST_CASE("errors carry a field path or line") {
  try {
    std::string text = kMinimal;
    text.replace(text.find("4.0"), 3, "\"x\"");
    parse_scenario_text(text, "bad.json", ".");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.field() == "/T");
  }
  try {
    parse_scenario_text("{\n\"name\": \"x\",\n\"T\": ,\n}", "broken.json", ".");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
  }
  try {
    parse_scenario_text(R"({"field": {"builder": "nope"}, "detectors": [], "T": 1})", "bad.json", ".");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.field().find("/field") == 0);
  }
}

TEST_CASE("custom field and detector with complex entries") {
  const std::string text = R"({
    "field": {"builder": "custom",
              "hamiltonian": [[0, 0], [0, 1]],
              "rho0": [[1, 0], [0, 0]],
              "composites": {"phi": [[[0, 1], [1, 0]]]}},
    "detectors": [{"model": "custom",
                   "self_h": [[0, 0], [0, "2 0"]],
                   "excited_levels": [1],
                   "currents": {"phi": [[[0, [1, 0]], [[1, 0], 0]]]},
                   "omega": [1, 0],
                   "records": [[[0, 0], [0, 1]]],
                   "coupling": 0.1, "sigma": 1.0, "taus": [1.0]}],
    "T": 2.0
  })";
  const ScenarioDocument doc = parse_scenario_text(text, "custom.json", ".");
  CHECK(doc.scenario.field.dim() == 2);
  CHECK(doc.scenario.detectors[0].model.self_h(1, 1) == Complex(2.0));
  CHECK_NOTHROW(doc.scenario.detectors[0].model.validate());
}

TEST_CASE("tube table") {
  const auto rows = parse_tube_table("# tau q E\n0 0 0 0  0 0 0 0\n1 0 0 0  1 0 0 0\n", "t.dat");
  CHECK(rows.size() == 2);
  CHECK(rows[1].e[0] == 1.0);
  CHECK_THROWS_AS(parse_tube_table("0 0 0\n", "t.dat"), ParseError);
}

TEST_CASE("gap setter") {
  DetectorModel det = two_level_detector(1.0);
  set_detector_gap(det, 2.5);
  CHECK(det.self_h(1, 1) == Complex(2.5));
  DetectorModel three = multilevel_detector({1.0, 2.0});
  CHECK_THROWS(set_detector_gap(three, 1.0));
}

TEST_CASE("bundled scenarios parse") {
  for (const char* name : {"udw-resonance.json", "weak-coupling.json", "two-detector.json", "moving-detector.json"}) {
    CAPTURE(name);
    CHECK_NOTHROW(load_scenario_file(std::string(QTP_SCENARIO_DIR) + "/" + name));
  }
}
