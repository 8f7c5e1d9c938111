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

#include "qtp/assembly.hpp"

namespace qtp {

/// Detector gap scan: the density at `tau` for each gap value.
struct ScanSpec {
  std::size_t detector = 0;
  std::vector<double> gaps;
  double tau = 0.0;
};

/// A parsed scenario file with its task list and the canonical text used
/// for provenance hashing.
struct ScenarioDocument {
  Scenario scenario;
  std::vector<std::string> tasks;
  std::optional<ScanSpec> scan;
  bool joint_density = false;
  QuadratureRule povm_time_rule{Scheme::gauss_legendre, 16, 4};
  QuadratureRule povm_smear_rule{Scheme::gauss_legendre, 16, 4};
  std::string canonical;
};

ScenarioDocument parse_scenario_text(const std::string& text, const std::string& source,
                                     const std::string& base_dir);
ScenarioDocument load_scenario_file(const std::string& path);

/// Rows "tau q1 q2 q3 E0 E1 E2 E3", whitespace separated, '#' comments.
std::vector<TubeSample> parse_tube_table(const std::string& text, const std::string& source);

/// Sets the excitation gap of a two-level detector.
void set_detector_gap(DetectorModel& det, double gap);

std::uint64_t fnv1a(const std::string& text);
std::string fnv1a_hex(const std::string& text);

}  // namespace qtp
