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

#include <cmath>

#include "qtp/detector.hpp"
#include "qtp/error.hpp"

using namespace qtp;

TEST_CASE("two-level detector is valid") {
  const DetectorModel det = two_level_detector(1.5);
  CHECK(det.dim() == 2);
  CHECK_NOTHROW(det.validate());
  CHECK(det.excited_projector()(1, 1) == Complex(1.0));
  const Matrix j = det.current_at("phi", {0.0, 0.0, 0.0});
  CHECK(j(0, 1) == Complex(1.0));
  CHECK(det.mu_labels.size() == 1);
}

TEST_CASE("invalid detectors are rejected") {
  DetectorModel excited = two_level_detector(1.0);
  excited.omega = Vector::Zero(2);
  excited.omega(1) = 1.0;
  CHECK_THROWS_AS(excited.validate(), ValidationError);

  DetectorModel mixing = two_level_detector(1.0);
  mixing.self_h(0, 1) = mixing.self_h(1, 0) = 0.2;
  CHECK_THROWS_AS(mixing.validate(), ValidationError);

  DetectorModel nonherm = two_level_detector(1.0);
  nonherm.currents["phi"][0](0, 1) = Complex(0.0, 1.0);
  CHECK_THROWS_AS(nonherm.validate(), ValidationError);
}

TEST_CASE("multilevel detector records") {
  const DetectorModel det = multilevel_detector({1.0, 2.0});
  CHECK(det.dim() == 3);
  CHECK(det.pointer_other.size() == 2);
  CHECK_NOTHROW(det.validate());
}

TEST_CASE("current interpolation over an extended body") {
  DetectorModel det = two_level_detector(1.0);
  det.tube = WorldTube::at_rest({0.0, 0.0, 0.0, 0.0}, BodySet::grid({1.0, 0.0, 0.0}, {3, 1, 1}));
  Matrix zero = Matrix::Zero(2, 2);
  Matrix x = Matrix::Zero(2, 2);
  x(0, 1) = x(1, 0) = 1.0;
  det.currents["phi"] = {zero, x, zero};
  CHECK(std::abs(det.current_at("phi", {-0.5, 0.0, 0.0})(0, 1) - 0.5) < 1e-14);
  CHECK(det.current_at("phi", {2.0, 0.0, 0.0}).norm() == 0.0);
}

TEST_CASE("nonsimultaneity ratios") {
  const WorldTube point = WorldTube::at_rest({0.0, 0.0, 0.0, 0.0}, BodySet::point());
  CHECK(nonsimultaneity_check(point, 1.0).pass);
  const WorldTube wide = WorldTube::at_rest({0.0, 0.0, 0.0, 0.0}, BodySet::grid({0.2, 0.0, 0.0}, {3, 1, 1}));
  const NonsimultaneityReport r = nonsimultaneity_check(wide, 1.0);
  CHECK(r.extent_ratio == doctest::Approx(0.4));
  CHECK_FALSE(r.pass);
  CHECK(nonsimultaneity_check(wide, 10.0).pass);
}

TEST_CASE("stationarity fit") {
  const DetectorModel det = two_level_detector(1.0);
  const StationarityReport r = stationarity_check(det, {0.0, 1.0, 2.0});
  CHECK(r.pass);
  CHECK(r.residual < 1e-12);
  // A superposition in K- with distinct energies is not stationary.
  DetectorModel mixed = multilevel_detector({1.0, 2.0});
  mixed.split = SubspaceSplit::coordinate(3, {2});
  mixed.omega = Vector::Zero(3);
  mixed.omega(0) = mixed.omega(1) = std::sqrt(0.5);
  const StationarityReport bad = stationarity_check(mixed, {0.0, 0.5, 1.0, 2.0});
  CHECK_FALSE(bad.pass);
}

TEST_CASE("pointer factorization") {
  const DetectorModel det = two_level_detector(1.0);
  const PointerReport r = pointer_factorization_check(det);
  CHECK(r.pass);
  CHECK(r.max_ratio < 1e-14);
}
