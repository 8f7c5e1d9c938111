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

#include <map>
#include <string>
#include <vector>

#include "qtp/geometry.hpp"
#include "qtp/opalg.hpp"

namespace qtp {

/// Pointer-position POVM F1(Q) sampled on a grid of Q values with weights
/// realizing the d^3Q measure.
struct PointerPosition {
  std::vector<Point3> Q;
  std::vector<double> weights;
  std::vector<Matrix> F;
};

/// One apparatus: Hilbert space K = K- (+) K+, self-Hamiltonian, currents
/// at body points, initial state, pointer POVMs and world-tube.
struct DetectorModel {
  SubspaceSplit split;
  Matrix self_h;
  /// Current J^A at each body point, in the order of tube.body().points.
  std::map<std::string, std::vector<Matrix>> currents;
  Vector omega;
  /// Stationary partner state; empty means "fit from the model".
  Vector omega_prime;
  PointerPosition pointer_position;
  std::vector<Matrix> pointer_other;
  std::vector<std::string> mu_labels;
  WorldTube tube = WorldTube::at_rest({0.0, 0.0, 0.0, 0.0}, BodySet::point());
  double delta = 1.0;

  Index dim() const { return split.dim(); }
  const Matrix& excited_projector() const { return split.P(); }

  /// J^A(q) by multilinear interpolation over the body grid; zero outside S.
  Matrix current_at(const std::string& index, const Point3& q) const;

  /// Throws ValidationError on any structural invariant violation.
  void validate() const;
};

/// Two-level apparatus: h = gap |1><1|, J = sigma_x, omega = |0>, one record.
DetectorModel two_level_detector(double gap, const std::string& current_index = "phi");

/// Ground state plus excited levels at the given gaps. Each excited level
/// is its own record mu.
DetectorModel multilevel_detector(const std::vector<double>& gaps, const std::string& current_index = "phi");

struct NonsimultaneityReport {
  double extent_ratio = 0.0;   // L / sigma
  double metric_ratio = 0.0;   // ||h|| L^2 / (|eta(u,u)| sigma^2), worst sampled tau
  double worst_tau = 0.0;
  bool pass = true;
};

inline constexpr double kNonsimultaneityThreshold = 0.1;
inline constexpr double kPointerThreshold = 0.01;
inline constexpr double kStationarityThreshold = 1e-8;

NonsimultaneityReport nonsimultaneity_check(const WorldTube& tube, double sigma, int samples = 33);

struct StationarityReport {
  Vector omega_prime;
  double residual = 0.0;
  bool pass = true;
};

/// Least-squares fit of a single partner state with J^A(q) e^{-ih tau} omega
/// = J^A(q) omega' at every sampled tau and body point; reports the worst
/// residual.
StationarityReport stationarity_check(const DetectorModel& det, const std::vector<double>& taus);

struct PointerReport {
  double max_ratio = 0.0;
  bool pass = true;
};

/// Max over (Q, mu) of Tr|[F1(Q), F2(mu)]| / (Tr|F1(Q)| Tr|F2(mu)|).
PointerReport pointer_factorization_check(const DetectorModel& det);

}  // namespace qtp
