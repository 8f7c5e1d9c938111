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

#include <optional>
#include <vector>

#include "qtp/opalg.hpp"

namespace qtp {

/// Spectral cache of a hermitian generator. Every e^{-iHt} built from the
/// same generator reuses one eigendecomposition.
class Evolution {
 public:
  Evolution() = default;
  explicit Evolution(const Matrix& h);

  Index dim() const { return vectors_.rows(); }
  const RealVector& energies() const { return energies_; }
  const Matrix& vectors() const { return vectors_; }

  /// e^{-iHt}
  Matrix propagator(double t) const;
  /// e^{iHt} A e^{-iHt}
  Matrix heisenberg(const Matrix& a, double t) const;

  Matrix to_eigenbasis(const Matrix& a) const { return vectors_.adjoint() * a * vectors_; }
  Matrix from_eigenbasis(const Matrix& a) const { return vectors_ * a * vectors_.adjoint(); }
  /// Heisenberg evolution of an operator already expressed in the eigenbasis.
  Matrix heisenberg_eigenbasis(const Matrix& a_eig, double t) const;

 private:
  RealVector energies_;
  Matrix vectors_;
};

struct PropagatorRequest {
  Matrix hamiltonian;
  SubspaceSplit split;
  double t = 0.0;
  std::optional<int> trotter_steps;
};

/// exp(-i QHQ t) Q, the evolution confined to H-.
Matrix restricted_propagator(const Matrix& h, const SubspaceSplit& split, double t);

/// (Q e^{-iHt/N} Q)^N. Converges to restricted_propagator as O(1/N).
Matrix restricted_propagator_trotter(const Matrix& h, const SubspaceSplit& split, double t,
                                     int steps);

/// Dispatches on the presence of trotter_steps.
Matrix restricted_propagator(const PropagatorRequest& req);

/// Restricted propagator for many times from one eigendecomposition of QHQ.
class RestrictedEvolution {
 public:
  RestrictedEvolution(const Matrix& h, const Matrix& q);
  Matrix at(double t) const { return evolution_.propagator(t) * q_; }

 private:
  Evolution evolution_;
  Matrix q_;
};

/// Monotone map from coordinate time t to a detector's proper time, stored
/// as a sampled table with linear interpolation.
class ProperTimeMap {
 public:
  /// tau(t) = t.
  ProperTimeMap() = default;
  ProperTimeMap(std::vector<double> times, std::vector<double> proper_times);

  bool is_identity() const { return times_.empty(); }
  double tau(double t) const;
  /// Inverse map, by bisection on the table.
  double time(double tau) const;

 private:
  std::vector<double> times_;
  std::vector<double> proper_times_;
};

struct DetectorClock {
  Matrix self_h;
  ProperTimeMap clock;
};

/// e^{-iH_phi t} (x) e^{-ih_1 tau_1(t)} (x) ... (x) e^{-ih_n tau_n(t)}
Matrix free_evolution(const Matrix& field_h, const std::vector<DetectorClock>& detectors, double t);

}  // namespace qtp
