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

#include <atomic>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "qtp/error.hpp"
#include "qtp/geometry.hpp"
#include "qtp/opalg.hpp"

namespace qtp {

/// Nearest lattice site for a spatial point and the distance to it.
struct SiteSnap {
  std::size_t site = 0;
  double distance = 0.0;
};

/// Finite-dimensional field: Hamiltonian, composite operators at lattice
/// sites along x, initial state and optional translation generator.
struct FieldModel {
  Matrix h_phi;
  /// Composite Y_A at each site, in the order of `sites`.
  std::map<std::string, std::vector<Matrix>> composites;
  std::vector<double> sites{0.0};
  /// Period of the lattice along x; zero for an open lattice.
  double length = 0.0;
  Matrix rho0;
  /// Momentum along x; empty when the model has none.
  Matrix momentum;
  /// Declared symmetry data, stored only.
  std::map<std::string, Matrix> covariance_data;

  Index dim() const { return h_phi.rows(); }
  double spacing() const;
  /// Snaps the x coordinate; y and z are ignored (one-dimensional lattice).
  SiteSnap snap(const Point3& x) const;
  const Matrix& composite(const std::string& index, std::size_t site) const;
  void validate() const;
};

struct CtpPoint {
  FourVector X{};
  std::string A;
};

/// Heisenberg composites and closed-time-path correlators of one field
/// model, evaluated in the Hamiltonian eigenbasis.
class CorrelatorEngine {
 public:
  explicit CorrelatorEngine(FieldModel model);

  const FieldModel& model() const { return model_; }
  /// e^{iHt} Y_A(x) e^{-iHt} in the original basis.
  Matrix heisenberg_composite(const std::string& index, const FourVector& X) const;
  /// Same operator in the eigenbasis of H.
  Matrix heisenberg_eigenbasis(const std::string& index, const FourVector& X) const;

  /// Tr[T(Y_A...) rho T-bar(Y_B...)]: forward factors latest-leftmost,
  /// backward factors earliest-leftmost, ties averaged.
  Complex ctp_correlator(const std::vector<CtpPoint>& forward, const std::vector<CtpPoint>& backward) const;
  /// Same contraction for operators already in the eigenbasis.
  Complex ctp_eigen(const std::vector<Matrix>& forward, const std::vector<double>& forward_times,
                    const std::vector<Matrix>& backward, const std::vector<double>& backward_times) const;

  /// Largest snap distance seen so far.
  double max_snap_distance() const;
  bool rho_diagonal() const { return rho_diagonal_; }
  /// Max |[rho, H]| and |[rho, P]| (the latter -1 without a momentum).
  double rho_time_defect() const { return time_defect_; }
  double rho_space_defect() const { return space_defect_; }

 private:
  FieldModel model_;
  Evolution evo_;
  Matrix rho_eig_;
  Vector populations_;
  bool rho_diagonal_ = false;
  double time_defect_ = 0.0;
  double space_defect_ = -1.0;
  std::map<std::string, std::vector<Matrix>> eig_composites_;
  std::shared_ptr<std::atomic<double>> max_snap_ = std::make_shared<std::atomic<double>>(0.0);

  const Matrix& eig_composite(const std::string& index, const Point3& x) const;
};

struct FockOptions {
  /// Occupation per mode for a Fock initial state; empty means vacuum.
  std::vector<int> occupations;
};

/// Periodic one-dimensional scalar lattice with `sites` modes truncated at
/// `n_max` quanta each. Composites "phi" and "pi".
FieldModel free_scalar_builder(int sites, int n_max, double mass, double length, const FockOptions& options = {});

/// Mode wave numbers used by free_scalar_builder, in slot order.
std::vector<double> free_scalar_wavenumbers(int sites, double length);

/// Decoupled sectors: H = Ha (x) 1 + 1 (x) Hb, rho = rho_a (x) rho_b.
/// Composite names are suffixed to keep the index sets disjoint.
FieldModel product_field(const FieldModel& a, const std::string& suffix_a, const FieldModel& b,
                         const std::string& suffix_b);

struct TranslationReport {
  bool applicable = true;
  std::string reason;
  double deviation = 0.0;
  bool pass = true;
};

/// Compares correlators at shifted and unshifted points. Time shifts need
/// [rho, H] = 0; spatial shifts need a momentum, [rho, P] = 0 and a shift
/// that is a multiple of the spacing.
TranslationReport translation_covariance_check(const CorrelatorEngine& engine, const FourVector& shift,
                                               const std::vector<CtpPoint>& forward,
                                               const std::vector<CtpPoint>& backward, double tol = 1e-8);

/// Plain-text field description. Keywords: dim, length, sites, hamiltonian,
/// composite <A> <x>, rho0, momentum; matrices follow as dim rows of
/// "re im" pairs. '#' starts a comment.
FieldModel parse_field_text(const std::string& text, const std::string& source);
FieldModel load_field_file(const std::string& path);

}  // namespace qtp
