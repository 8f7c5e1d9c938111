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

#include <string>
#include <vector>

#include "qtp/detector.hpp"
#include "qtp/error.hpp"
#include "qtp/field.hpp"
#include "qtp/histories.hpp"
#include "qtp/smearing.hpp"

namespace qtp {

/// One apparatus of a scenario with its coupling, smearing and outcome grid.
struct DetectorSetup {
  DetectorModel model;
  double coupling = 0.0;
  double sigma = 1.0;
  std::vector<double> taus;
  std::vector<Point3> Q{{0.0, 0.0, 0.0}};
  std::vector<double> Q_weights{1.0};
  /// Record indices to report; empty means all.
  std::vector<int> mus;

  std::vector<int> record_indices() const;
};

struct Scenario {
  std::string name = "scenario";
  FieldModel field;
  std::vector<DetectorSetup> detectors;
  /// Detection window [0, T] used by no-detection integrals.
  double T = 1.0;
  /// Rule for the s axis of each kernel (window +-12 sigma).
  QuadratureRule time_rule{Scheme::gauss_legendre, 32, 8};
  /// Rule per active body axis for the r integral.
  QuadratureRule space_rule{Scheme::gauss_legendre, 8, 1};
  /// Rule for tau integrals over the detection window.
  QuadratureRule window_rule{Scheme::gauss_legendre, 32, 4};
};

/// Outcome of the validity gate for one detector.
struct DetectorCheck {
  NonsimultaneityReport nonsimultaneity;
  StationarityReport stationarity;
  PointerReport pointer;
  /// True when the non-stationary (general) kernel is used.
  bool general_kernel = false;
};

/// Checks every structural and physical precondition of assembly. Throws
/// ValidationError naming the violated condition.
std::vector<DetectorCheck> validate_scenario(const Scenario& scenario, Warnings& warnings);

/// Field (x) detectors with the interaction sampled on the static
/// embedding at tau = 0: H_I = sum_i g_i sum_A sum_b w_b Y_A(x_b) (x) J_i^A(q_b).
struct Composite {
  std::vector<Index> dims;
  Matrix h0;
  Matrix hi;
  std::vector<Matrix> interaction_terms;
  Matrix rho0;
  EventSpec events;
  std::vector<SubspaceSplit> splits;

  /// Single-detector perturbative class family for record `mu`.
  ClassFamily perturbative_family(std::size_t detector, int mu) const;
};

Composite build_composite(const Scenario& scenario);

struct KernelSample {
  std::size_t a = 0;  // forward current index
  std::size_t b = 0;  // backward current index
  Complex weight;     // quadrature weight * g_sigma(s) * w_delta(r) * M^{BA}
  FourVector forward{};
  FourVector backward{};
};

struct KernelGrid {
  std::size_t detector = 0;
  double tau = 0.0;
  Point3 Q{};
  int mu = 0;
  std::vector<KernelSample> samples;
};

/// Precomputed per-detector kernel data: partner state, record roots,
/// s and r nodes.
class KernelBuilder {
 public:
  KernelBuilder(const DetectorSetup& setup, const DetectorCheck& check, const Scenario& scenario,
                std::size_t detector_index);

  const std::vector<std::string>& indices() const { return indices_; }
  KernelGrid grid(double tau, const Point3& Q, int mu) const;
  /// Matrix element M^{BA}(s) (stationary form) or the tau-dependent
  /// general form, at body points q_forward and q_backward.
  Complex matrix_element(std::size_t b, std::size_t a, double s, double tau, const Point3& q_forward,
                         const Point3& q_backward, int mu) const;

 private:
  const DetectorSetup* setup_;
  std::size_t detector_ = 0;
  bool general_ = false;
  std::vector<std::string> indices_;
  Evolution evo_;
  Vector omega_eig_;   // initial or partner state in the eigenbasis of h
  std::vector<Matrix> roots_eig_;
  Nodes s_nodes_;
  std::vector<Nodes> r_nodes_;  // per axis; single node at 0 when inactive
  double delta_ = 1.0;
};

/// Convenience wrapper over KernelBuilder for one outcome.
KernelGrid detector_kernel(const Scenario& scenario, std::size_t detector, double tau, const Point3& Q, int mu);

struct EventOutcome {
  double tau = 0.0;
  Point3 Q{};
  int mu = 0;
};

/// Assembles densities for the listed detectors (one event each). Holds a
/// pointer to the scenario, which must outlive it.
class Assembler {
 public:
  explicit Assembler(const Scenario& scenario);

  const std::vector<DetectorCheck>& checks() const { return checks_; }
  const Warnings& warnings() const { return warnings_; }
  const CorrelatorEngine& engine() const { return engine_; }

  /// Density for one event per listed detector.
  double probability(const std::vector<std::size_t>& detectors, const std::vector<EventOutcome>& outcomes,
                     Warnings* warnings = nullptr) const;
  /// Density for one event on every detector, in scenario order.
  double probability(const std::vector<EventOutcome>& outcomes, Warnings* warnings = nullptr) const;

  /// Single-detector densities on its (tau, Q, mu) grid, computed in parallel.
  /// Layout: [tau][Q][mu].
  std::vector<double> density_grid(std::size_t detector, Warnings* warnings = nullptr) const;

  /// Probability that no listed detector fires in [0, T], by inclusion and
  /// exclusion over detector subsets up to `max_order` events.
  double no_detection(std::size_t max_order = 1, Warnings* warnings = nullptr) const;

 private:
  const Scenario* scenario_;
  Warnings warnings_;
  std::vector<DetectorCheck> checks_;
  CorrelatorEngine engine_;
  std::vector<KernelBuilder> builders_;

  double subset_total(const std::vector<std::size_t>& subset, Warnings* warnings) const;
};

inline constexpr double kResidueTolerance = 1e-6;

double assemble_probability(const Scenario& scenario, const std::vector<EventOutcome>& outcomes,
                            Warnings* warnings = nullptr);
double assemble_no_detection(const Scenario& scenario, Warnings* warnings = nullptr);

/// Worker count from QTP_WORKERS, else hardware concurrency.
unsigned worker_count();

/// Returns the tube moved by (Lambda, a); the embedding transforms as
/// E' = Lambda E + a.
WorldTube boost_embedding(const WorldTube& tube, const Lorentz& lambda, const FourVector& shift);

}  // namespace qtp
