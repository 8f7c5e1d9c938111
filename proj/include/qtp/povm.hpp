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

#include <vector>

#include "qtp/error.hpp"
#include "qtp/histories.hpp"
#include "qtp/opalg.hpp"
#include "qtp/smearing.hpp"

namespace qtp {

/// Throws DomainError unless rho is hermitian, positive and of unit trace.
void require_state(const Matrix& rho, const char* what);

/// Real part of a trace after checking |Im z| <= tol * max(1, |z|).
double real_part_checked(Complex z, const char* what, double tol = 1e-10);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// Integral of the class operator over an interval.
Matrix integrated_class(const ClassFamily& c, Interval interval, const QuadratureRule& rule);

/// Probability that the event occurred inside the interval.
double interval_probability(const ClassFamily& c, const Matrix& rho0, Interval interval,
                            const QuadratureRule& rule);

struct ConsistencyReport {
  Complex offdiagonal;      // Tr(B_1 rho B_2^dagger)
  double p_first = 0.0;
  double p_second = 0.0;
  double p_union = 0.0;
  double additivity_defect = 0.0;  // p_union - p_first - p_second
  double residual = 0.0;           // |defect - 2 Re offdiagonal|
};

ConsistencyReport consistency_offdiagonal(const ClassFamily& c, const Matrix& rho0, Interval first,
                                          Interval second, const QuadratureRule& rule);

enum class PovmKind { detection, no_detection, partial_no_detection };

struct PovmElement {
  Matrix op;
  PovmKind kind = PovmKind::detection;
  double min_eigenvalue = 0.0;
  double max_eigenvalue = 0.0;
  /// min eigenvalue >= -1e-8 * max(|max eigenvalue|, |min eigenvalue|).
  bool positive = true;
};

PovmElement make_element(Matrix op, PovmKind kind);

/// B(t) = integral of sqrt(f_sigma(s - t)) C(s) ds over a six-deviation window.
Matrix smeared_amplitude(const ClassFamily& c, double t, double sigma, const QuadratureRule& rule);

/// Pi(t) = B(t)^dagger B(t).
PovmElement povm_density(const ClassFamily& c, double t, double sigma, const QuadratureRule& rule);

/// Tr(rho Pi(t)), the smeared density.
double smeared_probability(const ClassFamily& c, const Matrix& rho0, double t, double sigma,
                           const QuadratureRule& rule);

/// Integral of g_sigma(tau) Tr[C(t + tau/2) rho C^dagger(t - tau/2)] d tau.
double prob_density(const ClassFamily& c, const Matrix& rho0, double t, double sigma,
                    const QuadratureRule& rule, Warnings* warnings = nullptr);

/// Same bilinear form with the Gaussian weight replaced by 1 over
/// tau in [-window, window]. Warns when the integrand has not decayed.
double prob_density_large_sigma(const ClassFamily& c, const Matrix& rho0, double t, double window,
                                const QuadratureRule& rule, Warnings* warnings = nullptr);

/// 1 - sum_lambda int_0^T Pi(lambda, t) dt on the rule's nodes.
PovmElement no_detection_operator(const std::vector<ClassFamily>& family, double T, double sigma,
                                  const QuadratureRule& time_rule, const QuadratureRule& smear_rule);

inline constexpr int kDefaultPovmTimeNodes = 256;

/// n-fold tau quadrature of the time-ordered bilinear form. An empty
/// `sigmas` entry of 0 selects the unweighted (large-sigma) variant for
/// that event, integrated over [-window, window].
double prob_density_n(const MultiClassFamily& d, const Matrix& rho0, const std::vector<int>& outcomes,
                      const std::vector<double>& times, const std::vector<double>& sigmas,
                      const QuadratureRule& rule, double window = 0.0, Warnings* warnings = nullptr);

struct FamilyMember {
  std::vector<bool> occurred;   // per event
  std::vector<int> outcomes;    // per occurred event, in event order
  std::vector<double> times;    // per occurred event
  double weight = 1.0;          // product of time-grid weights
  PovmElement element;
};

struct PovmFamily {
  std::vector<FamilyMember> members;
  double completeness_residual = 0.0;  // max|sum_k w_k E_k - 1|
  double min_detection_eigenvalue = 0.0;
  double terminal_min_eigenvalue = 0.0;
  bool all_detection_positive = true;
};

/// Complete n-event family on [0, T]. Detection elements are smeared
/// products B^dagger B; elements with missing events follow from
/// inclusion-exclusion so that the whole family sums to the identity.
PovmFamily povm_n_family(const PerturbativeHistories& histories, const std::vector<double>& sigmas,
                         double T, const QuadratureRule& time_rule, const QuadratureRule& smear_rule);

/// -i e^{-iHT} int_0^T e^{iHt} P H S_t dt: amplitude operator of "an event
/// happened in [0, T]".
Matrix detection_history(const Matrix& h, const SubspaceSplit& split, double T, const QuadratureRule& rule);

struct ZenoReport {
  double detected = 0.0;      // Tr(C+ rho C+^dagger)
  double undetected = 0.0;    // Tr(S_T rho S_T^dagger)
  double interference = 0.0;  // 2 Re Tr(C+ rho S_T^dagger)
  double sum = 0.0;
  double target = 0.0;        // Tr(Q rho)
  bool normalized = false;    // |sum - target| <= 1e-10
  bool detected_at_most_one = false;
  // For rho supported on H-, unitarity of S_T forces detected = -interference.
  bool balance_checked = false;
  double balance_lhs = 0.0;    // Tr(C+ rho C+^dagger)
  double balance_rhs = 0.0;    // -2 Re Tr(C+ rho S_T^dagger)
  bool balance_holds = false;
};

ZenoReport zeno_diagnostic(const Matrix& c_plus, const Matrix& s_t, const Matrix& rho0,
                           const SubspaceSplit& split, bool check_balance);

}  // namespace qtp
