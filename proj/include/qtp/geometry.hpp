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

#include <array>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qtp/dynamics.hpp"

namespace qtp {

/// Minkowski coordinates (t, x, y, z), signature (-+++).
using FourVector = std::array<double, 4>;
using Point3 = std::array<double, 3>;
using Lorentz = Eigen::Matrix4d;

double minkowski_dot(const FourVector& a, const FourVector& b);

/// Proper orthochronous check: L^T eta L = eta to `tol` and L^0_0 >= 1.
bool is_proper_orthochronous(const Lorentz& lambda, double tol = 1e-10);

/// Pure boost taking the rest frame to velocity v (|v| < 1).
Lorentz boost_matrix(const Point3& velocity);

/// Finite sample of the body set S in its rest frame, with quadrature weights.
struct BodySet {
  std::vector<Point3> points;
  std::vector<double> weights;

  /// Single point at the origin with unit weight.
  static BodySet point();
  /// Regular grid with `counts[a]` points (<= 5) across [-half[a], half[a]]
  /// and trapezoid weights; an axis with count 1 is collapsed.
  static BodySet grid(const Point3& half_widths, const std::array<int, 3>& counts);

  /// Largest distance between two points of the set.
  double extent() const;
  bool pointlike() const { return points.size() <= 1; }
  /// Axes along which the body has extent.
  std::array<bool, 3> active_axes() const;
};

/// Row of a tabulated embedding: (tau, q, E).
struct TubeSample {
  double tau = 0.0;
  Point3 q{};
  FourVector e{};
};

class WorldTube {
 public:
  enum class Kind { inertial, tabulated };

  /// E(tau, q) = origin + u tau + E_i q^i with (u, E_i) the boost to `velocity`.
  static WorldTube inertial(const FourVector& origin, const Point3& velocity, BodySet body);
  /// Static tube at `origin`.
  static WorldTube at_rest(const FourVector& origin, BodySet body);
  /// Smooth embedding sampled on a regular (tau, q) grid.
  static WorldTube tabulated(std::vector<TubeSample> rows, BodySet body);
  /// Uniformly accelerated tube (acceleration along x) tabulated on
  /// [tau_min, tau_max] with `samples` proper-time rows per body point.
  static WorldTube uniform_acceleration(double acceleration, double tau_min, double tau_max,
                                        int samples, BodySet body);

  Kind kind() const { return kind_; }
  const BodySet& body() const { return body_; }
  double extent() const { return body_.extent(); }
  double tau_min() const { return tau_min_; }
  double tau_max() const { return tau_max_; }

  FourVector eval(double tau, const Point3& q) const;
  /// dE/dtau at (tau, q).
  FourVector velocity(double tau, const Point3& q = {0.0, 0.0, 0.0}) const;
  /// dE/dq^i at (tau, q = 0).
  std::array<FourVector, 3> triad(double tau) const;
  /// h_ij = E_i . E_j.
  Eigen::Matrix3d spatial_metric(double tau) const;

  /// Proper time at which the center reaches coordinate time t (bisection).
  double proper_time_at(double t) const;
  /// Sampled t -> tau table for the center worldline over [t_lo, t_hi].
  ProperTimeMap proper_time_map(double t_lo, double t_hi, int samples = 2049) const;

  /// Tube with E' = Lambda E + a.
  WorldTube boosted(const Lorentz& lambda, const FourVector& shift) const;

  /// Max |eta(u, u) + 1| over sampled tau at q = 0.
  double normalization_defect(int samples = 33) const;

 private:
  Kind kind_ = Kind::inertial;
  BodySet body_;
  double tau_min_ = -1e300;
  double tau_max_ = 1e300;
  // inertial
  FourVector origin_{};
  FourVector u_{1.0, 0.0, 0.0, 0.0};
  std::array<FourVector, 3> frame_{};
  // tabulated: per axis the distinct q values; samples[qindex][tau index]
  std::array<std::vector<double>, 3> axes_;
  std::vector<double> taus_;
  std::vector<std::vector<FourVector>> table_;
  std::vector<std::vector<FourVector>> rates_;

  FourVector eval_column(std::size_t column, double tau) const;
  FourVector rate_column(std::size_t column, double tau) const;
  std::size_t column_index(const std::array<std::size_t, 3>& idx) const;
};

}  // namespace qtp
