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
#include <cmath>
#include <complex>
#include <functional>
#include <optional>
#include <string>
#include <type_traits>
#include <vector>

#include "qtp/error.hpp"

namespace qtp {

/// Normalized Gaussian (2 pi sigma^2)^{-1/2} exp(-s^2 / 2 sigma^2).
double f_sigma(double s, double sigma);
/// sqrt(f_sigma(s)); the amplitude-level smearing kernel.
double sqrt_f_sigma(double s, double sigma);
/// exp(-s^2 / 8 sigma^2).
double g_sigma(double s, double sigma);
/// exp(-|r|^2 / 8 delta^2).
double w_delta(const std::array<double, 3>& r, double delta);

// Integration windows, in units of sigma (or delta). Each is six standard
// deviations of the kernel that is actually integrated.
inline constexpr double kWindowF = 6.0;
inline constexpr double kWindowSqrtF = 6.0 * 1.4142135623730951;
inline constexpr double kWindowG = 12.0;
inline constexpr double kWindowW = 12.0;

enum class Scheme { trapezoid, gauss_legendre };

Scheme parse_scheme(const std::string& name);
std::string scheme_name(Scheme scheme);

/// Composite rule: `panels` equal sub-intervals with `nodes` points each.
struct QuadratureRule {
  Scheme scheme = Scheme::gauss_legendre;
  int nodes = 64;
  int panels = 1;
};

struct Nodes {
  std::vector<double> x;
  std::vector<double> w;
  std::size_t size() const { return x.size(); }
};

/// Gauss-Legendre nodes and weights on [-1, 1], ascending.
Nodes gauss_legendre(int n);

/// Rule realized on [a, b]. Deterministic ordering, symmetric about the
/// midpoint for both schemes.
Nodes make_nodes(const QuadratureRule& rule, double a, double b);

/// Throws DomainError on a non-finite sample.
void require_finite(double value, const char* what);
void require_finite(std::complex<double> value, const char* what);

/// One-dimensional quadrature with a fixed left-to-right summation order.
template <class F>
auto integrate(F&& f, const QuadratureRule& rule, double a, double b) {
  using R = std::decay_t<decltype(f(a))>;
  const Nodes nodes = make_nodes(rule, a, b);
  R total = nodes.w[0] * f(nodes.x[0]);
  for (std::size_t k = 1; k < nodes.size(); ++k) {
    R v = f(nodes.x[k]);
    if constexpr (std::is_arithmetic_v<R> || std::is_same_v<R, std::complex<double>>) {
      require_finite(v, "quadrature");
    }
    total += nodes.w[k] * v;
  }
  if constexpr (std::is_arithmetic_v<R> || std::is_same_v<R, std::complex<double>>) {
    require_finite(total, "quadrature");
  }
  return total;
}

/// Tensor-product quadrature over a box, one rule per axis. The integrand
/// receives the point as a vector; summation is lexicographic.
template <class F>
auto integrate_box(F&& f, const std::vector<QuadratureRule>& rules,
                   const std::vector<double>& lo, const std::vector<double>& hi) {
  const std::size_t dim = rules.size();
  if (lo.size() != dim || hi.size() != dim) throw DomainError("integrate_box: axis count mismatch");
  std::vector<Nodes> axes;
  axes.reserve(dim);
  for (std::size_t d = 0; d < dim; ++d) axes.push_back(make_nodes(rules[d], lo[d], hi[d]));
  std::vector<double> point(dim);
  using R = std::decay_t<decltype(f(point))>;
  if (dim == 0) return R(f(point));
  std::optional<R> total;
  std::vector<std::size_t> idx(dim, 0);
  while (true) {
    double w = 1.0;
    for (std::size_t d = 0; d < dim; ++d) {
      point[d] = axes[d].x[idx[d]];
      w *= axes[d].w[idx[d]];
    }
    R v = f(point);
    if constexpr (std::is_arithmetic_v<R> || std::is_same_v<R, std::complex<double>>) {
      require_finite(v, "quadrature");
    }
    if (total) {
      *total += w * v;
    } else {
      total = R(w * v);
    }
    std::size_t d = dim;
    while (d > 0) {
      --d;
      if (++idx[d] < axes[d].size()) break;
      idx[d] = 0;
      if (d == 0) return *total;
    }
  }
}

struct SmearingConfig {
  double sigma = 1.0;
  double T = 10.0;
  double delta = 1.0;
  QuadratureRule time_rule{Scheme::gauss_legendre, 64, 1};
  QuadratureRule space_rule{Scheme::gauss_legendre, 16, 1};

  /// Throws DomainError on non-positive scales; records the sigma/T advisory.
  void validate(Warnings& warnings) const;
};

}  // namespace qtp
