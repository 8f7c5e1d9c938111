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

#include "qtp/smearing.hpp"

#include <cmath>
#include <complex>
#include <map>
#include <mutex>
#include <numbers>
#include <sstream>

namespace qtp {

double f_sigma(double s, double sigma) {
  return std::exp(-s * s / (2.0 * sigma * sigma)) / std::sqrt(2.0 * std::numbers::pi * sigma * sigma);
}

double sqrt_f_sigma(double s, double sigma) {
  return std::exp(-s * s / (4.0 * sigma * sigma)) / std::sqrt(std::sqrt(2.0 * std::numbers::pi) * sigma);
}

double g_sigma(double s, double sigma) { return std::exp(-s * s / (8.0 * sigma * sigma)); }

double w_delta(const std::array<double, 3>& r, double delta) {
  const double r2 = r[0] * r[0] + r[1] * r[1] + r[2] * r[2];
  return std::exp(-r2 / (8.0 * delta * delta));
}

Scheme parse_scheme(const std::string& name) {
  if (name == "trapezoid") return Scheme::trapezoid;
  if (name == "gauss-legendre" || name == "gauss_legendre" || name == "gl") return Scheme::gauss_legendre;
  throw DomainError("unknown quadrature scheme '" + name + "'");
}

std::string scheme_name(Scheme scheme) {
  return scheme == Scheme::trapezoid ? "trapezoid" : "gauss-legendre";
}

namespace {

Nodes compute_gauss_legendre(int n) {
  Nodes out;
  out.x.assign(static_cast<std::size_t>(n), 0.0);
  out.w.assign(static_cast<std::size_t>(n), 0.0);
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    // Tricomi initial guess, then Newton on the three-term recurrence.
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      const double pn = n == 1 ? x : p1;
      const double pn1 = n == 1 ? 1.0 : p0;
      dp = n * (x * pn - pn1) / (x * x - 1.0);
      const double dx = pn / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n == 1 ? 1.0 : n * (x * p1 - p0) / (x * x - 1.0);
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    const auto lo = static_cast<std::size_t>(i);
    const auto hi = static_cast<std::size_t>(n - 1 - i);
    out.x[lo] = -x;
    out.x[hi] = x;
    out.w[lo] = w;
    out.w[hi] = w;
  }
  if (n % 2 == 1) out.x[static_cast<std::size_t>(n / 2)] = 0.0;
  return out;
}

}  // namespace

Nodes gauss_legendre(int n) {
  if (n < 1) throw DomainError("gauss_legendre: node count must be positive");
  static std::mutex mutex;
  static std::map<int, Nodes> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, compute_gauss_legendre(n)).first;
  return it->second;
}

Nodes make_nodes(const QuadratureRule& rule, double a, double b) {
  if (rule.nodes < 1 || rule.panels < 1) throw DomainError("quadrature rule needs positive nodes and panels");
  if (!std::isfinite(a) || !std::isfinite(b)) throw DomainError("quadrature: non-finite bounds");
  Nodes out;
  const double width = (b - a) / rule.panels;
  if (rule.scheme == Scheme::trapezoid) {
    const int n = std::max(rule.nodes, 2);
    const int total = rule.panels * (n - 1) + 1;
    const double h = (b - a) / (total - 1);
    for (int k = 0; k < total; ++k) {
      out.x.push_back(a + k * h);
      out.w.push_back((k == 0 || k == total - 1) ? 0.5 * h : h);
    }
    return out;
  }
  const Nodes ref = gauss_legendre(rule.nodes);
  for (int p = 0; p < rule.panels; ++p) {
    const double lo = a + p * width;
    const double mid = lo + 0.5 * width;
    for (std::size_t k = 0; k < ref.size(); ++k) {
      out.x.push_back(mid + 0.5 * width * ref.x[k]);
      out.w.push_back(0.5 * width * ref.w[k]);
    }
  }
  return out;
}

void require_finite(double value, const char* what) {
  if (!std::isfinite(value)) throw DomainError(std::string(what) + ": non-finite sample");
}

void require_finite(std::complex<double> value, const char* what) {
  if (!std::isfinite(value.real()) || !std::isfinite(value.imag())) {
    throw DomainError(std::string(what) + ": non-finite sample");
  }
}

void SmearingConfig::validate(Warnings& warnings) const {
  if (!(sigma > 0.0) || !(T > 0.0) || !(delta > 0.0)) {
    throw DomainError("smearing: sigma, T and delta must be positive");
  }
  if (sigma / T > 0.2) {
    std::ostringstream msg;
    msg << "sigma/T = " << sigma / T << " exceeds 0.2; smeared kernels are poor delta functions";
    warnings.add(msg.str());
  }
}

}  // namespace qtp
