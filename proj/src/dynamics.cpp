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

#include "qtp/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qtp/error.hpp"

namespace qtp {

Evolution::Evolution(const Matrix& h) {
  HermEig eig = herm_eig(h);
  energies_ = std::move(eig.values);
  vectors_ = std::move(eig.vectors);
}

Matrix Evolution::propagator(double t) const {
  Vector phases(energies_.size());
  for (Index k = 0; k < energies_.size(); ++k) phases(k) = std::polar(1.0, -energies_(k) * t);
  return vectors_ * phases.asDiagonal() * vectors_.adjoint();
}

Matrix Evolution::heisenberg_eigenbasis(const Matrix& a_eig, double t) const {
  const Index d = energies_.size();
  Matrix out(d, d);
  for (Index j = 0; j < d; ++j) {
    for (Index k = 0; k < d; ++k) {
      out(j, k) = a_eig(j, k) * std::polar(1.0, (energies_(j) - energies_(k)) * t);
    }
  }
  return out;
}

Matrix Evolution::heisenberg(const Matrix& a, double t) const {
  return from_eigenbasis(heisenberg_eigenbasis(to_eigenbasis(a), t));
}

Matrix restricted_propagator(const Matrix& h, const SubspaceSplit& split, double t) {
  require_hermitian(h, "restricted_propagator");
  if (h.rows() != split.dim()) throw DomainError("restricted_propagator: split dimension mismatch");
  if (!std::isfinite(t)) throw DomainError("restricted_propagator: non-finite time");
  const Matrix& q = split.Q();
  return mat_exp(q * h * q, Complex(0.0, -t)) * q;
}

Matrix restricted_propagator_trotter(const Matrix& h, const SubspaceSplit& split, double t,
                                     int steps) {
  require_hermitian(h, "restricted_propagator_trotter");
  if (steps < 1) throw DomainError("restricted_propagator_trotter: steps must be positive");
  if (h.rows() != split.dim()) throw DomainError("restricted_propagator_trotter: split dimension mismatch");
  const Matrix& q = split.Q();
  const Matrix factor = q * mat_exp(h, Complex(0.0, -t / steps)) * q;
  // Binary powering; the factor is fixed so only log2(N) products are needed.
  Matrix result = Matrix::Identity(h.rows(), h.cols());
  Matrix base = factor;
  for (int n = steps; n > 0; n >>= 1) {
    if (n & 1) result = result * base;
    if (n > 1) base = base * base;
  }
  return result;
}

Matrix restricted_propagator(const PropagatorRequest& req) {
  if (req.trotter_steps) {
    return restricted_propagator_trotter(req.hamiltonian, req.split, req.t, *req.trotter_steps);
  }
  return restricted_propagator(req.hamiltonian, req.split, req.t);
}

RestrictedEvolution::RestrictedEvolution(const Matrix& h, const Matrix& q)
    : evolution_(q * h * q), q_(q) {}

ProperTimeMap::ProperTimeMap(std::vector<double> times, std::vector<double> proper_times)
    : times_(std::move(times)), proper_times_(std::move(proper_times)) {
  if (times_.size() != proper_times_.size() || times_.size() < 2) {
    throw DomainError("ProperTimeMap: need at least two matching samples");
  }
  for (std::size_t k = 1; k < times_.size(); ++k) {
    if (!(times_[k] > times_[k - 1]) || !(proper_times_[k] > proper_times_[k - 1])) {
      throw DomainError("ProperTimeMap: non-monotone proper-time map at sample " + std::to_string(k));
    }
  }
  if (times_.front() <= 0.0 && times_.back() >= 0.0) {
    const double zero = tau(0.0);
    const double scale = std::max(1.0, std::abs(proper_times_.back() - proper_times_.front()));
    if (std::abs(zero) > 1e-9 * scale) {
      throw DomainError("ProperTimeMap: tau(0) must vanish, got " + std::to_string(zero));
    }
  }
}

namespace {
double interpolate(const std::vector<double>& xs, const std::vector<double>& ys, double x) {
  if (x < xs.front() || x > xs.back()) {
    throw DomainError("ProperTimeMap: argument " + std::to_string(x) + " outside sampled range");
  }
  auto it = std::upper_bound(xs.begin(), xs.end(), x);
  std::size_t hi = static_cast<std::size_t>(it - xs.begin());
  if (hi >= xs.size()) hi = xs.size() - 1;
  const std::size_t lo = hi - 1;
  const double u = (x - xs[lo]) / (xs[hi] - xs[lo]);
  return ys[lo] + u * (ys[hi] - ys[lo]);
}
}  // namespace

double ProperTimeMap::tau(double t) const {
  if (is_identity()) return t;
  return interpolate(times_, proper_times_, t);
}

double ProperTimeMap::time(double tau_value) const {
  if (is_identity()) return tau_value;
  if (tau_value < proper_times_.front() || tau_value > proper_times_.back()) {
    throw DomainError("ProperTimeMap: proper time outside sampled range");
  }
  double lo = times_.front();
  double hi = times_.back();
  for (int iter = 0; iter < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(hi)); ++iter) {
    const double mid = 0.5 * (lo + hi);
    (tau(mid) < tau_value ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

Matrix free_evolution(const Matrix& field_h, const std::vector<DetectorClock>& detectors, double t) {
  require_hermitian(field_h, "free_evolution: field Hamiltonian");
  std::vector<Matrix> factors;
  factors.reserve(detectors.size() + 1);
  factors.push_back(mat_exp(field_h, Complex(0.0, -t)));
  for (const auto& det : detectors) {
    require_hermitian(det.self_h, "free_evolution: detector Hamiltonian");
    factors.push_back(mat_exp(det.self_h, Complex(0.0, -det.clock.tau(t))));
  }
  return tensor_product(factors);
}

}  // namespace qtp
