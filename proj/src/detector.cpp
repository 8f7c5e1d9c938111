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

#include "qtp/detector.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "qtp/error.hpp"

namespace qtp {

namespace {

std::array<std::vector<double>, 3> body_axes(const BodySet& body) {
  std::array<std::vector<double>, 3> axes;
  for (std::size_t a = 0; a < 3; ++a) {
    for (const auto& p : body.points) axes[a].push_back(p[a]);
    std::sort(axes[a].begin(), axes[a].end());
    axes[a].erase(std::unique(axes[a].begin(), axes[a].end()), axes[a].end());
  }
  return axes;
}

}  // namespace

Matrix DetectorModel::current_at(const std::string& index, const Point3& q) const {
  auto it = currents.find(index);
  if (it == currents.end()) throw DomainError("detector: unknown current index '" + index + "'");
  const auto& body = tube.body();
  const auto& values = it->second;
  const Index d = dim();
  if (body.points.size() == 1) {
    for (std::size_t a = 0; a < 3; ++a) {
      if (std::abs(q[a] - body.points[0][a]) > 1e-12) return Matrix::Zero(d, d);
    }
    return values.front();
  }
  const auto axes = body_axes(body);
  std::array<std::size_t, 3> lo{};
  std::array<double, 3> frac{};
  for (std::size_t a = 0; a < 3; ++a) {
    const auto& xs = axes[a];
    if (xs.size() == 1) {
      if (std::abs(q[a] - xs[0]) > 1e-12) return Matrix::Zero(d, d);
      continue;
    }
    if (q[a] < xs.front() - 1e-12 || q[a] > xs.back() + 1e-12) return Matrix::Zero(d, d);
    const double x = std::clamp(q[a], xs.front(), xs.back());
    std::size_t hi = static_cast<std::size_t>(std::upper_bound(xs.begin(), xs.end(), x) - xs.begin());
    if (hi >= xs.size()) hi = xs.size() - 1;
    lo[a] = hi - 1;
    frac[a] = (x - xs[lo[a]]) / (xs[hi] - xs[lo[a]]);
  }
  // Body points are stored in (x, y, z) lexicographic grid order.
  auto flat = [&](const std::array<std::size_t, 3>& idx) {
    return (idx[0] * axes[1].size() + idx[1]) * axes[2].size() + idx[2];
  };
  Matrix out = Matrix::Zero(d, d);
  for (int corner = 0; corner < 8; ++corner) {
    double w = 1.0;
    std::array<std::size_t, 3> idx{};
    bool skip = false;
    for (std::size_t a = 0; a < 3; ++a) {
      const bool up = (corner >> a) & 1;
      if (up && axes[a].size() == 1) {
        skip = true;
        break;
      }
      idx[a] = lo[a] + (up ? 1 : 0);
      w *= up ? frac[a] : 1.0 - frac[a];
    }
    if (skip || w == 0.0) continue;
    out += w * values.at(flat(idx));
  }
  return out;
}

void DetectorModel::validate() const {
  const Index d = dim();
  require_hermitian(self_h, "detector self-Hamiltonian");
  if (self_h.rows() != d) throw ValidationError("detector", "self-Hamiltonian dimension mismatch");
  const Matrix& e = split.P();
  if (max_abs(commutator(self_h, e)) > 1e-12 * std::max(1.0, max_abs(self_h))) {
    throw ValidationError("detector", "self-Hamiltonian mixes K- and K+");
  }
  if (omega.size() != d) throw ValidationError("detector", "initial state dimension mismatch");
  if (std::abs(omega.norm() - 1.0) > 1e-10) throw ValidationError("detector", "initial state is not normalized");
  if ((e * omega).norm() > 1e-12) throw ValidationError("detector", "initial state is not in K-");
  if (currents.empty()) throw ValidationError("detector", "no currents");
  for (const auto& [name, family] : currents) {
    if (family.size() != tube.body().points.size()) {
      throw ValidationError("detector", "current '" + name + "' needs one operator per body point");
    }
    for (const Matrix& j : family) {
      if (j.rows() != d || j.cols() != d) throw ValidationError("detector", "current dimension mismatch");
      if (!is_hermitian(j, 1e-10)) throw ValidationError("detector", "current '" + name + "' is not hermitian");
    }
  }
  auto check_family = [&](const std::vector<Matrix>& family, const std::vector<double>* weights, const char* name) {
    Matrix sum = Matrix::Zero(d, d);
    for (std::size_t k = 0; k < family.size(); ++k) {
      const Matrix& f = family[k];
      if (f.rows() != d || f.cols() != d) throw ValidationError("pointer", std::string(name) + ": dimension mismatch");
      if (!is_hermitian(f, 1e-10) || !is_positive(f)) {
        throw ValidationError("pointer", std::string(name) + ": element is not positive");
      }
      if (max_abs(e * f * e - f) > 1e-10) {
        throw ValidationError("pointer", std::string(name) + ": element is not supported on K+");
      }
      sum += (weights ? (*weights)[k] : 1.0) * f;
    }
    if (max_abs(sum - e) > 1e-8) throw ValidationError("pointer", std::string(name) + ": elements do not sum to E");
  };
  if (pointer_other.empty()) throw ValidationError("pointer", "no records declared");
  check_family(pointer_other, nullptr, "F2");
  if (!mu_labels.empty() && mu_labels.size() != pointer_other.size()) {
    throw ValidationError("pointer", "record label count mismatch");
  }
  if (!pointer_position.F.empty()) {
    if (pointer_position.F.size() != pointer_position.Q.size() ||
        pointer_position.weights.size() != pointer_position.Q.size()) {
      throw ValidationError("pointer", "F1 grid, weights and operators must align");
    }
    check_family(pointer_position.F, &pointer_position.weights, "F1");
  }
  if (!(delta > 0.0)) throw ValidationError("detector", "pointer width must be positive");
  if (omega_prime.size() != 0 && omega_prime.size() != d) {
    throw ValidationError("detector", "partner state dimension mismatch");
  }
}

DetectorModel two_level_detector(double gap, const std::string& current_index) {
  DetectorModel det;
  det.split = SubspaceSplit::coordinate(2, {1});
  det.self_h = Matrix::Zero(2, 2);
  det.self_h(1, 1) = gap;
  Matrix sx = Matrix::Zero(2, 2);
  sx(0, 1) = 1.0;
  sx(1, 0) = 1.0;
  det.currents[current_index] = {sx};
  det.omega = Vector::Zero(2);
  det.omega(0) = 1.0;
  det.pointer_other = {det.split.P()};
  det.mu_labels = {"click"};
  return det;
}

DetectorModel multilevel_detector(const std::vector<double>& gaps, const std::string& current_index) {
  if (gaps.empty()) throw DomainError("multilevel_detector: at least one excited level");
  const Index d = static_cast<Index>(gaps.size()) + 1;
  std::vector<Index> plus;
  for (Index k = 1; k < d; ++k) plus.push_back(k);
  DetectorModel det;
  det.split = SubspaceSplit::coordinate(d, plus);
  det.self_h = Matrix::Zero(d, d);
  Matrix j = Matrix::Zero(d, d);
  for (Index k = 1; k < d; ++k) {
    det.self_h(k, k) = gaps[static_cast<std::size_t>(k - 1)];
    j(k, 0) = 1.0;
    j(0, k) = 1.0;
    Matrix f = Matrix::Zero(d, d);
    f(k, k) = 1.0;
    det.pointer_other.push_back(f);
    det.mu_labels.push_back("level" + std::to_string(k));
  }
  det.currents[current_index] = {j};
  det.omega = Vector::Zero(d);
  det.omega(0) = 1.0;
  return det;
}

NonsimultaneityReport nonsimultaneity_check(const WorldTube& tube, double sigma, int samples) {
  if (!(sigma > 0.0)) throw DomainError("nonsimultaneity_check: sigma must be positive");
  NonsimultaneityReport r;
  const double L = tube.extent();
  r.extent_ratio = L / sigma;
  if (L == 0.0) {
    r.pass = true;
    return r;
  }
  std::vector<double> taus;
  if (tube.kind() == WorldTube::Kind::inertial) {
    taus.push_back(0.0);
  } else {
    for (int k = 0; k < samples; ++k) {
      taus.push_back(tube.tau_min() + (tube.tau_max() - tube.tau_min()) * k / std::max(1, samples - 1));
    }
  }
  for (double tau : taus) {
    const Eigen::Matrix3d h = tube.spatial_metric(tau);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(h, Eigen::EigenvaluesOnly);
    const double norm = solver.eigenvalues().cwiseAbs().maxCoeff();
    const FourVector u = tube.velocity(tau);
    const double timelike = std::abs(minkowski_dot(u, u));
    const double ratio = norm * L * L / (timelike * sigma * sigma);
    if (ratio >= r.metric_ratio) {
      r.metric_ratio = ratio;
      r.worst_tau = tau;
    }
  }
  r.pass = r.extent_ratio <= kNonsimultaneityThreshold && r.metric_ratio <= kNonsimultaneityThreshold;
  return r;
}

StationarityReport stationarity_check(const DetectorModel& det, const std::vector<double>& taus) {
  if (taus.empty()) throw DomainError("stationarity_check: no sample times");
  const Index d = det.dim();
  Evolution evo(det.self_h);
  // Normal equations: G omega' = G mean_tau(e^{-ih tau} omega), G = sum J^dagger J.
  Matrix gram = Matrix::Zero(d, d);
  for (const auto& [name, family] : det.currents) {
    for (const Matrix& j : family) gram += j.adjoint() * j;
  }
  Vector mean = Vector::Zero(d);
  std::vector<Vector> evolved;
  for (double tau : taus) {
    evolved.push_back(evo.propagator(tau) * det.omega);
    mean += evolved.back();
  }
  mean /= static_cast<double>(taus.size());
  StationarityReport r;
  if (det.omega_prime.size() == d) {
    r.omega_prime = det.omega_prime;
  } else {
    // Components outside the range of G are unconstrained; keep them from omega.
    Eigen::SelfAdjointEigenSolver<Matrix> solver(gram);
    const double scale = std::max(1.0, solver.eigenvalues().cwiseAbs().maxCoeff());
    Matrix range = Matrix::Zero(d, d);
    for (Index k = 0; k < d; ++k) {
      if (solver.eigenvalues()(k) > 1e-12 * scale) {
        range += solver.eigenvectors().col(k) * solver.eigenvectors().col(k).adjoint();
      }
    }
    r.omega_prime = range * mean + (Matrix::Identity(d, d) - range) * det.omega;
  }
  double worst = 0.0;
  for (const auto& [name, family] : det.currents) {
    for (const Matrix& j : family) {
      for (const Vector& v : evolved) worst = std::max(worst, (j * (v - r.omega_prime)).norm());
    }
  }
  r.residual = worst;
  r.pass = worst <= kStationarityThreshold;
  return r;
}

PointerReport pointer_factorization_check(const DetectorModel& det) {
  PointerReport r;
  const Index d = det.dim();
  std::vector<Matrix> f1 = det.pointer_position.F;
  if (f1.empty()) f1.push_back(det.split.P());
  for (const Matrix& a : f1) {
    const double na = trace_norm(a);
    if (na == 0.0) continue;
    for (const Matrix& b : det.pointer_other) {
      const double nb = trace_norm(b);
      if (nb == 0.0) continue;
      r.max_ratio = std::max(r.max_ratio, trace_norm(commutator(a, b)) / (na * nb));
    }
  }
  (void)d;
  r.pass = r.max_ratio <= kPointerThreshold;
  return r;
}

}  // namespace qtp
