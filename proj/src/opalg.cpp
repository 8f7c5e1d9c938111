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

#include "qtp/opalg.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <string>

#include <unsupported/Eigen/MatrixFunctions>

#include "qtp/error.hpp"

namespace qtp {

namespace {
std::atomic<std::size_t> g_dimension_cap{4096};

void check_cap(Index dim) {
  if (dim < 0 || static_cast<std::size_t>(dim) > g_dimension_cap.load()) {
    throw DimensionError("dimension cap exceeded: " + std::to_string(dim) + " > " +
                         std::to_string(g_dimension_cap.load()));
  }
}
}  // namespace

std::size_t dimension_cap() { return g_dimension_cap.load(); }
void set_dimension_cap(std::size_t cap) { g_dimension_cap.store(cap); }

double max_abs(const Matrix& a) {
  if (a.size() == 0) return 0.0;
  return a.cwiseAbs().maxCoeff();
}

double hermiticity_defect(const Matrix& a) {
  if (a.rows() != a.cols()) return std::numeric_limits<double>::infinity();
  return max_abs(a - a.adjoint());
}

bool is_hermitian(const Matrix& a, double tol) {
  if (a.rows() != a.cols()) return false;
  return hermiticity_defect(a) <= tol * max_abs(a);
}

void require_square(const Matrix& a, const char* what) {
  if (a.rows() != a.cols() || a.rows() == 0) {
    throw DomainError(std::string(what) + ": operator must be square and non-empty");
  }
}

void require_hermitian(const Matrix& a, const char* what, double tol) {
  require_square(a, what);
  if (!is_hermitian(a, tol)) {
    throw DomainError(std::string(what) + ": operator is not hermitian (defect " +
                      std::to_string(hermiticity_defect(a)) + ")");
  }
}

Matrix commutator(const Matrix& a, const Matrix& b) { return a * b - b * a; }

Matrix tensor_product(const Matrix& a, const Matrix& b) {
  check_cap(a.rows() * b.rows());
  check_cap(a.cols() * b.cols());
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

Matrix tensor_product(const std::vector<Matrix>& factors) {
  if (factors.empty()) return Matrix::Identity(1, 1);
  Matrix out = factors.front();
  for (std::size_t k = 1; k < factors.size(); ++k) out = tensor_product(out, factors[k]);
  return out;
}

Vector tensor_product(const Vector& a, const Vector& b) {
  check_cap(a.size() * b.size());
  Vector out(a.size() * b.size());
  for (Index i = 0; i < a.size(); ++i) out.segment(i * b.size(), b.size()) = a(i) * b;
  return out;
}

Matrix lift(const Matrix& f, std::size_t slot, const std::vector<Index>& dims) {
  if (slot >= dims.size()) {
    throw DomainError("lift: slot " + std::to_string(slot) + " out of range for " +
                      std::to_string(dims.size()) + " factors");
  }
  if (f.rows() != dims[slot] || f.cols() != dims[slot]) {
    throw DomainError("lift: operator dimension does not match factor " + std::to_string(slot));
  }
  Index before = 1;
  Index after = 1;
  for (std::size_t k = 0; k < slot; ++k) before *= dims[k];
  for (std::size_t k = slot + 1; k < dims.size(); ++k) after *= dims[k];
  check_cap(before * f.rows() * after);
  // Identity blocks are sparse; build directly rather than through two full Kronecker products.
  const Index d = f.rows();
  const Index total = before * d * after;
  Matrix out = Matrix::Zero(total, total);
  for (Index b = 0; b < before; ++b) {
    for (Index i = 0; i < d; ++i) {
      for (Index j = 0; j < d; ++j) {
        const Complex v = f(i, j);
        if (v == Complex(0.0)) continue;
        const Index r0 = (b * d + i) * after;
        const Index c0 = (b * d + j) * after;
        for (Index a = 0; a < after; ++a) out(r0 + a, c0 + a) = v;
      }
    }
  }
  return out;
}

Matrix mat_exp(const Matrix& a, Complex scale) {
  require_square(a, "mat_exp");
  if (!a.allFinite() || !std::isfinite(scale.real()) || !std::isfinite(scale.imag())) {
    throw DomainError("mat_exp: non-finite entries");
  }
  Matrix scaled = scale * a;
  Matrix out = scaled.exp();
  if (!out.allFinite()) throw DomainError("mat_exp: result overflowed");
  return out;
}

HermEig herm_eig(const Matrix& a) {
  require_hermitian(a, "herm_eig", 1e-10);
  Matrix sym = 0.5 * (a + a.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(sym);
  if (solver.info() != Eigen::Success) throw DomainError("herm_eig: eigensolver did not converge");
  return {solver.eigenvalues(), solver.eigenvectors()};
}

Matrix psd_sqrt(const Matrix& a) {
  HermEig eig = herm_eig(a);
  const double scale = std::max(max_abs(a), 1e-300);
  RealVector roots(eig.values.size());
  for (Index k = 0; k < eig.values.size(); ++k) {
    const double v = eig.values(k);
    if (v < -kPositivityTol * scale) throw DomainError("psd_sqrt: operator is not positive");
    roots(k) = std::sqrt(std::max(v, 0.0));
  }
  return eig.vectors * roots.asDiagonal() * eig.vectors.adjoint();
}

double min_eigenvalue(const Matrix& a) { return herm_eig(a).values.minCoeff(); }

bool is_positive(const Matrix& a, double tol) {
  return min_eigenvalue(a) >= -tol * max_abs(a);
}

double trace_norm(const Matrix& a) {
  Eigen::JacobiSVD<Matrix> svd(a);
  return svd.singularValues().sum();
}

Matrix projector_onto(const Matrix& columns) { return columns * columns.adjoint(); }

SubspaceSplit::SubspaceSplit(Matrix basis_minus, Matrix basis_plus)
    : basis_minus_(std::move(basis_minus)), basis_plus_(std::move(basis_plus)) {
  const Index dim = std::max(basis_minus_.rows(), basis_plus_.rows());
  if (dim == 0) throw DomainError("SubspaceSplit: empty space");
  if (basis_minus_.cols() == 0) basis_minus_.resize(dim, 0);
  if (basis_plus_.cols() == 0) basis_plus_.resize(dim, 0);
  if (basis_minus_.rows() != dim || basis_plus_.rows() != dim) {
    throw DomainError("SubspaceSplit: basis vectors have inconsistent length");
  }
  if (basis_minus_.cols() + basis_plus_.cols() != dim) {
    throw DomainError("SubspaceSplit: bases do not span the space");
  }
  Matrix all(dim, dim);
  all << basis_minus_, basis_plus_;
  const double defect = max_abs(all.adjoint() * all - Matrix::Identity(dim, dim));
  if (defect > 1e-12 * static_cast<double>(dim)) {
    throw DomainError("SubspaceSplit: bases are not orthonormal (defect " +
                      std::to_string(defect) + ")");
  }
  p_ = projector_onto(basis_plus_);
  q_ = projector_onto(basis_minus_);
}

SubspaceSplit SubspaceSplit::from_projector(const Matrix& p) {
  require_hermitian(p, "SubspaceSplit::from_projector");
  if (max_abs(p * p - p) > 1e-10) throw DomainError("SubspaceSplit: operator is not a projector");
  HermEig eig = herm_eig(p);
  std::vector<Index> minus;
  std::vector<Index> plus;
  for (Index k = 0; k < eig.values.size(); ++k) (eig.values(k) > 0.5 ? plus : minus).push_back(k);
  Matrix bm(p.rows(), static_cast<Index>(minus.size()));
  Matrix bp(p.rows(), static_cast<Index>(plus.size()));
  for (std::size_t k = 0; k < minus.size(); ++k) bm.col(static_cast<Index>(k)) = eig.vectors.col(minus[k]);
  for (std::size_t k = 0; k < plus.size(); ++k) bp.col(static_cast<Index>(k)) = eig.vectors.col(plus[k]);
  return SubspaceSplit(bm, bp);
}

SubspaceSplit SubspaceSplit::coordinate(Index dim, const std::vector<Index>& plus) {
  std::vector<bool> in_plus(static_cast<std::size_t>(dim), false);
  for (Index k : plus) {
    if (k < 0 || k >= dim) throw DomainError("SubspaceSplit::coordinate: index out of range");
    in_plus[static_cast<std::size_t>(k)] = true;
  }
  const Index np = static_cast<Index>(std::count(in_plus.begin(), in_plus.end(), true));
  Matrix bm = Matrix::Zero(dim, dim - np);
  Matrix bp = Matrix::Zero(dim, np);
  Index im = 0;
  Index ip = 0;
  for (Index k = 0; k < dim; ++k) {
    if (in_plus[static_cast<std::size_t>(k)]) {
      bp(k, ip++) = 1.0;
    } else {
      bm(k, im++) = 1.0;
    }
  }
  return SubspaceSplit(bm, bp);
}

SubspaceSplit SubspaceSplit::lifted(std::size_t slot, const std::vector<Index>& dims) const {
  if (slot >= dims.size() || dims[slot] != dim()) {
    throw DomainError("SubspaceSplit::lifted: slot does not match split dimension");
  }
  Index before = 1;
  Index after = 1;
  for (std::size_t k = 0; k < slot; ++k) before *= dims[k];
  for (std::size_t k = slot + 1; k < dims.size(); ++k) after *= dims[k];
  const Matrix ib = Matrix::Identity(before, before);
  const Matrix ia = Matrix::Identity(after, after);
  return SubspaceSplit(tensor_product(ib, tensor_product(basis_minus_, ia)),
                       tensor_product(ib, tensor_product(basis_plus_, ia)));
}

}  // namespace qtp
