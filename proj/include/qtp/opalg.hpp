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

#include <complex>
#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace qtp {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using Index = Eigen::Index;

// Relative tolerances shared across modules.
inline constexpr double kHermitianTol = 1e-12;
inline constexpr double kPositivityTol = 1e-10;

/// Largest composite dimension any tensor product may produce.
std::size_t dimension_cap();
void set_dimension_cap(std::size_t cap);

/// Largest entry modulus; 0 for an empty matrix.
double max_abs(const Matrix& a);

/// max|A - A^dagger|, the absolute hermiticity defect.
double hermiticity_defect(const Matrix& a);

/// True when max|A - A^dagger| <= tol * max|A|.
bool is_hermitian(const Matrix& a, double tol = kHermitianTol);

/// Throws DomainError naming `what` unless `a` is square and hermitian.
void require_hermitian(const Matrix& a, const char* what, double tol = kHermitianTol);

/// Throws DomainError naming `what` unless `a` is square.
void require_square(const Matrix& a, const char* what);

Matrix commutator(const Matrix& a, const Matrix& b);

/// Kronecker product in slot-major order (first factor varies slowest).
Matrix tensor_product(const Matrix& a, const Matrix& b);
Matrix tensor_product(const std::vector<Matrix>& factors);
Vector tensor_product(const Vector& a, const Vector& b);

/// 1 (x) ... (x) F (x) ... (x) 1 with F placed at `slot`.
Matrix lift(const Matrix& f, std::size_t slot, const std::vector<Index>& dims);

/// e^{scale * A}, Pade scaling-and-squaring.
Matrix mat_exp(const Matrix& a, Complex scale);

struct HermEig {
  RealVector values;  // ascending
  Matrix vectors;     // columns are orthonormal eigenvectors
};

HermEig herm_eig(const Matrix& a);

/// Principal square root of a positive semidefinite matrix. Eigenvalues
/// within the positivity tolerance below zero are treated as zero.
Matrix psd_sqrt(const Matrix& a);

double min_eigenvalue(const Matrix& a);

/// min eigenvalue >= -tol * max|A|.
bool is_positive(const Matrix& a, double tol = kPositivityTol);

/// Sum of singular values.
double trace_norm(const Matrix& a);

Matrix projector_onto(const Matrix& columns);

/// Orthogonal decomposition H = H- (+) H+ with Q projecting on H- and
/// P on H+. Bases are stored as matrix columns.
class SubspaceSplit {
 public:
  SubspaceSplit() = default;
  SubspaceSplit(Matrix basis_minus, Matrix basis_plus);

  /// Split whose H+ is the range of the given orthogonal projector.
  static SubspaceSplit from_projector(const Matrix& p);

  /// Split along computational basis vectors; `plus` lists the indices in H+.
  static SubspaceSplit coordinate(Index dim, const std::vector<Index>& plus);

  Index dim() const { return p_.rows(); }
  const Matrix& basis_minus() const { return basis_minus_; }
  const Matrix& basis_plus() const { return basis_plus_; }
  const Matrix& P() const { return p_; }
  const Matrix& Q() const { return q_; }

  /// Split of 1 (x) ... (x) K (x) ... (x) 1 with this split at `slot`.
  SubspaceSplit lifted(std::size_t slot, const std::vector<Index>& dims) const;

 private:
  Matrix basis_minus_;
  Matrix basis_plus_;
  Matrix p_;
  Matrix q_;
};

}  // namespace qtp
