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

// Random operators and states for property tests. Every generator draws
// from a caller-owned engine so that a seed fixes the whole test.

#include <cstdint>
#include <random>

#include "qtp/opalg.hpp"

namespace qtp::testing {

using Rng = std::mt19937_64;

inline Complex gaussian_complex(Rng& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  const double re = n(rng);
  const double im = n(rng);
  return {re, im};
}

inline Matrix random_matrix(Rng& rng, Index rows, Index cols) {
  Matrix m(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) m(i, j) = gaussian_complex(rng);
  return m;
}

/// GUE-like hermitian matrix scaled to unit entry variance.
inline Matrix random_hermitian(Rng& rng, Index dim) {
  const Matrix a = random_matrix(rng, dim, dim);
  return 0.5 * (a + a.adjoint());
}

inline Matrix random_unitary(Rng& rng, Index dim) {
  Eigen::HouseholderQR<Matrix> qr(random_matrix(rng, dim, dim));
  return qr.householderQ() * Matrix::Identity(dim, dim);
}

inline Vector random_unit_vector(Rng& rng, Index dim) {
  Vector v = random_matrix(rng, dim, 1).col(0);
  return v / v.norm();
}

/// Mixed state of full rank, drawn as A A^dagger / Tr.
inline Matrix random_density(Rng& rng, Index dim) {
  const Matrix a = random_matrix(rng, dim, dim);
  Matrix rho = a * a.adjoint();
  return rho / rho.trace().real();
}

/// Mixed state supported on the column span of `basis` (orthonormal columns).
inline Matrix random_density_on(Rng& rng, const Matrix& basis) {
  const Matrix inner = random_density(rng, basis.cols());
  return basis * inner * basis.adjoint();
}

/// Random coordinate split: the last `plus` basis vectors span H+.
inline SubspaceSplit random_split(Rng& rng, Index dim, Index plus) {
  const Matrix u = random_unitary(rng, dim);
  return SubspaceSplit(u.leftCols(dim - plus), u.rightCols(plus));
}

inline int uniform_int(Rng& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

inline double uniform_real(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

}  // namespace qtp::testing
