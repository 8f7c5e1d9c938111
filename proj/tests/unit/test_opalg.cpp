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

#include <doctest.h>

#include <cmath>

#include "qtp/error.hpp"
#include "qtp/opalg.hpp"
#include "support/generators.hpp"

using namespace qtp;
using namespace qtp::testing;

namespace {

Matrix pauli_x() {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 1) = m(1, 0) = 1.0;
  return m;
}

Matrix pauli_z() {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 0) = 1.0;
  m(1, 1) = -1.0;
  return m;
}

}  // namespace

TEST_CASE("hermiticity checks") {
  Rng rng(11);
  const Matrix h = random_hermitian(rng, 5);
  CHECK(is_hermitian(h));
  CHECK(hermiticity_defect(h) < 1e-14);
  Matrix a = h;
  a(0, 1) += 1e-3;
  CHECK_FALSE(is_hermitian(a));
  CHECK_THROWS_AS(require_hermitian(a, "a"), DomainError);
  CHECK_THROWS_AS(require_square(Matrix::Zero(2, 3), "rect"), DomainError);
}

TEST_CASE("tensor product is slot-major") {
  const Matrix a = pauli_z();
  const Matrix b = Matrix::Identity(3, 3);
  const Matrix ab = tensor_product(a, b);
  REQUIRE(ab.rows() == 6);
  CHECK(ab(0, 0) == Complex(1.0));
  CHECK(ab(3, 3) == Complex(-1.0));
  const Matrix lifted = lift(pauli_x(), 1, {3, 2, 2});
  CHECK((lifted - tensor_product({Matrix::Identity(3, 3), pauli_x(), Matrix::Identity(2, 2)})).norm() < 1e-15);
}

TEST_CASE("dimension cap is enforced") {
  const std::size_t old = dimension_cap();
  set_dimension_cap(8);
  const Matrix three = Matrix::Identity(3, 3);
  CHECK_THROWS_AS(tensor_product(three, three), DimensionError);
  set_dimension_cap(old);
}

TEST_CASE("matrix exponential against spectral oracle") {
  Rng rng(3);
  for (int trial = 0; trial < 5; ++trial) {
    const Matrix h = random_hermitian(rng, 6);
    Eigen::SelfAdjointEigenSolver<Matrix> es(h);
    const double t = uniform_real(rng, -3.0, 3.0);
    Vector phases(6);
    for (Index k = 0; k < 6; ++k) phases(k) = std::exp(Complex(0.0, -t * es.eigenvalues()(k)));
    const Matrix oracle = es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
    CHECK((mat_exp(h, Complex(0.0, -t)) - oracle).cwiseAbs().maxCoeff() < 1e-11);
  }
  // Rotation generator: exp(-i theta sigma_x) = cos - i sin sigma_x.
  const Matrix r = mat_exp(pauli_x(), Complex(0.0, -0.7));
  CHECK(std::abs(r(0, 0) - std::cos(0.7)) < 1e-14);
  CHECK(std::abs(r(0, 1) - Complex(0.0, -std::sin(0.7))) < 1e-14);
}

TEST_CASE("eigen, square root and positivity") {
  Rng rng(5);
  const Matrix rho = random_density(rng, 4);
  const HermEig eig = herm_eig(rho);
  for (Index k = 1; k < 4; ++k) CHECK(eig.values(k) >= eig.values(k - 1));
  const Matrix root = psd_sqrt(rho);
  CHECK((root * root - rho).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(is_positive(rho));
  CHECK_FALSE(is_positive(pauli_z()));
  CHECK(min_eigenvalue(pauli_z()) == doctest::Approx(-1.0));
  CHECK(trace_norm(pauli_z()) == doctest::Approx(2.0));
}

TEST_CASE("subspace split projectors") {
  Rng rng(9);
  const SubspaceSplit split = random_split(rng, 5, 2);
  const Matrix I = Matrix::Identity(5, 5);
  CHECK((split.P() + split.Q() - I).norm() < 1e-12);
  CHECK((split.P() * split.Q()).norm() < 1e-12);
  CHECK((split.P() * split.P() - split.P()).norm() < 1e-12);

  const SubspaceSplit c = SubspaceSplit::coordinate(3, {2});
  CHECK(c.P()(2, 2) == Complex(1.0));
  CHECK(c.Q()(0, 0) == Complex(1.0));
  const SubspaceSplit back = SubspaceSplit::from_projector(c.P());
  CHECK((back.P() - c.P()).norm() < 1e-12);

  const SubspaceSplit lifted = c.lifted(1, {2, 3});
  CHECK((lifted.P() - lift(c.P(), 1, {2, 3})).norm() < 1e-12);
}

TEST_CASE("commutator of Pauli matrices") {
  const Matrix c = commutator(pauli_x(), pauli_z());
  // [X, Z] = -2iY
  CHECK(std::abs(c(0, 1) - Complex(-2.0, 0.0)) < 1e-15);
  CHECK(std::abs(c(1, 0) - Complex(2.0, 0.0)) < 1e-15);
}
