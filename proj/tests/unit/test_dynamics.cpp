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

#include "qtp/dynamics.hpp"
#include "qtp/error.hpp"
#include "support/generators.hpp"

using namespace qtp;
using namespace qtp::testing;

TEST_CASE("evolution is unitary and matches the exponential") {
  Rng rng(21);
  const Matrix h = random_hermitian(rng, 5);
  const Evolution evo(h);
  const Matrix u = evo.propagator(1.3);
  CHECK((u * u.adjoint() - Matrix::Identity(5, 5)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((u - mat_exp(h, Complex(0.0, -1.3))).cwiseAbs().maxCoeff() < 1e-11);
  const Matrix a = random_hermitian(rng, 5);
  const Matrix ah = evo.heisenberg(a, 0.4);
  const Matrix u4 = evo.propagator(0.4);
  CHECK((ah - u4.adjoint() * a * u4).cwiseAbs().maxCoeff() < 1e-11);
  const Matrix ae = evo.heisenberg_eigenbasis(evo.to_eigenbasis(a), 0.4);
  CHECK((evo.from_eigenbasis(ae) - ah).cwiseAbs().maxCoeff() < 1e-11);
}

TEST_CASE("restricted propagator is unitary on H-") {
  Rng rng(22);
  for (int trial = 0; trial < 5; ++trial) {
    const Index dim = uniform_int(rng, 2, 8);
    const Index plus = uniform_int(rng, 1, static_cast<int>(dim) - 1);
    const Matrix h = random_hermitian(rng, dim);
    const SubspaceSplit split = random_split(rng, dim, plus);
    const Matrix s = restricted_propagator(h, split, 0.9);
    CHECK((s * s.adjoint() - split.Q()).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((split.P() * s).norm() < 1e-10);
  }
}

TEST_CASE("restricted propagator at t = 0 is Q and trivial split gives full evolution") {
  Rng rng(23);
  const Matrix h = random_hermitian(rng, 4);
  const SubspaceSplit split = SubspaceSplit::coordinate(4, {3});
  CHECK((restricted_propagator(h, split, 0.0) - split.Q()).norm() < 1e-12);
  Matrix block = h;
  block.row(3).setZero();
  block.col(3).setZero();
  const Matrix s = restricted_propagator(block, split, 2.0);
  CHECK((s - Evolution(block).propagator(2.0) * split.Q()).norm() < 1e-11);
}

TEST_CASE("Trotter product converges at first order") {
  Rng rng(24);
  const Matrix h = random_hermitian(rng, 4);
  const SubspaceSplit split = SubspaceSplit::coordinate(4, {0});
  const Matrix exact = restricted_propagator(h, split, 1.0);
  const double e1 = (restricted_propagator_trotter(h, split, 1.0, 100) - exact).norm();
  const double e2 = (restricted_propagator_trotter(h, split, 1.0, 200) - exact).norm();
  CHECK(e1 / e2 == doctest::Approx(2.0).epsilon(0.15));
  PropagatorRequest req{h, split, 1.0, 100};
  CHECK((restricted_propagator(req) - restricted_propagator_trotter(h, split, 1.0, 100)).norm() < 1e-14);
  RestrictedEvolution cache(h, split.Q());
  CHECK((cache.at(1.0) - exact).norm() < 1e-11);
}

TEST_CASE("proper time map") {
  const ProperTimeMap id;
  CHECK(id.is_identity());
  CHECK(id.tau(3.0) == 3.0);
  const ProperTimeMap half({0.0, 2.0, 4.0}, {0.0, 1.0, 2.0});
  CHECK(half.tau(3.0) == doctest::Approx(1.5));
  CHECK(half.time(1.5) == doctest::Approx(3.0));
}

TEST_CASE("free evolution factorizes") {
  Rng rng(25);
  const Matrix hf = random_hermitian(rng, 3);
  const Matrix hd = random_hermitian(rng, 2);
  const Matrix u = free_evolution(hf, {{hd, ProperTimeMap()}}, 0.7);
  const Matrix oracle = tensor_product(Evolution(hf).propagator(0.7), Evolution(hd).propagator(0.7));
  CHECK((u - oracle).cwiseAbs().maxCoeff() < 1e-12);
}
