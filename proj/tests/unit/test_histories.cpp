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
#include "qtp/histories.hpp"
#include "support/generators.hpp"

using namespace qtp;
using namespace qtp::testing;

namespace {

// Field qubit (x) detector qubit with sigma_x (x) sigma_x coupling.
struct Toy {
  Matrix h0;
  Matrix hi;
  SubspaceSplit split;
  Matrix root;
};

Toy make_toy(double g) {
  Matrix x = Matrix::Zero(2, 2);
  x(0, 1) = x(1, 0) = 1.0;
  Matrix n = Matrix::Zero(2, 2);
  n(1, 1) = 1.0;
  const Matrix I = Matrix::Identity(2, 2);
  Toy t;
  t.h0 = tensor_product(n, I) + 1.3 * tensor_product(I, n);
  t.hi = g * tensor_product(x, x);
  t.split = SubspaceSplit::from_projector(tensor_product(I, n));
  t.root = t.split.P();
  return t;
}

}  // namespace

TEST_CASE("class operator maps H- into H+") {
  const Toy toy = make_toy(0.2);
  const Matrix c = class_operator(toy.h0 + toy.hi, toy.split, toy.root, 0.8);
  const Evolution evo(toy.h0 + toy.hi);
  // Independent oracle: e^{iHt} P H S_t with S_t from the restricted generator.
  const Matrix q = toy.split.Q();
  const Matrix s = Evolution(q * (toy.h0 + toy.hi) * q).propagator(0.8) * q;
  const Matrix oracle = evo.propagator(-0.8) * toy.root * (toy.h0 + toy.hi) * s;
  CHECK((c - oracle).cwiseAbs().maxCoeff() < 1e-11);
  CHECK((c * toy.split.P()).norm() < 1e-12);
}

TEST_CASE("perturbative class operator") {
  const Toy toy = make_toy(0.05);
  const Matrix c = class_operator_perturbative(toy.h0, toy.hi, toy.split, toy.root, 0.5);
  const Matrix oracle = heisenberg_event_op(toy.h0, toy.root, toy.hi, 0.5);
  CHECK((c - oracle).norm() < 1e-14);
  const ClassFamily f = perturbative_family(toy.h0, toy.hi, toy.split, toy.root);
  CHECK((f(0.5) - c).norm() < 1e-12);
  const ClassFamily e = exact_family(toy.h0 + toy.hi, toy.split, toy.root);
  CHECK((e(0.5) - class_operator(toy.h0 + toy.hi, toy.split, toy.root, 0.5)).norm() < 1e-11);
  // A free Hamiltonian that mixes the split is rejected.
  Matrix bad = toy.h0;
  bad(0, 1) = bad(1, 0) = 0.3;
  CHECK_THROWS_AS(class_operator_perturbative(bad, toy.hi, toy.split, toy.root, 0.5), DomainError);
}

TEST_CASE("time ordered product orders latest leftmost and averages ties") {
  Rng rng(31);
  const Matrix a = random_matrix(rng, 3, 3);
  const Matrix b = random_matrix(rng, 3, 3);
  CHECK((time_ordered_product({a, b}, {1.0, 2.0}) - b * a).norm() < 1e-14);
  CHECK((time_ordered_product({a, b}, {2.0, 1.0}) - a * b).norm() < 1e-14);
  CHECK((time_ordered_product({a, b}, {1.0, 1.0}) - 0.5 * (a * b + b * a)).norm() < 1e-14);
}

TEST_CASE("event spec validation") {
  const Matrix I = Matrix::Identity(2, 2);
  Matrix p = Matrix::Zero(2, 2);
  p(1, 1) = 1.0;
  EventSpec ok{{p}, {{p}}, {{"click"}}};
  CHECK_NOTHROW(ok.validate());
  CHECK((ok.no_event_projector({0}) - (I - p)).norm() < 1e-14);
  EventSpec bad{{p}, {{0.5 * p}}, {{"click"}}};
  CHECK_THROWS(bad.validate());
}

TEST_CASE("perturbative histories are permutation invariant") {
  Matrix x = Matrix::Zero(2, 2);
  x(0, 1) = x(1, 0) = 1.0;
  Matrix n = Matrix::Zero(2, 2);
  n(1, 1) = 1.0;
  const Matrix I = Matrix::Identity(2, 2);
  const std::vector<Index> dims{2, 2, 2};
  const Matrix h0 = lift(n, 0, dims) + 1.1 * lift(n, 1, dims) + 0.9 * lift(n, 2, dims);
  const Matrix hi = 0.1 * (tensor_product({x, x, I}) + tensor_product({x, I, x}));
  const Matrix p1 = lift(n, 1, dims);
  const Matrix p2 = lift(n, 2, dims);
  EventSpec events{{p1, p2}, {{p1}, {p2}}, {{"a"}, {"b"}}};
  const PerturbativeHistories hist(events, h0, hi);
  const Matrix d12 = hist.time_ordered({0, 1}, {0, 0}, {0.3, 0.7});
  const Matrix d21 = hist.time_ordered({1, 0}, {0, 0}, {0.7, 0.3});
  CHECK((d12 - d21).norm() < 1e-12);
  // Oracle: later event operator on the left.
  const Matrix oracle = hist.event_op(1, 0, 0.7) * hist.event_op(0, 0, 0.3);
  CHECK((d12 - oracle).norm() < 1e-12);
  const Matrix tn = time_ordered_class_n(events, h0, hi, {0, 0}, {0.3, 0.7});
  CHECK((tn - oracle).norm() < 1e-12);
}

TEST_CASE("exact n-event chain requires ascending times and a small n") {
  const Toy toy = make_toy(0.1);
  EventSpec events{{toy.split.P()}, {{toy.root}}, {{"click"}}};
  const Matrix c = class_operator_n(events, toy.h0 + toy.hi, {0}, {0.4});
  CHECK((c - class_operator(toy.h0 + toy.hi, toy.split, toy.root, 0.4)).norm() < 1e-11);
  CHECK_THROWS(class_operator_n(events, toy.h0 + toy.hi, {0}, {0.4}, 0));
}

TEST_CASE("class operator memo") {
  ClassOperatorSet set(ClassMode::perturbative);
  int calls = 0;
  const MultiClassFamily f = [&](const std::vector<int>&, const std::vector<double>& t) {
    ++calls;
    return Matrix::Identity(2, 2) * t[0];
  };
  const Matrix a = set.get_or_compute({0}, {1.0}, f);
  const Matrix b = set.get_or_compute({0}, {1.0}, f);
  CHECK(calls == 1);
  CHECK((a - b).norm() == 0.0);
  CHECK(set.size() == 1);
  CHECK(set.mode() == ClassMode::perturbative);
}
