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

#include "qtp/histories.hpp"

#include <algorithm>
#include <mutex>
#include <numeric>
#include <string>

#include "qtp/error.hpp"

namespace qtp {

namespace {

void require_supported(const Matrix& p, const Matrix& root, const char* what) {
  if (root.rows() != p.rows() || root.cols() != p.cols()) {
    throw DomainError(std::string(what) + ": POVM root dimension mismatch");
  }
  const double scale = std::max(1.0, max_abs(root));
  if (max_abs(p * root - root) > 1e-10 * scale) {
    throw DomainError(std::string(what) + ": POVM root is not supported on H+");
  }
}

void require_preserves(const Matrix& h0, const Matrix& p, const char* what) {
  const double scale = std::max(1.0, max_abs(h0));
  if (max_abs(commutator(h0, p)) > 1e-12 * scale) {
    throw DomainError(std::string(what) + ": H0 does not preserve the event subspaces");
  }
}

}  // namespace

Matrix class_operator(const Matrix& h, const SubspaceSplit& split, const Matrix& povm_root, double t) {
  require_hermitian(h, "class_operator");
  require_supported(split.P(), povm_root, "class_operator");
  return mat_exp(h, Complex(0.0, t)) * povm_root * h * restricted_propagator(h, split, t);
}

Matrix class_operator_perturbative(const Matrix& h0, const Matrix& hi, const SubspaceSplit& split,
                                   const Matrix& povm_root, double t) {
  require_hermitian(h0, "class_operator_perturbative");
  require_preserves(h0, split.P(), "class_operator_perturbative");
  require_supported(split.P(), povm_root, "class_operator_perturbative");
  return heisenberg_event_op(h0, povm_root, hi, t);
}

Matrix heisenberg_event_op(const Matrix& h0, const Matrix& povm_root, const Matrix& hi, double t) {
  require_hermitian(h0, "heisenberg_event_op");
  const Matrix forward = mat_exp(h0, Complex(0.0, -t));
  return forward.adjoint() * povm_root * hi * forward;
}

void EventSpec::validate() const {
  if (event_projectors.empty()) throw DomainError("EventSpec: no events");
  if (povm_roots.size() != event_projectors.size()) {
    throw DomainError("EventSpec: one root family per event is required");
  }
  const Index d = dim();
  for (std::size_t i = 0; i < size(); ++i) {
    const Matrix& p = event_projectors[i];
    if (p.rows() != d || p.cols() != d) throw DomainError("EventSpec: projector dimension mismatch");
    if (max_abs(p * p - p) > 1e-10 || !is_hermitian(p)) {
      throw DomainError("EventSpec: event " + std::to_string(i) + " is not an orthogonal projector");
    }
    if (povm_roots[i].empty()) throw DomainError("EventSpec: event " + std::to_string(i) + " has no records");
    Matrix sum = Matrix::Zero(d, d);
    for (const Matrix& root : povm_roots[i]) {
      if (root.rows() != d || root.cols() != d) throw DomainError("EventSpec: root dimension mismatch");
      sum += root * root;
    }
    if (max_abs(sum - p) > 1e-10) {
      throw DomainError("EventSpec: records of event " + std::to_string(i) +
                        " do not sum to its projector");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (max_abs(commutator(p, event_projectors[j])) > 1e-12) {
        throw DomainError("EventSpec: event projectors " + std::to_string(j) + " and " +
                          std::to_string(i) + " do not commute");
      }
    }
  }
  if (!labels.empty() && labels.size() != size()) throw DomainError("EventSpec: label count mismatch");
}

Matrix EventSpec::no_event_projector(const std::vector<std::size_t>& pending) const {
  const Index d = dim();
  Matrix q = Matrix::Identity(d, d);
  for (std::size_t i : pending) q = q * (Matrix::Identity(d, d) - event_projectors.at(i));
  return q;
}

Matrix class_operator_n(const EventSpec& events, const Matrix& h, const std::vector<int>& outcomes,
                        const std::vector<double>& times, std::size_t max_events) {
  events.validate();
  require_hermitian(h, "class_operator_n");
  const std::size_t n = events.size();
  if (n > max_events) {
    throw DomainError("class_operator_n: " + std::to_string(n) + " events exceed the exact-mode limit of " +
                      std::to_string(max_events));
  }
  if (outcomes.size() != n || times.size() != n) {
    throw DomainError("class_operator_n: outcome and time counts must equal the event count");
  }
  for (std::size_t i = 1; i < n; ++i) {
    if (!(times[i] > times[i - 1])) {
      throw DomainError("class_operator_n: times must be strictly ascending; use time_ordered_class_n");
    }
  }
  // Chain: before event i, the events i..n-1 are still pending.
  Matrix product = Matrix::Identity(h.rows(), h.cols());
  double previous = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::size_t> pending(n - i);
    std::iota(pending.begin(), pending.end(), i);
    const Matrix q = events.no_event_projector(pending);
    const Matrix s = mat_exp(q * h * q, Complex(0.0, -(times[i] - previous))) * q;
    const auto& roots = events.povm_roots[i];
    const int lambda = outcomes[i];
    if (lambda < 0 || static_cast<std::size_t>(lambda) >= roots.size()) {
      throw DomainError("class_operator_n: outcome index out of range");
    }
    product = roots[static_cast<std::size_t>(lambda)] * h * s * product;
    previous = times[i];
  }
  return mat_exp(h, Complex(0.0, times.back())) * product;
}

Matrix time_ordered_product(const std::vector<Matrix>& factors, const std::vector<double>& times) {
  if (factors.empty()) throw DomainError("time_ordered_product: no factors");
  if (factors.size() != times.size()) throw DomainError("time_ordered_product: size mismatch");
  std::vector<std::size_t> order(factors.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return times[a] > times[b]; });
  // Product over groups of equal time; each group is the average over its
  // internal orderings.
  Matrix result;
  std::size_t k = 0;
  while (k < order.size()) {
    std::size_t end = k + 1;
    while (end < order.size() && times[order[end]] == times[order[k]]) ++end;
    Matrix group;
    if (end - k == 1) {
      group = factors[order[k]];
    } else {
      std::vector<std::size_t> members(order.begin() + static_cast<std::ptrdiff_t>(k),
                                       order.begin() + static_cast<std::ptrdiff_t>(end));
      std::sort(members.begin(), members.end());
      Matrix sum = Matrix::Zero(factors[members[0]].rows(), factors[members[0]].cols());
      int count = 0;
      do {
        Matrix term = factors[members[0]];
        for (std::size_t m = 1; m < members.size(); ++m) term = term * factors[members[m]];
        sum += term;
        ++count;
      } while (std::next_permutation(members.begin(), members.end()));
      group = sum / static_cast<double>(count);
    }
    result = k == 0 ? group : Matrix(result * group);
    k = end;
  }
  return result;
}

Matrix time_ordered_class_n(const EventSpec& events, const Matrix& h0, const Matrix& hi,
                            const std::vector<int>& outcomes, const std::vector<double>& times) {
  PerturbativeHistories histories(events, h0, hi);
  return histories.time_ordered(outcomes, times);
}

ClassFamily exact_family(const Matrix& h, const SubspaceSplit& split, const Matrix& povm_root) {
  require_hermitian(h, "exact_family");
  require_supported(split.P(), povm_root, "exact_family");
  auto full = std::make_shared<Evolution>(h);
  auto restricted = std::make_shared<RestrictedEvolution>(h, split.Q());
  const Matrix root_h = povm_root * h;
  return [full, restricted, root_h](double t) -> Matrix {
    return full->propagator(t).adjoint() * root_h * restricted->at(t);
  };
}

ClassFamily perturbative_family(const Matrix& h0, const Matrix& hi, const SubspaceSplit& split,
                                const Matrix& povm_root) {
  require_hermitian(h0, "perturbative_family");
  require_preserves(h0, split.P(), "perturbative_family");
  require_supported(split.P(), povm_root, "perturbative_family");
  auto free = std::make_shared<Evolution>(h0);
  const Matrix root_hi_eig = free->to_eigenbasis(povm_root * hi);
  return [free, root_hi_eig](double t) -> Matrix {
    return free->from_eigenbasis(free->heisenberg_eigenbasis(root_hi_eig, t));
  };
}

PerturbativeHistories::PerturbativeHistories(EventSpec events, const Matrix& h0, const Matrix& hi)
    : events_(std::move(events)) {
  events_.validate();
  require_hermitian(h0, "PerturbativeHistories");
  if (h0.rows() != events_.dim() || hi.rows() != events_.dim() || hi.cols() != events_.dim()) {
    throw DomainError("PerturbativeHistories: dimension mismatch");
  }
  for (const Matrix& p : events_.event_projectors) require_preserves(h0, p, "PerturbativeHistories");
  free_ = Evolution(h0);
  root_hi_eig_.resize(events_.size());
  for (std::size_t i = 0; i < events_.size(); ++i) {
    for (const Matrix& root : events_.povm_roots[i]) root_hi_eig_[i].push_back(free_.to_eigenbasis(root * hi));
  }
}

Matrix PerturbativeHistories::event_op_eigenbasis(std::size_t event, int outcome, double t) const {
  const auto& family = root_hi_eig_.at(event);
  if (outcome < 0 || static_cast<std::size_t>(outcome) >= family.size()) {
    throw DomainError("PerturbativeHistories: outcome index out of range");
  }
  return free_.heisenberg_eigenbasis(family[static_cast<std::size_t>(outcome)], t);
}

Matrix PerturbativeHistories::event_op(std::size_t event, int outcome, double t) const {
  return free_.from_eigenbasis(event_op_eigenbasis(event, outcome, t));
}

Matrix PerturbativeHistories::time_ordered(const std::vector<std::size_t>& subset,
                                           const std::vector<int>& outcomes,
                                           const std::vector<double>& times) const {
  if (subset.empty()) return Matrix::Identity(dim(), dim());
  if (outcomes.size() != subset.size() || times.size() != subset.size()) {
    throw DomainError("time_ordered_class_n: outcome and time counts must equal the event count");
  }
  std::vector<Matrix> factors;
  factors.reserve(subset.size());
  for (std::size_t k = 0; k < subset.size(); ++k) {
    factors.push_back(event_op_eigenbasis(subset[k], outcomes[k], times[k]));
  }
  return free_.from_eigenbasis(time_ordered_product(factors, times));
}

Matrix PerturbativeHistories::time_ordered(const std::vector<int>& outcomes,
                                           const std::vector<double>& times) const {
  std::vector<std::size_t> all(events_.size());
  std::iota(all.begin(), all.end(), 0);
  return time_ordered(all, outcomes, times);
}

MultiClassFamily PerturbativeHistories::family() const {
  auto self = std::make_shared<PerturbativeHistories>(*this);
  return [self](const std::vector<int>& outcomes, const std::vector<double>& times) {
    return self->time_ordered(outcomes, times);
  };
}

std::size_t ClassOperatorSet::size() const {
  std::shared_lock lock(mutex_);
  return operators_.size();
}

Matrix ClassOperatorSet::get_or_compute(const std::vector<int>& outcomes, const std::vector<double>& times,
                                        const MultiClassFamily& compute) {
  Key key{outcomes, times};
  {
    std::shared_lock lock(mutex_);
    auto it = operators_.find(key);
    if (it != operators_.end()) return it->second;
  }
  Matrix value = compute(outcomes, times);
  std::unique_lock lock(mutex_);
  auto [it, inserted] = operators_.emplace(std::move(key), std::move(value));
  return it->second;
}

}  // namespace qtp
