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

#include <functional>
#include <map>
#include <memory>
#include <shared_mutex>
#include <string>
#include <vector>

#include "qtp/dynamics.hpp"
#include "qtp/opalg.hpp"

namespace qtp {

/// e^{iHt} sqrt(Pi) H S_t for a single event.
Matrix class_operator(const Matrix& h, const SubspaceSplit& split, const Matrix& povm_root, double t);

/// Leading-order form e^{iH0 t} sqrt(Pi) H_I e^{-iH0 t}. Requires H0 to
/// preserve the split.
Matrix class_operator_perturbative(const Matrix& h0, const Matrix& hi, const SubspaceSplit& split,
                                   const Matrix& povm_root, double t);

/// e^{iH0 t} sqrt(Pi_i) H_I e^{-iH0 t}, without the split check.
Matrix heisenberg_event_op(const Matrix& h0, const Matrix& povm_root, const Matrix& hi, double t);

/// n commuting events. Event i transitions into the range of
/// `event_projectors[i]`; its records carry roots that square-sum to it.
struct EventSpec {
  std::vector<Matrix> event_projectors;
  std::vector<std::vector<Matrix>> povm_roots;
  std::vector<std::vector<std::string>> labels;

  std::size_t size() const { return event_projectors.size(); }
  std::size_t outcome_count(std::size_t event) const { return povm_roots.at(event).size(); }
  Index dim() const { return event_projectors.empty() ? 0 : event_projectors.front().rows(); }

  /// Checks roots square-sum to the projectors and that projectors commute.
  void validate() const;

  /// Projector onto the subspace in which none of `pending` has occurred.
  Matrix no_event_projector(const std::vector<std::size_t>& pending) const;
};

/// Default limit on the number of events for the exact chain.
inline constexpr std::size_t kMaxExactEvents = 3;

/// Exact n-event class operator for strictly ascending times, with event i
/// occurring i-th.
Matrix class_operator_n(const EventSpec& events, const Matrix& h, const std::vector<int>& outcomes,
                        const std::vector<double>& times, std::size_t max_events = kMaxExactEvents);

/// T[A_n(t_n) ... A_1(t_1)], latest factor leftmost; equal times averaged
/// over both orderings.
Matrix time_ordered_class_n(const EventSpec& events, const Matrix& h0, const Matrix& hi,
                            const std::vector<int>& outcomes, const std::vector<double>& times);

/// Single-outcome class operator as a function of time.
using ClassFamily = std::function<Matrix(double)>;

/// Multi-event class operator as a function of outcomes and times.
using MultiClassFamily = std::function<Matrix(const std::vector<int>&, const std::vector<double>&)>;

/// Exact single-event family with both exponentials cached spectrally.
ClassFamily exact_family(const Matrix& h, const SubspaceSplit& split, const Matrix& povm_root);

/// Perturbative single-event family.
ClassFamily perturbative_family(const Matrix& h0, const Matrix& hi, const SubspaceSplit& split,
                                const Matrix& povm_root);

/// Perturbative multi-event machinery built once from (events, H0, H_I).
class PerturbativeHistories {
 public:
  PerturbativeHistories(EventSpec events, const Matrix& h0, const Matrix& hi);

  const EventSpec& events() const { return events_; }
  const Evolution& free() const { return free_; }
  Index dim() const { return free_.dim(); }

  /// A_i(lambda, t) in the original basis.
  Matrix event_op(std::size_t event, int outcome, double t) const;
  /// A_i(lambda, t) in the eigenbasis of H0.
  Matrix event_op_eigenbasis(std::size_t event, int outcome, double t) const;

  /// Time-ordered product over the listed events only.
  Matrix time_ordered(const std::vector<std::size_t>& subset, const std::vector<int>& outcomes,
                      const std::vector<double>& times) const;
  /// Time-ordered product over all events.
  Matrix time_ordered(const std::vector<int>& outcomes, const std::vector<double>& times) const;

  MultiClassFamily family() const;

 private:
  EventSpec events_;
  Evolution free_;
  // sqrt(Pi_i(lambda)) H_I in the eigenbasis of H0, indexed [event][outcome].
  std::vector<std::vector<Matrix>> root_hi_eig_;
};

/// Orders the factors of a list by descending time (latest leftmost) and
/// multiplies them, averaging over permutations inside groups of equal time.
Matrix time_ordered_product(const std::vector<Matrix>& factors, const std::vector<double>& times);

enum class ClassMode { exact, perturbative };

/// Memo of class operators keyed by (outcomes, times). Concurrent readers,
/// single writer per insertion.
class ClassOperatorSet {
 public:
  explicit ClassOperatorSet(ClassMode mode) : mode_(mode) {}

  ClassMode mode() const { return mode_; }
  std::size_t size() const;

  Matrix get_or_compute(const std::vector<int>& outcomes, const std::vector<double>& times,
                        const MultiClassFamily& compute);

 private:
  using Key = std::pair<std::vector<int>, std::vector<double>>;
  ClassMode mode_;
  mutable std::shared_mutex mutex_;
  std::map<Key, Matrix> operators_;
};

}  // namespace qtp
