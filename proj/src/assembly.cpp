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

#include "qtp/assembly.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <thread>

namespace qtp {

namespace {

std::string ratio_message(const char* name, double value, double threshold) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "%s ratio %.3g > %.3g", name, value, threshold);
  return buf;
}

/// Runs body(k) for k in [0, count) on the configured workers. Each index
/// is handled by exactly one worker, so results written per index are
/// independent of the schedule.
template <class Body>
void parallel_for(std::size_t count, Body&& body) {
  const std::size_t workers = std::min<std::size_t>(worker_count(), std::max<std::size_t>(count, 1));
  if (workers <= 1) {
    for (std::size_t k = 0; k < count; ++k) body(k, 0);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t k = w; k < count; k += workers) body(k, w);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

std::vector<std::string> current_indices(const DetectorModel& det) {
  std::vector<std::string> out;
  for (const auto& [name, family] : det.currents) out.push_back(name);
  return out;
}

}  // namespace

unsigned worker_count() {
  if (const char* env = std::getenv("QTP_WORKERS")) {
    const int n = std::atoi(env);
    if (n >= 1) return static_cast<unsigned>(n);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<int> DetectorSetup::record_indices() const {
  if (!mus.empty()) return mus;
  std::vector<int> all(model.pointer_other.size());
  for (std::size_t k = 0; k < all.size(); ++k) all[k] = static_cast<int>(k);
  return all;
}

std::vector<DetectorCheck> validate_scenario(const Scenario& scenario, Warnings& warnings) {
  if (scenario.detectors.empty()) throw ValidationError("scenario", "at least one detector is required");
  if (!(scenario.T > 0.0)) throw ValidationError("scenario", "detection window T must be positive");
  scenario.field.validate();
  std::vector<DetectorCheck> checks;
  for (std::size_t i = 0; i < scenario.detectors.size(); ++i) {
    const DetectorSetup& setup = scenario.detectors[i];
    const DetectorModel& det = setup.model;
    const std::string who = "detector " + std::to_string(i) + ": ";
    det.validate();
    if (!(setup.sigma > 0.0)) throw ValidationError("smearing", who + "sigma must be positive");
    if (!std::isfinite(setup.coupling)) throw ValidationError("coupling", who + "coupling must be finite");
    if (setup.Q.empty() || setup.Q.size() != setup.Q_weights.size()) {
      throw ValidationError("grid", who + "pointer positions and weights must align");
    }
    for (int mu : setup.record_indices()) {
      if (mu < 0 || static_cast<std::size_t>(mu) >= det.pointer_other.size()) {
        throw ValidationError("grid", who + "record index out of range");
      }
    }
    for (const auto& [name, family] : det.currents) {
      if (!scenario.field.composites.count(name)) {
        throw ValidationError("indices", who + "current '" + name + "' has no matching field composite");
      }
    }
    SmearingConfig smear{setup.sigma, scenario.T, det.delta, scenario.time_rule, scenario.space_rule};
    smear.validate(warnings);

    DetectorCheck check;
    check.nonsimultaneity = nonsimultaneity_check(det.tube, setup.sigma);
    if (check.nonsimultaneity.extent_ratio > kNonsimultaneityThreshold) {
      throw ValidationError("nons1", who + ratio_message("nons1", check.nonsimultaneity.extent_ratio,
                                                         kNonsimultaneityThreshold));
    }
    if (check.nonsimultaneity.metric_ratio > kNonsimultaneityThreshold) {
      throw ValidationError("nons2", who + ratio_message("nons2", check.nonsimultaneity.metric_ratio,
                                                         kNonsimultaneityThreshold));
    }
    check.pointer = pointer_factorization_check(det);
    if (!check.pointer.pass) {
      throw ValidationError("pointer", who + ratio_message("pointer commutator", check.pointer.max_ratio,
                                                           kPointerThreshold));
    }
    // Sample proper times across the span any kernel will touch.
    double lo = 0.0, hi = scenario.T;
    if (!setup.taus.empty()) {
      lo = std::min(lo, *std::min_element(setup.taus.begin(), setup.taus.end()));
      hi = std::max(hi, *std::max_element(setup.taus.begin(), setup.taus.end()));
    }
    lo -= 0.5 * kWindowG * setup.sigma;
    hi += 0.5 * kWindowG * setup.sigma;
    std::vector<double> sample_taus;
    for (int k = 0; k <= 16; ++k) sample_taus.push_back(lo + (hi - lo) * k / 16.0);
    check.stationarity = stationarity_check(det, sample_taus);
    if (!check.stationarity.pass) {
      if (!det.tube.body().pointlike()) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "stationarity residual %.3g > %.3g and the body is extended",
                      check.stationarity.residual, kStationarityThreshold);
        throw ValidationError("jcu", who + buf);
      }
      check.general_kernel = true;
      warnings.add(who + "stationarity fails; using the general kernel");
    }
    checks.push_back(check);
  }
  return checks;
}

ClassFamily Composite::perturbative_family(std::size_t detector, int mu) const {
  return qtp::perturbative_family(h0, hi, splits.at(detector),
                                  events.povm_roots.at(detector).at(static_cast<std::size_t>(mu)));
}

Composite build_composite(const Scenario& scenario) {
  Warnings scratch;
  validate_scenario(scenario, scratch);
  Composite c;
  c.dims.push_back(scenario.field.dim());
  double total = static_cast<double>(scenario.field.dim());
  for (const auto& setup : scenario.detectors) {
    c.dims.push_back(setup.model.dim());
    total *= static_cast<double>(setup.model.dim());
  }
  if (total > static_cast<double>(dimension_cap())) {
    throw DimensionError("composite dimension " + std::to_string(static_cast<long long>(total)) +
                         " exceeds the cap");
  }
  const std::size_t slots = c.dims.size();
  c.h0 = lift(scenario.field.h_phi, 0, c.dims);
  for (std::size_t i = 0; i < scenario.detectors.size(); ++i) {
    c.h0 += lift(scenario.detectors[i].model.self_h, i + 1, c.dims);
  }
  const Index d = c.h0.rows();
  c.hi = Matrix::Zero(d, d);
  std::vector<Matrix> states{scenario.field.rho0};
  for (std::size_t i = 0; i < scenario.detectors.size(); ++i) {
    const DetectorSetup& setup = scenario.detectors[i];
    const DetectorModel& det = setup.model;
    const BodySet& body = det.tube.body();
    Matrix v = Matrix::Zero(d, d);
    if (setup.coupling != 0.0) {
      for (const auto& [name, family] : det.currents) {
        for (std::size_t b = 0; b < body.points.size(); ++b) {
          const FourVector x = det.tube.eval(0.0, body.points[b]);
          const SiteSnap snap = scenario.field.snap({x[1], x[2], x[3]});
          std::vector<Matrix> factors;
          for (std::size_t s = 0; s < slots; ++s) {
            if (s == 0) {
              factors.push_back(scenario.field.composite(name, snap.site));
            } else if (s == i + 1) {
              factors.push_back(family[b]);
            } else {
              factors.push_back(Matrix::Identity(c.dims[s], c.dims[s]));
            }
          }
          v += body.weights[b] * tensor_product(factors);
        }
      }
      v *= setup.coupling;
    }
    c.interaction_terms.push_back(v);
    c.hi += v;
    states.push_back(det.omega * det.omega.adjoint());

    c.splits.push_back(det.split.lifted(i + 1, c.dims));
    c.events.event_projectors.push_back(c.splits.back().P());
    std::vector<Matrix> roots;
    std::vector<std::string> labels;
    for (std::size_t mu = 0; mu < det.pointer_other.size(); ++mu) {
      roots.push_back(lift(psd_sqrt(det.pointer_other[mu]), i + 1, c.dims));
      labels.push_back(mu < det.mu_labels.size() ? det.mu_labels[mu] : "mu" + std::to_string(mu));
    }
    c.events.povm_roots.push_back(std::move(roots));
    c.events.labels.push_back(std::move(labels));
  }
  c.rho0 = tensor_product(states);
  return c;
}

KernelBuilder::KernelBuilder(const DetectorSetup& setup, const DetectorCheck& check, const Scenario& scenario,
                             std::size_t detector_index)
    : setup_(&setup), detector_(detector_index), general_(check.general_kernel) {
  const DetectorModel& det = setup.model;
  indices_ = current_indices(det);
  evo_ = Evolution(det.self_h);
  const Vector state = general_ ? det.omega : check.stationarity.omega_prime;
  omega_eig_ = evo_.vectors().adjoint() * state;
  for (const Matrix& f : det.pointer_other) roots_eig_.push_back(evo_.to_eigenbasis(psd_sqrt(f)));
  const double window = kWindowG * setup.sigma;
  s_nodes_ = make_nodes(scenario.time_rule, -window, window);
  delta_ = det.delta;
  const BodySet& body = det.tube.body();
  const auto active = body.active_axes();
  for (std::size_t a = 0; a < 3; ++a) {
    if (body.pointlike() || !active[a]) {
      r_nodes_.push_back(Nodes{{0.0}, {1.0}});
      continue;
    }
    double half = 0.0;
    for (const auto& p : body.points) half = std::max(half, std::abs(p[a]));
    const double reach = std::min(kWindowW * delta_, 2.0 * half);
    r_nodes_.push_back(make_nodes(scenario.space_rule, -reach, reach));
  }
}

Complex KernelBuilder::matrix_element(std::size_t b, std::size_t a, double s, double tau, const Point3& q_forward,
                                      const Point3& q_backward, int mu) const {
  const DetectorModel& det = setup_->model;
  const Matrix ja = evo_.to_eigenbasis(det.current_at(indices_[a], q_forward));
  const Matrix jb = evo_.to_eigenbasis(det.current_at(indices_[b], q_backward));
  const Matrix& root = roots_eig_.at(static_cast<std::size_t>(mu));
  const RealVector& e = evo_.energies();
  Vector fwd = omega_eig_;
  Vector bwd = omega_eig_;
  if (general_) {
    for (Index k = 0; k < fwd.size(); ++k) {
      fwd(k) *= std::polar(1.0, -e(k) * (tau + 0.5 * s));
      bwd(k) *= std::polar(1.0, -e(k) * (tau - 0.5 * s));
    }
  }
  const Vector va = root * (ja * fwd);
  const Vector vb = root * (jb * bwd);
  Complex m = 0.0;
  for (Index k = 0; k < va.size(); ++k) m += std::conj(vb(k)) * std::polar(1.0, e(k) * s) * va(k);
  return m;
}

KernelGrid KernelBuilder::grid(double tau, const Point3& Q, int mu) const {
  const DetectorModel& det = setup_->model;
  const bool pointlike = det.tube.body().pointlike();
  KernelGrid g;
  g.detector = detector_;
  g.tau = tau;
  g.Q = Q;
  g.mu = mu;
  const std::size_t n_idx = indices_.size();
  for (std::size_t i0 = 0; i0 < r_nodes_[0].size(); ++i0) {
    for (std::size_t i1 = 0; i1 < r_nodes_[1].size(); ++i1) {
      for (std::size_t i2 = 0; i2 < r_nodes_[2].size(); ++i2) {
        const Point3 r{r_nodes_[0].x[i0], r_nodes_[1].x[i1], r_nodes_[2].x[i2]};
        double w_r = r_nodes_[0].w[i0] * r_nodes_[1].w[i1] * r_nodes_[2].w[i2];
        if (!pointlike) w_r *= w_delta(r, delta_);
        const Point3 qf{Q[0] + 0.5 * r[0], Q[1] + 0.5 * r[1], Q[2] + 0.5 * r[2]};
        const Point3 qb{Q[0] - 0.5 * r[0], Q[1] - 0.5 * r[1], Q[2] - 0.5 * r[2]};
        for (std::size_t k = 0; k < s_nodes_.size(); ++k) {
          const double s = s_nodes_.x[k];
          const double w = s_nodes_.w[k] * g_sigma(s, setup_->sigma) * w_r;
          if (w == 0.0) continue;
          const FourVector xf = det.tube.eval(tau + 0.5 * s, qf);
          const FourVector xb = det.tube.eval(tau - 0.5 * s, qb);
          for (std::size_t a = 0; a < n_idx; ++a) {
            for (std::size_t b = 0; b < n_idx; ++b) {
              const Complex m = matrix_element(b, a, s, tau, qf, qb, mu);
              if (m == Complex(0.0)) continue;
              g.samples.push_back({a, b, w * m, xf, xb});
            }
          }
        }
      }
    }
  }
  return g;
}

KernelGrid detector_kernel(const Scenario& scenario, std::size_t detector, double tau, const Point3& Q, int mu) {
  Warnings w;
  const auto checks = validate_scenario(scenario, w);
  KernelBuilder builder(scenario.detectors.at(detector), checks.at(detector), scenario, detector);
  return builder.grid(tau, Q, mu);
}

Assembler::Assembler(const Scenario& scenario)
    : scenario_(&scenario), checks_(validate_scenario(scenario, warnings_)), engine_(scenario.field) {
  for (std::size_t i = 0; i < scenario.detectors.size(); ++i) {
    builders_.emplace_back(scenario.detectors[i], checks_[i], scenario, i);
  }
}

double Assembler::probability(const std::vector<EventOutcome>& outcomes, Warnings* warnings) const {
  std::vector<std::size_t> all(builders_.size());
  for (std::size_t k = 0; k < all.size(); ++k) all[k] = k;
  return probability(all, outcomes, warnings);
}

double Assembler::probability(const std::vector<std::size_t>& detectors, const std::vector<EventOutcome>& outcomes,
                              Warnings* warnings) const {
  if (detectors.empty() || detectors.size() != outcomes.size()) {
    throw DomainError("assemble_probability: one outcome per listed detector");
  }
  double prefactor = 1.0;
  for (std::size_t d : detectors) {
    const double g = scenario_->detectors.at(d).coupling;
    prefactor *= g * g;
  }
  if (prefactor == 0.0) return 0.0;

  const std::size_t n = detectors.size();
  struct Prepared {
    std::vector<Complex> weight;
    std::vector<Matrix> fwd, bwd;
    std::vector<double> tf, tb;
  };
  std::vector<Prepared> events(n);
  for (std::size_t i = 0; i < n; ++i) {
    const KernelBuilder& kb = builders_.at(detectors[i]);
    const DetectorModel& det = scenario_->detectors[detectors[i]].model;
    const KernelGrid grid = kb.grid(outcomes[i].tau, outcomes[i].Q, outcomes[i].mu);
    Prepared& p = events[i];
    for (const KernelSample& smp : grid.samples) {
      for (const FourVector* x : {&smp.forward, &smp.backward}) {
        const SiteSnap snap = scenario_->field.snap({(*x)[1], (*x)[2], (*x)[3]});
        if (snap.distance > 0.5 * det.delta + 1e-12) {
          char buf[160];
          std::snprintf(buf, sizeof buf, "detector %zu: snap distance %.3g exceeds half the pointer width %.3g",
                        detectors[i], snap.distance, 0.5 * det.delta);
          throw ValidationError("snap", buf);
        }
      }
      p.weight.push_back(smp.weight);
      p.fwd.push_back(engine_.heisenberg_eigenbasis(kb.indices()[smp.a], smp.forward));
      p.bwd.push_back(engine_.heisenberg_eigenbasis(kb.indices()[smp.b], smp.backward));
      p.tf.push_back(smp.forward[0]);
      p.tb.push_back(smp.backward[0]);
    }
    if (p.weight.empty()) return 0.0;
  }

  Complex total = 0.0;
  double magnitude = 0.0;
  if (n == 1) {
    const Prepared& p = events[0];
    for (std::size_t k = 0; k < p.weight.size(); ++k) {
      const Complex term = p.weight[k] * engine_.ctp_eigen({p.fwd[k]}, {p.tf[k]}, {p.bwd[k]}, {p.tb[k]});
      total += term;
      magnitude += std::abs(term);
    }
  } else {
    std::vector<std::size_t> idx(n, 0);
    std::vector<Matrix> fo(n), bo(n);
    std::vector<double> ft(n), bt(n);
    while (true) {
      Complex w = 1.0;
      for (std::size_t i = 0; i < n; ++i) {
        const Prepared& p = events[i];
        w *= p.weight[idx[i]];
        fo[i] = p.fwd[idx[i]];
        bo[i] = p.bwd[idx[i]];
        ft[i] = p.tf[idx[i]];
        bt[i] = p.tb[idx[i]];
      }
      const Complex term = w * engine_.ctp_eigen(fo, ft, bo, bt);
      total += term;
      magnitude += std::abs(term);
      std::size_t i = n;
      bool done = false;
      while (true) {
        if (i == 0) {
          done = true;
          break;
        }
        --i;
        if (++idx[i] < events[i].weight.size()) break;
        idx[i] = 0;
      }
      if (done) break;
    }
  }
  if (std::abs(total.imag()) > kResidueTolerance * std::max(magnitude, 1e-300)) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "assembly: imaginary residue %.3g relative to %.3g (ordering bug?)",
                  total.imag(), magnitude);
    throw Error(buf);
  }
  if (total.real() < -1e-8 * magnitude && warnings) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "assembled density %.3g is negative beyond tolerance", total.real());
    warnings->add(buf);
  }
  return prefactor * total.real();
}

std::vector<double> Assembler::density_grid(std::size_t detector, Warnings* warnings) const {
  const DetectorSetup& setup = scenario_->detectors.at(detector);
  const std::vector<int> mus = setup.record_indices();
  const std::size_t nq = setup.Q.size();
  const std::size_t nm = mus.size();
  const std::size_t count = setup.taus.size() * nq * nm;
  std::vector<double> out(count, 0.0);
  const std::size_t workers = std::min<std::size_t>(worker_count(), std::max<std::size_t>(count, 1));
  std::vector<Warnings> local(std::max<std::size_t>(workers, 1));
  parallel_for(count, [&](std::size_t k, std::size_t w) {
    const std::size_t t = k / (nq * nm);
    const std::size_t q = (k / nm) % nq;
    const std::size_t m = k % nm;
    out[k] = probability({detector}, {EventOutcome{setup.taus[t], setup.Q[q], mus[m]}}, &local[w]);
  });
  if (warnings) {
    for (const auto& l : local) warnings->merge(l);
  }
  return out;
}

double Assembler::subset_total(const std::vector<std::size_t>& subset, Warnings* warnings) const {
  // Tensor grid over (tau, Q, mu) for each listed detector.
  struct Axis {
    std::vector<EventOutcome> outcomes;
    std::vector<double> weights;
  };
  std::vector<Axis> axes;
  const Nodes taus = make_nodes(scenario_->window_rule, 0.0, scenario_->T);
  for (std::size_t d : subset) {
    const DetectorSetup& setup = scenario_->detectors.at(d);
    Axis axis;
    for (std::size_t t = 0; t < taus.size(); ++t) {
      for (std::size_t q = 0; q < setup.Q.size(); ++q) {
        for (int mu : setup.record_indices()) {
          axis.outcomes.push_back({taus.x[t], setup.Q[q], mu});
          axis.weights.push_back(taus.w[t] * setup.Q_weights[q]);
        }
      }
    }
    axes.push_back(std::move(axis));
  }
  std::size_t count = 1;
  for (const auto& a : axes) count *= a.outcomes.size();
  std::vector<double> terms(count, 0.0);
  const std::size_t workers = std::min<std::size_t>(worker_count(), std::max<std::size_t>(count, 1));
  std::vector<Warnings> local(std::max<std::size_t>(workers, 1));
  parallel_for(count, [&](std::size_t k, std::size_t w) {
    std::vector<EventOutcome> outcomes(axes.size());
    double weight = 1.0;
    std::size_t rest = k;
    for (std::size_t i = axes.size(); i-- > 0;) {
      const std::size_t j = rest % axes[i].outcomes.size();
      rest /= axes[i].outcomes.size();
      outcomes[i] = axes[i].outcomes[j];
      weight *= axes[i].weights[j];
    }
    terms[k] = weight * probability(subset, outcomes, &local[w]);
  });
  if (warnings) {
    for (const auto& l : local) warnings->merge(l);
  }
  double sum = 0.0;
  for (double t : terms) sum += t;
  return sum;
}

double Assembler::no_detection(std::size_t max_order, Warnings* warnings) const {
  const std::size_t n = builders_.size();
  if (n >= 8 * sizeof(unsigned long)) throw DomainError("no_detection: too many detectors");
  double value = 1.0;
  for (unsigned long mask = 1; mask < (1ul << n); ++mask) {
    std::vector<std::size_t> subset;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask & (1ul << i)) subset.push_back(i);
    }
    if (subset.size() > max_order) continue;
    const double sign = subset.size() % 2 == 1 ? -1.0 : 1.0;
    value += sign * subset_total(subset, warnings);
  }
  if (value < 0.0 && warnings) warnings->add("no-detection probability is negative");
  return value;
}

double assemble_probability(const Scenario& scenario, const std::vector<EventOutcome>& outcomes, Warnings* warnings) {
  Assembler assembler(scenario);
  if (warnings) warnings->merge(assembler.warnings());
  return assembler.probability(outcomes, warnings);
}

double assemble_no_detection(const Scenario& scenario, Warnings* warnings) {
  Assembler assembler(scenario);
  if (warnings) warnings->merge(assembler.warnings());
  return assembler.no_detection(1, warnings);
}

WorldTube boost_embedding(const WorldTube& tube, const Lorentz& lambda, const FourVector& shift) {
  return tube.boosted(lambda, shift);
}

}  // namespace qtp
