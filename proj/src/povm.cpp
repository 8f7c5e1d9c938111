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

#include "qtp/povm.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

namespace qtp {

void require_state(const Matrix& rho, const char* what) {
  require_hermitian(rho, what, 1e-10);
  const Complex tr = rho.trace();
  if (std::abs(tr - Complex(1.0)) > 1e-10) {
    throw DomainError(std::string(what) + ": state does not have unit trace");
  }
  if (min_eigenvalue(rho) < -1e-10) throw DomainError(std::string(what) + ": state is not positive");
}

double real_part_checked(Complex z, const char* what, double tol) {
  if (std::abs(z.imag()) > tol * std::max(1.0, std::abs(z))) {
    std::ostringstream msg;
    msg << what << ": imaginary residue " << z.imag() << " exceeds tolerance";
    throw DomainError(msg.str());
  }
  return z.real();
}

Matrix integrated_class(const ClassFamily& c, Interval interval, const QuadratureRule& rule) {
  return integrate([&](double t) { return c(t); }, rule, interval.lo, interval.hi);
}

double interval_probability(const ClassFamily& c, const Matrix& rho0, Interval interval,
                            const QuadratureRule& rule) {
  require_state(rho0, "interval_probability");
  if (interval.hi < interval.lo) throw DomainError("interval_probability: reversed interval");
  if (interval.hi == interval.lo) return 0.0;
  const Matrix b = integrated_class(c, interval, rule);
  return real_part_checked((b * rho0 * b.adjoint()).trace(), "interval_probability");
}

ConsistencyReport consistency_offdiagonal(const ClassFamily& c, const Matrix& rho0, Interval first,
                                          Interval second, const QuadratureRule& rule) {
  require_state(rho0, "consistency_offdiagonal");
  const bool disjoint = first.hi <= second.lo || second.hi <= first.lo;
  if (!disjoint) throw DomainError("consistency_offdiagonal: intervals overlap");
  const Matrix b1 = integrated_class(c, first, rule);
  const Matrix b2 = integrated_class(c, second, rule);
  const Matrix both = b1 + b2;
  ConsistencyReport report;
  report.offdiagonal = (b1 * rho0 * b2.adjoint()).trace();
  report.p_first = real_part_checked((b1 * rho0 * b1.adjoint()).trace(), "consistency_offdiagonal");
  report.p_second = real_part_checked((b2 * rho0 * b2.adjoint()).trace(), "consistency_offdiagonal");
  report.p_union = real_part_checked((both * rho0 * both.adjoint()).trace(), "consistency_offdiagonal");
  report.additivity_defect = report.p_union - report.p_first - report.p_second;
  report.residual = std::abs(report.additivity_defect - 2.0 * report.offdiagonal.real());
  const double scale = std::max({1.0, std::abs(report.p_union), std::abs(report.additivity_defect)});
  if (report.residual > 1e-10 * scale) {
    throw DomainError("consistency_offdiagonal: additivity defect does not match the interference term");
  }
  return report;
}

PovmElement make_element(Matrix op, PovmKind kind) {
  PovmElement e;
  const Matrix sym = 0.5 * (op + op.adjoint());
  e.op = std::move(op);
  e.kind = kind;
  Eigen::SelfAdjointEigenSolver<Matrix> solver(sym, Eigen::EigenvaluesOnly);
  e.min_eigenvalue = solver.eigenvalues().minCoeff();
  e.max_eigenvalue = solver.eigenvalues().maxCoeff();
  const double scale = std::max(std::abs(e.max_eigenvalue), std::abs(e.min_eigenvalue));
  e.positive = e.min_eigenvalue >= -1e-8 * scale;
  return e;
}

Matrix smeared_amplitude(const ClassFamily& c, double t, double sigma, const QuadratureRule& rule) {
  if (!(sigma > 0.0)) throw DomainError("smeared_amplitude: sigma must be positive");
  const double w = kWindowSqrtF * sigma;
  return integrate([&](double s) -> Matrix { return sqrt_f_sigma(s - t, sigma) * c(s); }, rule, t - w, t + w);
}

PovmElement povm_density(const ClassFamily& c, double t, double sigma, const QuadratureRule& rule) {
  const Matrix b = smeared_amplitude(c, t, sigma, rule);
  return make_element(b.adjoint() * b, PovmKind::detection);
}

double smeared_probability(const ClassFamily& c, const Matrix& rho0, double t, double sigma,
                           const QuadratureRule& rule) {
  const Matrix b = smeared_amplitude(c, t, sigma, rule);
  return real_part_checked((b * rho0 * b.adjoint()).trace(), "smeared_probability");
}

namespace {

Complex bilinear(const Matrix& a, const Matrix& rho, const Matrix& b) {
  // Tr(a rho b^dagger) without forming the full product.
  const Matrix ar = a * rho;
  return (ar.array() * b.conjugate().array()).sum();
}

}  // namespace

double prob_density(const ClassFamily& c, const Matrix& rho0, double t, double sigma,
                    const QuadratureRule& rule, Warnings* warnings) {
  if (!(sigma > 0.0)) throw DomainError("prob_density: sigma must be positive");
  (void)warnings;
  const double w = kWindowG * sigma;
  const Complex z = integrate(
      [&](double tau) { return g_sigma(tau, sigma) * bilinear(c(t + 0.5 * tau), rho0, c(t - 0.5 * tau)); },
      rule, -w, w);
  return real_part_checked(z, "prob_density");
}

double prob_density_large_sigma(const ClassFamily& c, const Matrix& rho0, double t, double window,
                                const QuadratureRule& rule, Warnings* warnings) {
  if (!(window > 0.0)) throw DomainError("prob_density_large_sigma: window must be positive");
  double edge = 0.0;
  double peak = 0.0;
  const Nodes nodes = make_nodes(rule, -window, window);
  Complex total = 0.0;
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    const double tau = nodes.x[k];
    const Complex v = bilinear(c(t + 0.5 * tau), rho0, c(t - 0.5 * tau));
    require_finite(v, "prob_density_large_sigma");
    total += nodes.w[k] * v;
    peak = std::max(peak, std::abs(v));
    if (k == 0 || k + 1 == nodes.size()) edge = std::max(edge, std::abs(v));
  }
  if (warnings && peak > 0.0 && edge / peak > 1e-3) {
    std::ostringstream msg;
    msg << "large-sigma density at t=" << t << ": integrand at window edge is " << edge / peak
        << " of its peak; window may be insufficient";
    warnings->add(msg.str());
  }
  return real_part_checked(total, "prob_density_large_sigma");
}

PovmElement no_detection_operator(const std::vector<ClassFamily>& family, double T, double sigma,
                                  const QuadratureRule& time_rule, const QuadratureRule& smear_rule) {
  if (family.empty()) throw DomainError("no_detection_operator: empty family");
  const Nodes nodes = make_nodes(time_rule, 0.0, T);
  const Matrix probe = family.front()(0.0);
  Matrix sum = Matrix::Zero(probe.rows(), probe.cols());
  for (const auto& c : family) {
    for (std::size_t k = 0; k < nodes.size(); ++k) {
      const Matrix b = smeared_amplitude(c, nodes.x[k], sigma, smear_rule);
      sum += nodes.w[k] * (b.adjoint() * b);
    }
  }
  return make_element(Matrix::Identity(sum.rows(), sum.cols()) - sum, PovmKind::no_detection);
}

double prob_density_n(const MultiClassFamily& d, const Matrix& rho0, const std::vector<int>& outcomes,
                      const std::vector<double>& times, const std::vector<double>& sigmas,
                      const QuadratureRule& rule, double window, Warnings* warnings) {
  const std::size_t n = times.size();
  if (outcomes.size() != n || sigmas.size() != n || n == 0) {
    throw DomainError("prob_density_n: outcome, time and sigma counts must agree");
  }
  std::vector<QuadratureRule> rules(n, rule);
  std::vector<double> lo(n);
  std::vector<double> hi(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double w = sigmas[i] > 0.0 ? kWindowG * sigmas[i] : window;
    if (!(w > 0.0)) throw DomainError("prob_density_n: large-sigma variant needs a positive window");
    lo[i] = -w;
    hi[i] = w;
  }
  std::vector<double> plus(n);
  std::vector<double> minus(n);
  double peak = 0.0;
  double edge = 0.0;
  const Complex z = integrate_box(
      [&](const std::vector<double>& tau) -> Complex {
        double weight = 1.0;
        bool on_edge = false;
        for (std::size_t i = 0; i < n; ++i) {
          plus[i] = times[i] + 0.5 * tau[i];
          minus[i] = times[i] - 0.5 * tau[i];
          if (sigmas[i] > 0.0) {
            weight *= g_sigma(tau[i], sigmas[i]);
          } else if (std::abs(std::abs(tau[i]) - window) < 0.02 * window) {
            on_edge = true;
          }
        }
        const Complex v = bilinear(d(outcomes, plus), rho0, d(outcomes, minus));
        peak = std::max(peak, std::abs(v));
        if (on_edge) edge = std::max(edge, std::abs(v));
        return weight * v;
      },
      rules, lo, hi);
  if (warnings && peak > 0.0 && edge / peak > 1e-3) {
    warnings->add("prob_density_n: large-sigma integrand has not decayed at the window edge");
  }
  return real_part_checked(z, "prob_density_n");
}

namespace {

// Mixed-radix enumeration of (outcome, time node) tuples over a subset of
// events, in event order. Digit for event e is outcome * N + node.
struct TupleSpace {
  std::vector<std::size_t> events;
  std::vector<std::size_t> radix;
  std::size_t size = 1;

  TupleSpace(std::vector<std::size_t> ev, const PerturbativeHistories& h, std::size_t nodes)
      : events(std::move(ev)) {
    for (std::size_t e : events) {
      radix.push_back(h.events().outcome_count(e) * nodes);
      size *= radix.back();
    }
  }

  std::vector<std::size_t> digits(std::size_t flat) const {
    std::vector<std::size_t> out(events.size());
    for (std::size_t k = events.size(); k-- > 0;) {
      out[k] = flat % radix[k];
      flat /= radix[k];
    }
    return out;
  }
};

std::vector<std::size_t> mask_events(unsigned mask, std::size_t n) {
  std::vector<std::size_t> out;
  for (std::size_t e = 0; e < n; ++e) {
    if (mask & (1u << e)) out.push_back(e);
  }
  return out;
}

}  // namespace

PovmFamily povm_n_family(const PerturbativeHistories& histories, const std::vector<double>& sigmas,
                         double T, const QuadratureRule& time_rule, const QuadratureRule& smear_rule) {
  const std::size_t n = histories.events().size();
  if (sigmas.size() != n) throw DomainError("povm_n_family: one sigma per event is required");
  if (n > 8) throw DomainError("povm_n_family: too many events");
  for (double s : sigmas) {
    if (!(s > 0.0)) throw DomainError("povm_n_family: sigma must be positive");
  }
  const Index d = histories.dim();
  const Nodes tnodes = make_nodes(time_rule, 0.0, T);
  const std::size_t N = tnodes.size();
  const double wmax = kWindowSqrtF * *std::max_element(sigmas.begin(), sigmas.end());
  const Nodes snodes = make_nodes(smear_rule, -wmax, T + wmax);
  const std::size_t M = snodes.size();

  // A_i(lambda, s_j) in the eigenbasis of H0 on the shared s grid.
  std::vector<std::vector<std::vector<Matrix>>> ops(n);
  for (std::size_t e = 0; e < n; ++e) {
    ops[e].resize(histories.events().outcome_count(e));
    for (std::size_t l = 0; l < ops[e].size(); ++l) {
      ops[e][l].reserve(M);
      for (std::size_t j = 0; j < M; ++j) {
        ops[e][l].push_back(histories.event_op_eigenbasis(e, static_cast<int>(l), snodes.x[j]));
      }
    }
  }
  // Amplitude weights w_j sqrt(f(s_j - t_k)), zero outside each event's window.
  std::vector<std::vector<std::vector<double>>> amp(n, std::vector<std::vector<double>>(N, std::vector<double>(M, 0.0)));
  for (std::size_t e = 0; e < n; ++e) {
    const double we = kWindowSqrtF * sigmas[e];
    for (std::size_t k = 0; k < N; ++k) {
      for (std::size_t j = 0; j < M; ++j) {
        const double u = snodes.x[j] - tnodes.x[k];
        if (std::abs(u) <= we) amp[e][k][j] = snodes.w[j] * sqrt_f_sigma(u, sigmas[e]);
      }
    }
  }

  auto amplitude = [&](const TupleSpace& space, const std::vector<std::size_t>& dig) -> Matrix {
    const std::size_t m = space.events.size();
    std::vector<std::size_t> outcome(m);
    std::vector<std::size_t> node(m);
    for (std::size_t k = 0; k < m; ++k) {
      outcome[k] = dig[k] / N;
      node[k] = dig[k] % N;
    }
    if (m == 1) {
      const auto& a = amp[space.events[0]][node[0]];
      const auto& A = ops[space.events[0]][outcome[0]];
      Matrix b = Matrix::Zero(d, d);
      for (std::size_t j = 0; j < M; ++j) {
        if (a[j] != 0.0) b += a[j] * A[j];
      }
      return b;
    }
    if (m == 2) {
      const auto& a1 = amp[space.events[0]][node[0]];
      const auto& a2 = amp[space.events[1]][node[1]];
      const auto& A1 = ops[space.events[0]][outcome[0]];
      const auto& A2 = ops[space.events[1]][outcome[1]];
      Matrix b = Matrix::Zero(d, d);
      Matrix prefix1 = Matrix::Zero(d, d);  // sum_{j<k} a1_j A1_j
      Matrix prefix2 = Matrix::Zero(d, d);  // sum_{k<j} a2_k A2_k
      for (std::size_t j = 0; j < M; ++j) {
        if (a2[j] != 0.0) b += a2[j] * (A2[j] * (prefix1 + 0.5 * a1[j] * A1[j]));
        if (a1[j] != 0.0) b += a1[j] * (A1[j] * (prefix2 + 0.5 * a2[j] * A2[j]));
        if (a1[j] != 0.0) prefix1 += a1[j] * A1[j];
        if (a2[j] != 0.0) prefix2 += a2[j] * A2[j];
      }
      return b;
    }
    // General case: direct sum over all in-window node tuples.
    Matrix b = Matrix::Zero(d, d);
    std::vector<std::size_t> idx(m, 0);
    std::vector<Matrix> factors(m);
    std::vector<double> times(m);
    while (true) {
      double w = 1.0;
      for (std::size_t k = 0; k < m && w != 0.0; ++k) w *= amp[space.events[k]][node[k]][idx[k]];
      if (w != 0.0) {
        for (std::size_t k = 0; k < m; ++k) {
          factors[k] = ops[space.events[k]][outcome[k]][idx[k]];
          times[k] = snodes.x[idx[k]];
        }
        b += w * time_ordered_product(factors, times);
      }
      std::size_t k = m;
      while (k > 0) {
        --k;
        if (++idx[k] < M) break;
        idx[k] = 0;
        if (k == 0) return b;
      }
    }
  };

  // Accumulators E(S) for every subset S, indexed by the subset's tuples.
  const unsigned full = (1u << n) - 1;
  std::vector<TupleSpace> spaces;
  std::vector<std::vector<Matrix>> acc(full + 1);
  for (unsigned mask = 0; mask <= full; ++mask) {
    spaces.emplace_back(mask_events(mask, n), histories, N);
    acc[mask].assign(spaces[mask].size, Matrix::Zero(d, d));
  }
  acc[0][0] = Matrix::Identity(d, d);  // the detection operator of the empty set is 1

  for (unsigned tmask = 1; tmask <= full; ++tmask) {
    const TupleSpace& tspace = spaces[tmask];
    for (std::size_t flat = 0; flat < tspace.size; ++flat) {
      const auto dig = tspace.digits(flat);
      const Matrix b = amplitude(tspace, dig);
      const Matrix pi = b.adjoint() * b;
      // Distribute into every subset S of T with sign (-1)^{|T\S|} and the
      // time weights of the summed-out events.
      for (unsigned smask = tmask;; smask = (smask - 1) & tmask) {
        double w = 1.0;
        int removed = 0;
        std::size_t sflat = 0;
        std::size_t spos = 0;
        for (std::size_t k = 0; k < tspace.events.size(); ++k) {
          const std::size_t e = tspace.events[k];
          if (smask & (1u << e)) {
            sflat = sflat * spaces[smask].radix[spos] + dig[k];
            ++spos;
          } else {
            w *= tnodes.w[dig[k] % N];
            ++removed;
          }
        }
        acc[smask][sflat] += ((removed % 2) ? -w : w) * pi;
        if (smask == 0) break;
      }
    }
  }

  PovmFamily family;
  Matrix total = Matrix::Zero(d, d);
  const Evolution& free = histories.free();
  family.min_detection_eigenvalue = 0.0;
  bool first_detection = true;
  for (unsigned mask = 0; mask <= full; ++mask) {
    const TupleSpace& space = spaces[mask];
    for (std::size_t flat = 0; flat < space.size; ++flat) {
      const auto dig = space.digits(flat);
      FamilyMember member;
      member.occurred.assign(n, false);
      for (std::size_t k = 0; k < space.events.size(); ++k) {
        member.occurred[space.events[k]] = true;
        member.outcomes.push_back(static_cast<int>(dig[k] / N));
        member.times.push_back(tnodes.x[dig[k] % N]);
        member.weight *= tnodes.w[dig[k] % N];
      }
      total += member.weight * acc[mask][flat];
      const PovmKind kind = mask == full ? PovmKind::detection
                            : mask == 0  ? PovmKind::no_detection
                                         : PovmKind::partial_no_detection;
      member.element = make_element(free.from_eigenbasis(acc[mask][flat]), kind);
      if (kind == PovmKind::detection) {
        family.all_detection_positive = family.all_detection_positive && member.element.positive;
        family.min_detection_eigenvalue = first_detection
                                              ? member.element.min_eigenvalue
                                              : std::min(family.min_detection_eigenvalue, member.element.min_eigenvalue);
        first_detection = false;
      }
      if (kind == PovmKind::no_detection) family.terminal_min_eigenvalue = member.element.min_eigenvalue;
      family.members.push_back(std::move(member));
    }
  }
  family.completeness_residual = max_abs(total - Matrix::Identity(d, d));
  return family;
}

Matrix detection_history(const Matrix& h, const SubspaceSplit& split, double T, const QuadratureRule& rule) {
  const ClassFamily c = exact_family(h, split, split.P());
  const Matrix integral = integrated_class(c, Interval{0.0, T}, rule);
  return Complex(0.0, -1.0) * mat_exp(h, Complex(0.0, -T)) * integral;
}

ZenoReport zeno_diagnostic(const Matrix& c_plus, const Matrix& s_t, const Matrix& rho0,
                           const SubspaceSplit& split, bool check_balance) {
  require_state(rho0, "zeno_diagnostic");
  ZenoReport r;
  r.detected = real_part_checked((c_plus * rho0 * c_plus.adjoint()).trace(), "zeno_diagnostic");
  r.undetected = real_part_checked((s_t * rho0 * s_t.adjoint()).trace(), "zeno_diagnostic");
  const Complex cross = (c_plus * rho0 * s_t.adjoint()).trace();
  r.interference = 2.0 * cross.real();
  r.sum = r.detected + r.undetected + r.interference;
  r.target = real_part_checked((split.Q() * rho0).trace(), "zeno_diagnostic");
  r.normalized = std::abs(r.sum - r.target) <= 1e-10;
  r.detected_at_most_one = r.detected <= 1.0 + 1e-12;
  if (check_balance) {
    const double leak = max_abs(split.P() * rho0);
    if (leak > 1e-12) throw DomainError("zeno_diagnostic: initial state is not supported on H-");
    r.balance_checked = true;
    r.balance_lhs = r.detected;
    r.balance_rhs = -r.interference;
    r.balance_holds = std::abs(r.balance_lhs - r.balance_rhs) <= 1e-10 && std::abs(r.undetected - 1.0) <= 1e-10;
  }
  return r;
}

}  // namespace qtp
