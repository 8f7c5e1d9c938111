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

#include "qtp/field.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "qtp/histories.hpp"
#include "qtp/smearing.hpp"

namespace qtp {

namespace {

double periodic_distance(double a, double b, double length) {
  double d = std::abs(a - b);
  if (length > 0.0) {
    d = std::fmod(d, length);
    d = std::min(d, length - d);
  }
  return d;
}

double relative_commutator(const Matrix& a, const Matrix& b) {
  return max_abs(commutator(a, b)) / std::max(1.0, max_abs(b));
}

constexpr double kInvarianceTol = 1e-10;

}  // namespace

double FieldModel::spacing() const {
  if (sites.size() < 2) return length > 0.0 ? length : 0.0;
  if (length > 0.0) return length / static_cast<double>(sites.size());
  return sites[1] - sites[0];
}

SiteSnap FieldModel::snap(const Point3& x) const {
  SiteSnap best;
  best.distance = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < sites.size(); ++k) {
    const double d = periodic_distance(x[0], sites[k], length);
    if (d < best.distance) best = {k, d};
  }
  return best;
}

const Matrix& FieldModel::composite(const std::string& index, std::size_t site) const {
  auto it = composites.find(index);
  if (it == composites.end()) throw DomainError("field: unknown composite index '" + index + "'");
  return it->second.at(site);
}

void FieldModel::validate() const {
  require_square(h_phi, "field Hamiltonian");
  require_hermitian(h_phi, "field Hamiltonian");
  const Index d = dim();
  if (static_cast<std::size_t>(d) > dimension_cap()) {
    throw DimensionError("field dimension " + std::to_string(d) + " exceeds the cap");
  }
  if (sites.empty()) throw ValidationError("field", "no lattice sites");
  if (composites.empty()) throw ValidationError("field", "no composite operators");
  for (const auto& [name, family] : composites) {
    if (family.size() != sites.size()) {
      throw ValidationError("field", "composite '" + name + "' needs one operator per site");
    }
    for (const Matrix& y : family) {
      if (y.rows() != d || y.cols() != d) throw ValidationError("field", "composite '" + name + "' dimension mismatch");
      if (!is_hermitian(y, 1e-10)) throw ValidationError("field", "composite '" + name + "' is not hermitian");
    }
  }
  if (rho0.rows() != d || rho0.cols() != d) throw ValidationError("field", "initial state dimension mismatch");
  if (!is_hermitian(rho0, 1e-12)) throw ValidationError("field", "initial state is not hermitian");
  if (std::abs(rho0.trace() - Complex(1.0)) > 1e-12) throw ValidationError("field", "initial state trace is not 1");
  if (!is_positive(rho0)) throw ValidationError("field", "initial state is not positive");
  if (momentum.size() != 0) {
    if (momentum.rows() != d || momentum.cols() != d) throw ValidationError("field", "momentum dimension mismatch");
    require_hermitian(momentum, "field momentum");
  }
}

CorrelatorEngine::CorrelatorEngine(FieldModel model) : model_(std::move(model)) {
  model_.validate();
  evo_ = Evolution(model_.h_phi);
  rho_eig_ = evo_.to_eigenbasis(model_.rho0);
  populations_ = rho_eig_.diagonal();
  const double off = max_abs(rho_eig_ - Matrix(populations_.asDiagonal()));
  rho_diagonal_ = off == 0.0;
  time_defect_ = relative_commutator(model_.rho0, model_.h_phi);
  if (model_.momentum.size() != 0) space_defect_ = relative_commutator(model_.rho0, model_.momentum);
  for (const auto& [name, family] : model_.composites) {
    auto& out = eig_composites_[name];
    for (const Matrix& y : family) out.push_back(evo_.to_eigenbasis(y));
  }
}

const Matrix& CorrelatorEngine::eig_composite(const std::string& index, const Point3& x) const {
  auto it = eig_composites_.find(index);
  if (it == eig_composites_.end()) throw DomainError("field: unknown composite index '" + index + "'");
  const SiteSnap s = model_.snap(x);
  double seen = max_snap_->load(std::memory_order_relaxed);
  while (s.distance > seen && !max_snap_->compare_exchange_weak(seen, s.distance, std::memory_order_relaxed)) {
  }
  return it->second[s.site];
}

Matrix CorrelatorEngine::heisenberg_eigenbasis(const std::string& index, const FourVector& X) const {
  for (double c : X) require_finite(c, "spacetime point");
  return evo_.heisenberg_eigenbasis(eig_composite(index, {X[1], X[2], X[3]}), X[0]);
}

Matrix CorrelatorEngine::heisenberg_composite(const std::string& index, const FourVector& X) const {
  return evo_.from_eigenbasis(heisenberg_eigenbasis(index, X));
}

double CorrelatorEngine::max_snap_distance() const { return max_snap_->load(std::memory_order_relaxed); }

Complex CorrelatorEngine::ctp_correlator(const std::vector<CtpPoint>& forward,
                                         const std::vector<CtpPoint>& backward) const {
  if (forward.empty() || forward.size() != backward.size()) {
    throw DomainError("ctp_correlator: need n forward and n backward points, n >= 1");
  }
  if (forward.size() == 1 && rho_diagonal_) {
    const CtpPoint& a = forward[0];
    const CtpPoint& b = backward[0];
    for (double c : a.X) require_finite(c, "spacetime point");
    for (double c : b.X) require_finite(c, "spacetime point");
    const Matrix& ya = eig_composite(a.A, {a.X[1], a.X[2], a.X[3]});
    const Matrix& yb = eig_composite(b.A, {b.X[1], b.X[2], b.X[3]});
    const RealVector& e = evo_.energies();
    const double dt = a.X[0] - b.X[0];
    const Index d = ya.rows();
    Complex sum = 0.0;
    for (Index k = 0; k < d; ++k) {
      const double p = populations_(k).real();
      if (p == 0.0) continue;
      Complex inner = 0.0;
      for (Index j = 0; j < d; ++j) {
        inner += ya(j, k) * yb(k, j) * std::polar(1.0, (e(j) - e(k)) * dt);
      }
      sum += p * inner;
    }
    return sum;
  }
  std::vector<Matrix> f_ops, b_ops;
  std::vector<double> f_times, b_times;
  for (const CtpPoint& p : forward) {
    f_ops.push_back(heisenberg_eigenbasis(p.A, p.X));
    f_times.push_back(p.X[0]);
  }
  for (const CtpPoint& p : backward) {
    b_ops.push_back(heisenberg_eigenbasis(p.A, p.X));
    b_times.push_back(p.X[0]);
  }
  return ctp_eigen(f_ops, f_times, b_ops, b_times);
}

Complex CorrelatorEngine::ctp_eigen(const std::vector<Matrix>& forward, const std::vector<double>& forward_times,
                                    const std::vector<Matrix>& backward,
                                    const std::vector<double>& backward_times) const {
  std::vector<double> reversed(backward_times.size());
  for (std::size_t k = 0; k < reversed.size(); ++k) reversed[k] = -backward_times[k];
  const Matrix f = time_ordered_product(forward, forward_times);
  const Matrix b = time_ordered_product(backward, reversed);
  return (f.transpose().cwiseProduct(rho_eig_ * b)).sum();
}

std::vector<double> free_scalar_wavenumbers(int sites, double length) {
  if (sites < 1) throw DomainError("free_scalar_builder: at least one mode");
  if (!(length > 0.0)) throw DomainError("free_scalar_builder: length must be positive");
  const int lo = sites % 2 == 1 ? -(sites - 1) / 2 : -sites / 2 + 1;
  std::vector<double> k;
  for (int n = lo; n < lo + sites; ++n) k.push_back(2.0 * std::numbers::pi * n / length);
  return k;
}

FieldModel free_scalar_builder(int sites, int n_max, double mass, double length, const FockOptions& options) {
  if (n_max < 1) throw DomainError("free_scalar_builder: excitation cap must be >= 1");
  const std::vector<double> ks = free_scalar_wavenumbers(sites, length);
  double dim_d = std::pow(static_cast<double>(n_max + 1), sites);
  if (dim_d > static_cast<double>(dimension_cap())) {
    throw DimensionError("free_scalar_builder: dimension " + std::to_string(static_cast<long long>(dim_d)) +
                         " exceeds the cap");
  }
  std::vector<Index> dims(static_cast<std::size_t>(sites), n_max + 1);
  const Index d = static_cast<Index>(dim_d);
  Matrix lower = Matrix::Zero(n_max + 1, n_max + 1);
  for (int n = 1; n <= n_max; ++n) lower(n - 1, n) = std::sqrt(static_cast<double>(n));

  std::vector<Matrix> a;
  std::vector<double> omegas;
  for (std::size_t m = 0; m < ks.size(); ++m) {
    const double w = std::sqrt(mass * mass + ks[m] * ks[m]);
    if (!(w > 0.0)) throw DomainError("free_scalar_builder: zero-frequency mode; use a positive mass");
    omegas.push_back(w);
    a.push_back(lift(lower, m, dims));
  }

  FieldModel f;
  f.length = length;
  f.sites.clear();
  for (int j = 0; j < sites; ++j) f.sites.push_back(j * length / sites);
  f.h_phi = Matrix::Zero(d, d);
  f.momentum = Matrix::Zero(d, d);
  for (std::size_t m = 0; m < ks.size(); ++m) {
    const Matrix number = a[m].adjoint() * a[m];
    f.h_phi += omegas[m] * number;
    f.momentum += ks[m] * number;
  }
  auto& phi = f.composites["phi"];
  auto& pi = f.composites["pi"];
  for (double x : f.sites) {
    Matrix p = Matrix::Zero(d, d);
    Matrix q = Matrix::Zero(d, d);
    for (std::size_t m = 0; m < ks.size(); ++m) {
      const Complex phase = std::polar(1.0, ks[m] * x);
      const Matrix term = phase * a[m];
      p += (term + term.adjoint()) / std::sqrt(2.0 * omegas[m] * length);
      q += Complex(0.0, -1.0) * std::sqrt(omegas[m] / (2.0 * length)) * (term - term.adjoint());
    }
    phi.push_back(p);
    pi.push_back(q);
  }
  Index state = 0;
  if (!options.occupations.empty()) {
    if (options.occupations.size() != ks.size()) throw DomainError("free_scalar_builder: one occupation per mode");
    for (int n : options.occupations) {
      if (n < 0 || n > n_max) throw DomainError("free_scalar_builder: occupation outside the truncation");
      state = state * (n_max + 1) + n;
    }
  }
  f.rho0 = Matrix::Zero(d, d);
  f.rho0(state, state) = 1.0;
  return f;
}

FieldModel product_field(const FieldModel& a, const std::string& suffix_a, const FieldModel& b,
                         const std::string& suffix_b) {
  if (a.sites != b.sites || a.length != b.length) {
    throw DomainError("product_field: sectors must share one lattice");
  }
  const Index da = a.dim();
  const Index db = b.dim();
  if (static_cast<double>(da) * static_cast<double>(db) > static_cast<double>(dimension_cap())) {
    throw DimensionError("product_field: dimension exceeds the cap");
  }
  const Matrix ia = Matrix::Identity(da, da);
  const Matrix ib = Matrix::Identity(db, db);
  FieldModel f;
  f.sites = a.sites;
  f.length = a.length;
  f.h_phi = tensor_product(a.h_phi, ib) + tensor_product(ia, b.h_phi);
  f.rho0 = tensor_product(a.rho0, b.rho0);
  if (a.momentum.size() != 0 && b.momentum.size() != 0) {
    f.momentum = tensor_product(a.momentum, ib) + tensor_product(ia, b.momentum);
  }
  for (const auto& [name, family] : a.composites) {
    auto& out = f.composites[name + suffix_a];
    for (const Matrix& y : family) out.push_back(tensor_product(y, ib));
  }
  for (const auto& [name, family] : b.composites) {
    const std::string key = name + suffix_b;
    if (f.composites.count(key)) throw DomainError("product_field: composite name clash '" + key + "'");
    auto& out = f.composites[key];
    for (const Matrix& y : family) out.push_back(tensor_product(ia, y));
  }
  return f;
}

TranslationReport translation_covariance_check(const CorrelatorEngine& engine, const FourVector& shift,
                                               const std::vector<CtpPoint>& forward,
                                               const std::vector<CtpPoint>& backward, double tol) {
  TranslationReport r;
  const FieldModel& m = engine.model();
  if (shift[0] != 0.0 && engine.rho_time_defect() > kInvarianceTol) {
    r.applicable = false;
    r.reason = "initial state does not commute with the Hamiltonian";
  }
  if (r.applicable && shift[1] != 0.0) {
    const double a = m.spacing();
    const double steps = a > 0.0 ? shift[1] / a : 0.0;
    if (engine.rho_space_defect() < 0.0) {
      r.applicable = false;
      r.reason = "model has no momentum operator";
    } else if (engine.rho_space_defect() > kInvarianceTol) {
      r.applicable = false;
      r.reason = "initial state does not commute with the momentum";
    } else if (!(m.length > 0.0) || a == 0.0 || std::abs(steps - std::round(steps)) > 1e-9) {
      r.applicable = false;
      r.reason = "spatial shift is not a lattice translation";
    }
  }
  if (!r.applicable) return r;
  auto shifted = [&](std::vector<CtpPoint> pts) {
    for (CtpPoint& p : pts) {
      for (std::size_t k = 0; k < 4; ++k) p.X[k] += shift[k];
    }
    return pts;
  };
  const Complex base = engine.ctp_correlator(forward, backward);
  const Complex moved = engine.ctp_correlator(shifted(forward), shifted(backward));
  r.deviation = std::abs(moved - base);
  r.pass = r.deviation <= tol * std::max(1.0, std::abs(base));
  return r;
}

namespace {

struct Line {
  int number = 0;
  std::vector<std::string> tokens;
};

Matrix read_matrix(const std::vector<Line>& lines, std::size_t& pos, Index d, const std::string& source,
                   const std::string& field) {
  Matrix m(d, d);
  for (Index row = 0; row < d; ++row) {
    if (pos >= lines.size()) throw ParseError(source, lines.empty() ? 0 : lines.back().number, field, "missing matrix rows");
    const Line& line = lines[pos++];
    if (static_cast<Index>(line.tokens.size()) != 2 * d) {
      throw ParseError(source, line.number, field,
                       "expected " + std::to_string(2 * d) + " numbers (re im pairs), got " +
                           std::to_string(line.tokens.size()));
    }
    for (Index col = 0; col < d; ++col) {
      try {
        std::size_t used = 0;
        const auto& re_s = line.tokens[static_cast<std::size_t>(2 * col)];
        const auto& im_s = line.tokens[static_cast<std::size_t>(2 * col + 1)];
        const double re = std::stod(re_s, &used);
        if (used != re_s.size()) throw std::invalid_argument(re_s);
        const double im = std::stod(im_s, &used);
        if (used != im_s.size()) throw std::invalid_argument(im_s);
        m(row, col) = Complex(re, im);
      } catch (const std::exception&) {
        throw ParseError(source, line.number, field, "malformed number");
      }
    }
  }
  return m;
}

double parse_number(const std::string& s, const std::string& source, int line, const std::string& field) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParseError(source, line, field, "malformed number '" + s + "'");
  }
}

}  // namespace

FieldModel parse_field_text(const std::string& text, const std::string& source) {
  std::vector<Line> lines;
  std::istringstream in(text);
  std::string raw;
  int number = 0;
  while (std::getline(in, raw)) {
    ++number;
    if (auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    std::istringstream ls(raw);
    Line line{number, {}};
    std::string tok;
    while (ls >> tok) line.tokens.push_back(tok);
    if (!line.tokens.empty()) lines.push_back(std::move(line));
  }
  FieldModel f;
  Index d = 0;
  bool have_h = false, have_rho = false;
  std::map<std::string, std::map<std::size_t, Matrix>> pending;
  std::size_t pos = 0;
  auto need_dim = [&](const Line& line, const std::string& field) {
    if (d == 0) throw ParseError(source, line.number, field, "'dim' must come first");
  };
  while (pos < lines.size()) {
    const Line& line = lines[pos++];
    const std::string& key = line.tokens[0];
    if (key == "dim") {
      if (line.tokens.size() != 2) throw ParseError(source, line.number, "dim", "expected one value");
      const double v = parse_number(line.tokens[1], source, line.number, "dim");
      if (v < 1 || v != std::floor(v)) throw ParseError(source, line.number, "dim", "must be a positive integer");
      if (v > static_cast<double>(dimension_cap())) throw ParseError(source, line.number, "dim", "exceeds the dimension cap");
      d = static_cast<Index>(v);
    } else if (key == "length") {
      if (line.tokens.size() != 2) throw ParseError(source, line.number, "length", "expected one value");
      f.length = parse_number(line.tokens[1], source, line.number, "length");
    } else if (key == "sites") {
      if (line.tokens.size() < 2) throw ParseError(source, line.number, "sites", "expected at least one site");
      f.sites.clear();
      for (std::size_t k = 1; k < line.tokens.size(); ++k) {
        f.sites.push_back(parse_number(line.tokens[k], source, line.number, "sites"));
      }
    } else if (key == "hamiltonian") {
      need_dim(line, key);
      f.h_phi = read_matrix(lines, pos, d, source, key);
      have_h = true;
    } else if (key == "rho0") {
      need_dim(line, key);
      f.rho0 = read_matrix(lines, pos, d, source, key);
      have_rho = true;
    } else if (key == "momentum") {
      need_dim(line, key);
      f.momentum = read_matrix(lines, pos, d, source, key);
    } else if (key == "composite") {
      need_dim(line, key);
      if (line.tokens.size() != 3) throw ParseError(source, line.number, key, "expected 'composite <index> <x>'");
      const double x = parse_number(line.tokens[2], source, line.number, key);
      auto it = std::find(f.sites.begin(), f.sites.end(), x);
      if (it == f.sites.end()) throw ParseError(source, line.number, key, "x is not a declared site");
      const std::size_t site = static_cast<std::size_t>(it - f.sites.begin());
      const int at = line.number;
      Matrix m = read_matrix(lines, pos, d, source, key + " " + line.tokens[1]);
      if (!pending[line.tokens[1]].emplace(site, std::move(m)).second) {
        throw ParseError(source, at, key, "duplicate composite at this site");
      }
    } else {
      throw ParseError(source, line.number, key, "unknown keyword");
    }
  }
  if (d == 0) throw ParseError(source, 0, "dim", "missing");
  if (!have_h) throw ParseError(source, 0, "hamiltonian", "missing");
  if (!have_rho) throw ParseError(source, 0, "rho0", "missing");
  for (auto& [name, by_site] : pending) {
    if (by_site.size() != f.sites.size()) {
      throw ParseError(source, 0, "composite " + name, "must be given at every site");
    }
    auto& out = f.composites[name];
    for (auto& [site, m] : by_site) out.push_back(std::move(m));
  }
  f.validate();
  return f;
}

FieldModel load_field_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path, 0, "", "cannot open file");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_field_text(buf.str(), path);
}

}  // namespace qtp
