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

#include "qtp/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "qtp/error.hpp"

namespace qtp {

double minkowski_dot(const FourVector& a, const FourVector& b) {
  return -a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + a[3] * b[3];
}

namespace {

Eigen::Matrix4d eta() { return Eigen::Vector4d(-1.0, 1.0, 1.0, 1.0).asDiagonal(); }

FourVector lorentz_apply(const Lorentz& m, const FourVector& v) {
  Eigen::Vector4d out = m * Eigen::Vector4d(v[0], v[1], v[2], v[3]);
  return {out(0), out(1), out(2), out(3)};
}

FourVector axpy(double a, const FourVector& x, const FourVector& y) {
  return {a * x[0] + y[0], a * x[1] + y[1], a * x[2] + y[2], a * x[3] + y[3]};
}

}  // namespace

bool is_proper_orthochronous(const Lorentz& lambda, double tol) {
  if ((lambda.transpose() * eta() * lambda - eta()).cwiseAbs().maxCoeff() > tol) return false;
  if (lambda(0, 0) < 1.0 - tol) return false;
  return lambda.determinant() > 0.0;
}

Lorentz boost_matrix(const Point3& velocity) {
  const Eigen::Vector3d v(velocity[0], velocity[1], velocity[2]);
  const double v2 = v.squaredNorm();
  if (v2 >= 1.0) throw DomainError("boost_matrix: speed must be below 1");
  const double gamma = 1.0 / std::sqrt(1.0 - v2);
  Lorentz m = Lorentz::Identity();
  m(0, 0) = gamma;
  for (int i = 0; i < 3; ++i) {
    m(0, i + 1) = gamma * v(i);
    m(i + 1, 0) = gamma * v(i);
    for (int j = 0; j < 3; ++j) {
      if (v2 > 0.0) m(i + 1, j + 1) += (gamma - 1.0) * v(i) * v(j) / v2;
    }
  }
  return m;
}

BodySet BodySet::point() {
  BodySet b;
  b.points.push_back({0.0, 0.0, 0.0});
  b.weights.push_back(1.0);
  return b;
}

BodySet BodySet::grid(const Point3& half_widths, const std::array<int, 3>& counts) {
  std::array<std::vector<double>, 3> xs;
  std::array<std::vector<double>, 3> ws;
  for (int a = 0; a < 3; ++a) {
    const int n = counts[static_cast<std::size_t>(a)];
    const double h = half_widths[static_cast<std::size_t>(a)];
    if (n < 1 || n > 5) throw DomainError("BodySet: 1 to 5 points per axis");
    if (n == 1 || h == 0.0) {
      xs[static_cast<std::size_t>(a)] = {0.0};
      ws[static_cast<std::size_t>(a)] = {1.0};
      continue;
    }
    if (n % 2 == 0) throw DomainError("BodySet: an odd count keeps the center on the grid");
    const double step = 2.0 * h / (n - 1);
    for (int k = 0; k < n; ++k) {
      xs[static_cast<std::size_t>(a)].push_back(-h + k * step);
      ws[static_cast<std::size_t>(a)].push_back((k == 0 || k == n - 1) ? 0.5 * step : step);
    }
  }
  BodySet b;
  for (std::size_t i = 0; i < xs[0].size(); ++i) {
    for (std::size_t j = 0; j < xs[1].size(); ++j) {
      for (std::size_t k = 0; k < xs[2].size(); ++k) {
        b.points.push_back({xs[0][i], xs[1][j], xs[2][k]});
        b.weights.push_back(ws[0][i] * ws[1][j] * ws[2][k]);
      }
    }
  }
  return b;
}

double BodySet::extent() const {
  double best = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t j = i + 1; j < points.size(); ++j) {
      double d2 = 0.0;
      for (int a = 0; a < 3; ++a) {
        const double d = points[i][static_cast<std::size_t>(a)] - points[j][static_cast<std::size_t>(a)];
        d2 += d * d;
      }
      best = std::max(best, std::sqrt(d2));
    }
  }
  return best;
}

std::array<bool, 3> BodySet::active_axes() const {
  std::array<bool, 3> out{false, false, false};
  for (const auto& p : points) {
    for (std::size_t a = 0; a < 3; ++a) {
      if (p[a] != points.front()[a]) out[a] = true;
    }
  }
  return out;
}

WorldTube WorldTube::inertial(const FourVector& origin, const Point3& velocity, BodySet body) {
  WorldTube tube;
  tube.kind_ = Kind::inertial;
  tube.body_ = std::move(body);
  tube.origin_ = origin;
  const Lorentz m = boost_matrix(velocity);
  tube.u_ = {m(0, 0), m(1, 0), m(2, 0), m(3, 0)};
  for (int i = 0; i < 3; ++i) {
    tube.frame_[static_cast<std::size_t>(i)] = {m(0, i + 1), m(1, i + 1), m(2, i + 1), m(3, i + 1)};
  }
  return tube;
}

WorldTube WorldTube::at_rest(const FourVector& origin, BodySet body) {
  return inertial(origin, {0.0, 0.0, 0.0}, std::move(body));
}

WorldTube WorldTube::tabulated(std::vector<TubeSample> rows, BodySet body) {
  if (rows.empty()) throw DomainError("tabulated world-tube: no rows");
  WorldTube tube;
  tube.kind_ = Kind::tabulated;
  tube.body_ = std::move(body);
  for (std::size_t a = 0; a < 3; ++a) {
    std::vector<double> vals;
    for (const auto& r : rows) vals.push_back(r.q[a]);
    std::sort(vals.begin(), vals.end());
    vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
    if (std::find(vals.begin(), vals.end(), 0.0) == vals.end()) {
      throw DomainError("tabulated world-tube: body center q = 0 is not sampled");
    }
    tube.axes_[a] = vals;
  }
  std::map<std::array<double, 3>, std::vector<std::pair<double, FourVector>>> columns;
  for (const auto& r : rows) columns[r.q].push_back({r.tau, r.e});
  const std::size_t ncols = tube.axes_[0].size() * tube.axes_[1].size() * tube.axes_[2].size();
  if (columns.size() != ncols) throw DomainError("tabulated world-tube: q samples do not form a grid");
  tube.table_.resize(ncols);
  for (auto& [q, series] : columns) {
    std::array<std::size_t, 3> idx{};
    for (std::size_t a = 0; a < 3; ++a) {
      idx[a] = static_cast<std::size_t>(std::lower_bound(tube.axes_[a].begin(), tube.axes_[a].end(), q[a]) -
                                        tube.axes_[a].begin());
    }
    std::vector<double> taus;
    std::vector<FourVector> values;
    for (std::size_t k = 0; k < series.size(); ++k) {
      if (k > 0 && !(series[k].first > series[k - 1].first)) {
        throw DomainError("tabulated world-tube: proper time must increase within each body point");
      }
      taus.push_back(series[k].first);
      values.push_back(series[k].second);
    }
    if (tube.taus_.empty()) {
      tube.taus_ = taus;
    } else if (taus != tube.taus_) {
      throw DomainError("tabulated world-tube: all body points need the same proper-time samples");
    }
    tube.table_[tube.column_index(idx)] = std::move(values);
  }
  const std::size_t nt = tube.taus_.size();
  if (nt < 5) throw DomainError("tabulated world-tube: at least five proper-time samples are needed");
  const double h = (tube.taus_.back() - tube.taus_.front()) / static_cast<double>(nt - 1);
  for (std::size_t k = 1; k < nt; ++k) {
    if (std::abs(tube.taus_[k] - tube.taus_[k - 1] - h) > 1e-9 * std::max(1.0, std::abs(h))) {
      throw DomainError("tabulated world-tube: proper-time samples must be uniformly spaced");
    }
  }
  tube.tau_min_ = tube.taus_.front();
  tube.tau_max_ = tube.taus_.back();
  // Five-point finite differences: central in the bulk, one-sided at the ends.
  tube.rates_.resize(ncols);
  for (std::size_t c = 0; c < ncols; ++c) {
    const auto& y = tube.table_[c];
    auto& dy = tube.rates_[c];
    dy.resize(nt);
    for (std::size_t k = 0; k < nt; ++k) {
      FourVector out{};
      for (std::size_t m = 0; m < 4; ++m) {
        auto v = [&](std::size_t i) { return y[i][m]; };
        double d = 0.0;
        if (k >= 2 && k + 2 < nt) {
          d = (v(k - 2) - 8.0 * v(k - 1) + 8.0 * v(k + 1) - v(k + 2)) / (12.0 * h);
        } else if (k < 2) {
          const std::size_t s = k;  // stencil starts at 0
          const double x = static_cast<double>(s);
          // Derivative at offset x of the quartic through samples 0..4.
          double acc = 0.0;
          for (std::size_t j = 0; j < 5; ++j) {
            double num = 0.0;
            double den = 1.0;
            for (std::size_t i = 0; i < 5; ++i) {
              if (i == j) continue;
              den *= static_cast<double>(j) - static_cast<double>(i);
              double prod = 1.0;
              for (std::size_t l = 0; l < 5; ++l) {
                if (l == j || l == i) continue;
                prod *= x - static_cast<double>(l);
              }
              num += prod;
            }
            acc += v(j) * num / den;
          }
          d = acc / h;
        } else {
          const std::size_t base = nt - 5;
          const double x = static_cast<double>(k - base);
          double acc = 0.0;
          for (std::size_t j = 0; j < 5; ++j) {
            double num = 0.0;
            double den = 1.0;
            for (std::size_t i = 0; i < 5; ++i) {
              if (i == j) continue;
              den *= static_cast<double>(j) - static_cast<double>(i);
              double prod = 1.0;
              for (std::size_t l = 0; l < 5; ++l) {
                if (l == j || l == i) continue;
                prod *= x - static_cast<double>(l);
              }
              num += prod;
            }
            acc += v(base + j) * num / den;
          }
          d = acc / h;
        }
        out[m] = d;
      }
      dy[k] = out;
    }
  }
  // Inactive axes carry unit spatial directions.
  for (std::size_t i = 0; i < 3; ++i) {
    tube.frame_[i] = {0.0, 0.0, 0.0, 0.0};
    tube.frame_[i][i + 1] = 1.0;
  }
  const double defect = tube.normalization_defect();
  if (defect > 1e-8) {
    throw ValidationError("proper-time", "tabulated world-tube: eta(u,u) = -1 violated by " + std::to_string(defect));
  }
  return tube;
}

WorldTube WorldTube::uniform_acceleration(double acceleration, double tau_min, double tau_max, int samples,
                                          BodySet body) {
  if (!(acceleration > 0.0)) throw DomainError("uniform_acceleration: acceleration must be positive");
  if (samples < 5 || !(tau_max > tau_min)) throw DomainError("uniform_acceleration: bad proper-time range");
  std::array<std::vector<double>, 3> axes;
  for (std::size_t a = 0; a < 3; ++a) {
    for (const auto& p : body.points) axes[a].push_back(p[a]);
    axes[a].push_back(0.0);
    std::sort(axes[a].begin(), axes[a].end());
    axes[a].erase(std::unique(axes[a].begin(), axes[a].end()), axes[a].end());
  }
  const double inv = 1.0 / acceleration;
  std::vector<TubeSample> rows;
  for (double qx : axes[0]) {
    if (inv + qx <= 0.0) throw DomainError("uniform_acceleration: body extends past the horizon");
    for (double qy : axes[1]) {
      for (double qz : axes[2]) {
        for (int k = 0; k < samples; ++k) {
          const double tau = tau_min + (tau_max - tau_min) * k / (samples - 1);
          TubeSample row;
          row.tau = tau;
          row.q = {qx, qy, qz};
          row.e = {(inv + qx) * std::sinh(acceleration * tau), (inv + qx) * std::cosh(acceleration * tau) - inv,
                   qy, qz};
          rows.push_back(row);
        }
      }
    }
  }
  return tabulated(std::move(rows), std::move(body));
}

std::size_t WorldTube::column_index(const std::array<std::size_t, 3>& idx) const {
  return (idx[0] * axes_[1].size() + idx[1]) * axes_[2].size() + idx[2];
}

namespace {
std::size_t locate(const std::vector<double>& xs, double x) {
  if (x < xs.front() || x > xs.back()) throw DomainError("world-tube: evaluation outside the sampled domain");
  std::size_t hi = static_cast<std::size_t>(std::upper_bound(xs.begin(), xs.end(), x) - xs.begin());
  if (hi >= xs.size()) hi = xs.size() - 1;
  return hi - 1;
}
}  // namespace

FourVector WorldTube::eval_column(std::size_t column, double tau) const {
  const std::size_t k = locate(taus_, tau);
  const double h = taus_[k + 1] - taus_[k];
  const double u = (tau - taus_[k]) / h;
  const double h00 = (1 + 2 * u) * (1 - u) * (1 - u);
  const double h10 = u * (1 - u) * (1 - u);
  const double h01 = u * u * (3 - 2 * u);
  const double h11 = u * u * (u - 1);
  const auto& y = table_[column];
  const auto& dy = rates_[column];
  FourVector out{};
  for (std::size_t m = 0; m < 4; ++m) {
    out[m] = h00 * y[k][m] + h10 * h * dy[k][m] + h01 * y[k + 1][m] + h11 * h * dy[k + 1][m];
  }
  return out;
}

FourVector WorldTube::rate_column(std::size_t column, double tau) const {
  const std::size_t k = locate(taus_, tau);
  const double h = taus_[k + 1] - taus_[k];
  const double u = (tau - taus_[k]) / h;
  const double d00 = 6 * u * u - 6 * u;
  const double d10 = 3 * u * u - 4 * u + 1;
  const double d01 = -6 * u * u + 6 * u;
  const double d11 = 3 * u * u - 2 * u;
  const auto& y = table_[column];
  const auto& dy = rates_[column];
  FourVector out{};
  for (std::size_t m = 0; m < 4; ++m) {
    out[m] = (d00 * y[k][m] + d01 * y[k + 1][m]) / h + d10 * dy[k][m] + d11 * dy[k + 1][m];
  }
  return out;
}

FourVector WorldTube::eval(double tau, const Point3& q) const {
  if (kind_ == Kind::inertial) {
    FourVector out = axpy(tau, u_, origin_);
    for (std::size_t i = 0; i < 3; ++i) out = axpy(q[i], frame_[i], out);
    return out;
  }
  // Multilinear in q over the surrounding grid cell.
  std::array<std::size_t, 3> lo{};
  std::array<double, 3> frac{};
  for (std::size_t a = 0; a < 3; ++a) {
    const auto& xs = axes_[a];
    if (xs.size() == 1) {
      if (std::abs(q[a] - xs[0]) > 1e-12) throw DomainError("world-tube: body coordinate outside the sampled domain");
      lo[a] = 0;
      frac[a] = 0.0;
      continue;
    }
    lo[a] = locate(xs, q[a]);
    frac[a] = (q[a] - xs[lo[a]]) / (xs[lo[a] + 1] - xs[lo[a]]);
  }
  FourVector out{};
  for (int corner = 0; corner < 8; ++corner) {
    double w = 1.0;
    std::array<std::size_t, 3> idx{};
    bool skip = false;
    for (std::size_t a = 0; a < 3; ++a) {
      const bool up = (corner >> a) & 1;
      if (up && axes_[a].size() == 1) {
        skip = true;
        break;
      }
      idx[a] = lo[a] + (up ? 1 : 0);
      w *= up ? frac[a] : 1.0 - frac[a];
    }
    if (skip || w == 0.0) continue;
    out = axpy(w, eval_column(column_index(idx), tau), out);
  }
  return out;
}

FourVector WorldTube::velocity(double tau, const Point3& q) const {
  if (kind_ == Kind::inertial) return u_;
  if (q == Point3{0.0, 0.0, 0.0}) {
    std::array<std::size_t, 3> idx{};
    for (std::size_t a = 0; a < 3; ++a) {
      idx[a] = static_cast<std::size_t>(std::lower_bound(axes_[a].begin(), axes_[a].end(), 0.0) - axes_[a].begin());
    }
    return rate_column(column_index(idx), tau);
  }
  const double h = 1e-6 * std::max(1.0, tau_max_ - tau_min_);
  const double lo = std::max(tau_min_, tau - h);
  const double hi = std::min(tau_max_, tau + h);
  const FourVector a = eval(lo, q);
  const FourVector b = eval(hi, q);
  return {(b[0] - a[0]) / (hi - lo), (b[1] - a[1]) / (hi - lo), (b[2] - a[2]) / (hi - lo), (b[3] - a[3]) / (hi - lo)};
}

std::array<FourVector, 3> WorldTube::triad(double tau) const {
  if (kind_ == Kind::inertial) return frame_;
  std::array<FourVector, 3> out = frame_;
  for (std::size_t a = 0; a < 3; ++a) {
    const auto& xs = axes_[a];
    if (xs.size() == 1) continue;
    const auto it = std::lower_bound(xs.begin(), xs.end(), 0.0);
    const std::size_t c = static_cast<std::size_t>(it - xs.begin());
    const double left = c > 0 ? xs[c - 1] : 0.0;
    const double right = c + 1 < xs.size() ? xs[c + 1] : 0.0;
    Point3 ql{0.0, 0.0, 0.0};
    Point3 qr{0.0, 0.0, 0.0};
    ql[a] = left;
    qr[a] = right;
    const FourVector el = eval(tau, ql);
    const FourVector er = eval(tau, qr);
    for (std::size_t m = 0; m < 4; ++m) out[a][m] = (er[m] - el[m]) / (right - left);
  }
  return out;
}

Eigen::Matrix3d WorldTube::spatial_metric(double tau) const {
  const auto e = triad(tau);
  Eigen::Matrix3d h;
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) {
      h(static_cast<Index>(i), static_cast<Index>(j)) = minkowski_dot(e[i], e[j]);
    }
  }
  return h;
}

double WorldTube::proper_time_at(double t) const {
  if (kind_ == Kind::inertial) return (t - origin_[0]) / u_[0];
  double lo = tau_min_;
  double hi = tau_max_;
  const Point3 center{0.0, 0.0, 0.0};
  if (eval(lo, center)[0] > t || eval(hi, center)[0] < t) {
    throw DomainError("world-tube: coordinate time outside the tabulated range");
  }
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    (eval(mid, center)[0] < t ? lo : hi) = mid;
    if (hi - lo <= 1e-15 * std::max(1.0, std::abs(mid))) break;
  }
  return 0.5 * (lo + hi);
}

ProperTimeMap WorldTube::proper_time_map(double t_lo, double t_hi, int samples) const {
  if (kind_ == Kind::inertial && u_[0] == 1.0 && origin_[0] == 0.0) return ProperTimeMap();
  std::vector<double> ts;
  std::vector<double> taus;
  for (int k = 0; k < samples; ++k) {
    const double t = t_lo + (t_hi - t_lo) * k / (samples - 1);
    ts.push_back(t);
    taus.push_back(proper_time_at(t));
  }
  return ProperTimeMap(std::move(ts), std::move(taus));
}

WorldTube WorldTube::boosted(const Lorentz& lambda, const FourVector& shift) const {
  if (!is_proper_orthochronous(lambda)) {
    throw DomainError("boost_embedding: transformation is not proper orthochronous");
  }
  WorldTube out = *this;
  out.origin_ = axpy(1.0, lorentz_apply(lambda, origin_), shift);
  out.u_ = lorentz_apply(lambda, u_);
  for (auto& e : out.frame_) e = lorentz_apply(lambda, e);
  for (auto& column : out.table_) {
    for (auto& v : column) v = axpy(1.0, lorentz_apply(lambda, v), shift);
  }
  for (auto& column : out.rates_) {
    for (auto& v : column) v = lorentz_apply(lambda, v);
  }
  return out;
}

double WorldTube::normalization_defect(int samples) const {
  if (kind_ == Kind::inertial) return std::abs(minkowski_dot(u_, u_) + 1.0);
  (void)samples;
  // Checked on the table nodes, where the rates are fifth-order accurate.
  std::array<std::size_t, 3> idx{};
  for (std::size_t a = 0; a < 3; ++a) {
    idx[a] = static_cast<std::size_t>(std::lower_bound(axes_[a].begin(), axes_[a].end(), 0.0) - axes_[a].begin());
  }
  double worst = 0.0;
  for (const FourVector& u : rates_[column_index(idx)]) {
    worst = std::max(worst, std::abs(minkowski_dot(u, u) + 1.0));
  }
  return worst;
}

}  // namespace qtp
