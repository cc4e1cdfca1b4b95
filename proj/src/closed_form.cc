// Copyright 2026 The gbdmap Authors
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

#include "gbdmap/closed_form.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "gbdmap/errors.h"

namespace gbdmap {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kBisectionSteps = 200;

// Finds the root of a decreasing function f on (lo, hi] with f(hi) <= target.
template <typename F>
double BisectDecreasing(F f, double lo, double hi, double target) {
  for (int it = 0; it < kBisectionSteps; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (f(mid) > target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return hi;
}

}  // namespace

double LogDetPd(const Eigen::MatrixXd& m) {
  Eigen::LLT<Eigen::MatrixXd> llt(0.5 * (m + m.transpose()));
  if (llt.info() != Eigen::Success) return -kInf;
  const Eigen::MatrixXd& l = llt.matrixL();
  double out = 0.0;
  for (int i = 0; i < m.rows(); ++i) {
    if (!(l(i, i) > 0.0)) return -kInf;
    out += 2.0 * std::log(l(i, i));
  }
  return out;
}

Eigen::MatrixXd AsMatrix(std::span<const double> x, int dim) {
  return Eigen::Map<const Eigen::MatrixXd>(x.data(), dim, dim);
}

Eigen::VectorXd AsVector(std::span<const double> x) {
  return Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size()));
}

SupResult MaxLogLinearOnSimplex(std::span<const double> log_coef,
                                std::span<const double> lin_coef,
                                double floor) {
  const std::size_t d = log_coef.size();
  if (d == 0 || lin_coef.size() != d) throw DomainError("simplex sup size mismatch");
  SupResult out;
  out.argmax.assign(d, floor);
  if (floor * d >= 1.0 - 1e-15) {
    out.argmax.assign(d, 1.0 / d);
    for (std::size_t j = 0; j < d; ++j) {
      out.value += log_coef[j] * std::log(1.0 / d) + lin_coef[j] / d;
    }
    return out;
  }
  std::vector<double> c(log_coef.begin(), log_coef.end());
  std::vector<double> g(lin_coef.begin(), lin_coef.end());
  double constant = 0.0;
  const double top = 1.0 - (d - 1) * floor;
  for (std::size_t j = 0; j < d; ++j) {
    if (c[j] >= 0.0) continue;
    if (floor <= 0.0) {
      throw UnboundedCutError("negative log coefficient on an unfloored simplex");
    }
    out.exact = false;
    const double slope = c[j] * (std::log(top) - std::log(floor)) / (top - floor);
    constant += c[j] * std::log(floor) - slope * floor;
    g[j] += slope;
    c[j] = 0.0;
  }

  std::vector<std::size_t> pos;
  std::size_t best_lin = d;
  for (std::size_t j = 0; j < d; ++j) {
    if (c[j] > 0.0) {
      pos.push_back(j);
    } else if (best_lin == d || g[j] > g[best_lin]) {
      best_lin = j;
    }
  }
  const double lin_count = static_cast<double>(d - pos.size());
  const double mass = 1.0 - lin_count * floor;
  double value = constant;
  for (std::size_t j = 0; j < d; ++j) {
    if (c[j] <= 0.0) value += g[j] * floor;
  }
  if (pos.empty()) {
    const double extra = 1.0 - d * floor;
    out.argmax[best_lin] += extra;
    out.value = value + g[best_lin] * extra;
    return out;
  }

  auto coord = [&](std::size_t j, double nu) {
    return std::max(floor, c[j] / (nu - g[j]));
  };
  auto total = [&](double nu) {
    double t = 0.0;
    for (std::size_t j : pos) t += coord(j, nu);
    return t;
  };
  double g_pos = -kInf;
  double c_sum = 0.0;
  for (std::size_t j : pos) {
    g_pos = std::max(g_pos, g[j]);
    c_sum += c[j];
  }
  const double headroom = mass - pos.size() * floor;
  double nu;
  if (headroom <= 0.0) {
    nu = kInf;
  } else {
    nu = BisectDecreasing(total, g_pos, g_pos + c_sum / headroom, mass);
  }
  double leftover = 0.0;
  if (best_lin != d && g[best_lin] > nu) {
    nu = g[best_lin];
    leftover = mass - total(nu);
  }
  double assigned = 0.0;
  std::size_t largest = pos.front();
  for (std::size_t j : pos) {
    out.argmax[j] = std::isfinite(nu) ? coord(j, nu) : floor;
    assigned += out.argmax[j];
    if (out.argmax[j] > out.argmax[largest]) largest = j;
  }
  if (leftover > 0.0) {
    out.argmax[best_lin] += leftover;
    assigned += leftover;
  }
  // Bisection leaves a rounding-sized slack; hand it to the largest coordinate.
  out.argmax[largest] += mass - assigned;
  out.argmax[largest] = std::max(floor, out.argmax[largest]);
  for (std::size_t j : pos) value += c[j] * std::log(out.argmax[j]) + g[j] * out.argmax[j];
  if (leftover > 0.0) value += g[best_lin] * leftover;
  out.value = value;
  return out;
}

SupResult MaxLogDetLinearOnPd(double a, const Eigen::MatrixXd& c,
                              double eig_floor, double trace_cap) {
  const int dim = static_cast<int>(c.rows());
  Eigen::MatrixXd ceff = 0.5 * (c + c.transpose());
  SupResult out;
  double constant = 0.0;
  double aeff = a;
  if (a < 0.0) {
    out.exact = false;
    double slope = 0.0;
    if (std::isfinite(trace_cap)) {
      const double top = trace_cap - (dim - 1) * eig_floor;
      if (top > eig_floor) {
        slope = 0.5 * a * (std::log(top) - std::log(eig_floor)) / (top - eig_floor);
      }
    }
    constant += dim * (0.5 * a * std::log(eig_floor) - slope * eig_floor);
    ceff -= slope * Eigen::MatrixXd::Identity(dim, dim);
    aeff = 0.0;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(ceff);
  const Eigen::VectorXd& m = es.eigenvalues();
  Eigen::VectorXd lam = Eigen::VectorXd::Constant(dim, eig_floor);
  const double slack = trace_cap - dim * eig_floor;
  if (aeff == 0.0) {
    const double top = -m(0);
    if (top > 0.0) {
      if (!std::isfinite(slack)) {
        throw UnboundedCutError("linear term unbounded on an uncapped PD domain");
      }
      lam(0) += slack;
    }
  } else {
    auto coord = [&](int i, double nu) {
      return std::max(eig_floor, aeff / (2.0 * (m(i) + nu)));
    };
    auto total = [&](double nu) {
      double t = 0.0;
      for (int i = 0; i < dim; ++i) t += coord(i, nu);
      return t;
    };
    double nu = 0.0;
    if (!(m(0) > 0.0 && total(0.0) <= trace_cap)) {
      if (!std::isfinite(trace_cap)) {
        throw UnboundedCutError("log det term unbounded on an uncapped PD domain");
      }
      const double lo = std::max(0.0, -m(0));
      if (slack <= 0.0) {
        nu = kInf;
      } else {
        nu = BisectDecreasing(total, lo, lo + dim * aeff / (2.0 * slack), trace_cap);
      }
    }
    for (int i = 0; i < dim; ++i) lam(i) = std::isfinite(nu) ? coord(i, nu) : eig_floor;
  }
  double value = constant;
  for (int i = 0; i < dim; ++i) {
    value += 0.5 * aeff * std::log(lam(i)) - m(i) * lam(i);
  }
  Eigen::MatrixXd arg = es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose();
  arg = 0.5 * (arg + arg.transpose());
  out.value = value;
  out.argmax.assign(arg.data(), arg.data() + arg.size());
  return out;
}

SupResult QuadraticFormSupBound(double scale, const Eigen::VectorXd& center,
                                const Eigen::VectorXd& u,
                                const Eigen::MatrixXd& big_u, const Domain& box,
                                const Domain& pd) {
  if (!(scale > 0.0)) throw DomainError("quadratic form scale must be positive");
  const int dim = static_cast<int>(center.size());
  const double eps = pd.floor();
  const double slack = pd.cap() - dim * eps;
  const Eigen::MatrixXd a =
      0.5 * scale * center * center.transpose() - 0.5 * (big_u + big_u.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a, Eigen::EigenvaluesOnly);
  const double top = es.eigenvalues()(dim - 1);

  double first = eps * a.trace();
  if (top > 0.0) first += std::isfinite(slack) ? slack * top : kInf;
  const double curvature = eps * scale;
  for (int i = 0; i < dim; ++i) {
    const double m = std::clamp(center(i) - u(i) / curvature, box.lower()[i], box.upper()[i]);
    first += -0.5 * curvature * (m - center(i)) * (m - center(i)) - u(i) * m;
  }

  double second = kInf;
  if (std::isfinite(slack)) {
    const Eigen::MatrixXd b =
        slack * a - (slack / (2.0 * curvature * (eps + slack))) * u * u.transpose();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eb(b, Eigen::EigenvaluesOnly);
    second = eps * a.trace() - u.dot(center) + u.squaredNorm() / (2.0 * curvature) +
             std::max(0.0, eb.eigenvalues()(dim - 1));
  }
  SupResult out;
  out.value = std::min(first, second);
  if (!std::isfinite(out.value)) {
    throw UnboundedCutError("quadratic form block unbounded on the given domains");
  }
  bool inside = true;
  for (int i = 0; i < dim; ++i) {
    inside = inside && center(i) >= box.lower()[i] && center(i) <= box.upper()[i];
  }
  out.exact = inside && u.squaredNorm() == 0.0 && big_u.squaredNorm() == 0.0;
  return out;
}

SupResult MaxQuadraticOnBox(const Eigen::MatrixXd& q, const Eigen::VectorXd& b,
                            const Eigen::VectorXd& lower,
                            const Eigen::VectorXd& upper) {
  const int n = static_cast<int>(b.size());
  if (n > 8) throw DomainError("box quadratic sup supports at most 8 coordinates");
  for (int i = 0; i < n; ++i) {
    if (!std::isfinite(lower(i)) || !std::isfinite(upper(i))) {
      throw UnboundedCutError("box quadratic sup needs finite bounds");
    }
  }
  const Eigen::MatrixXd qs = 0.5 * (q + q.transpose());
  auto objective = [&](const Eigen::VectorXd& x) {
    return -0.5 * x.dot(qs * x) + b.dot(x);
  };
  int combos = 1;
  for (int i = 0; i < n; ++i) combos *= 3;
  SupResult out;
  out.value = -kInf;
  Eigen::VectorXd best = lower;
  for (int code = 0; code < combos; ++code) {
    Eigen::VectorXd x(n);
    std::vector<int> free;
    int rest = code;
    for (int i = 0; i < n; ++i) {
      const int state = rest % 3;
      rest /= 3;
      if (state == 0) {
        x(i) = lower(i);
      } else if (state == 1) {
        x(i) = upper(i);
      } else {
        free.push_back(i);
        x(i) = 0.0;
      }
    }
    if (!free.empty()) {
      const int f = static_cast<int>(free.size());
      Eigen::MatrixXd sub(f, f);
      Eigen::VectorXd rhs(f);
      for (int r = 0; r < f; ++r) {
        rhs(r) = b(free[r]);
        for (int j = 0; j < n; ++j) {
          if (std::find(free.begin(), free.end(), j) == free.end()) {
            rhs(r) -= qs(free[r], j) * x(j);
          }
        }
        for (int s = 0; s < f; ++s) sub(r, s) = qs(free[r], free[s]);
      }
      Eigen::FullPivLU<Eigen::MatrixXd> lu(sub);
      if (lu.rank() < f) continue;
      const Eigen::VectorXd sol = lu.solve(rhs);
      bool ok = true;
      for (int r = 0; r < f; ++r) {
        const int i = free[r];
        const double tol = 1e-12 * (1.0 + std::abs(upper(i) - lower(i)));
        if (sol(r) < lower(i) - tol || sol(r) > upper(i) + tol) ok = false;
        x(i) = std::clamp(sol(r), lower(i), upper(i));
      }
      if (!ok) continue;
    }
    const double v = objective(x);
    if (v > out.value) {
      out.value = v;
      best = x;
    }
  }
  out.argmax.assign(best.data(), best.data() + n);
  return out;
}

}  // namespace gbdmap
