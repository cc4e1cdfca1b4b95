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

#include "gbdmap/domain.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <sstream>

#include <Eigen/Dense>

#include "gbdmap/errors.h"

namespace gbdmap {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Projects v onto {q >= 0, sum q = mass}.
void ProjectScaledSimplex(std::span<double> v, double mass) {
  std::vector<double> sorted(v.begin(), v.end());
  std::sort(sorted.begin(), sorted.end(), std::greater<double>());
  double cumulative = 0.0;
  double theta = 0.0;
  for (std::size_t j = 0; j < sorted.size(); ++j) {
    cumulative += sorted[j];
    const double candidate = (cumulative - mass) / static_cast<double>(j + 1);
    if (sorted[j] - candidate > 0.0) theta = candidate;
  }
  for (double& x : v) x = std::max(0.0, x - theta);
}

Eigen::MatrixXd SymmetricFrom(std::span<const double> x, int dim) {
  Eigen::MatrixXd m = Eigen::Map<const Eigen::MatrixXd>(x.data(), dim, dim);
  return 0.5 * (m + m.transpose());
}

}  // namespace

Domain Domain::Binary() {
  Domain d;
  d.kind_ = DomainKind::kBinary;
  return d;
}

Domain Domain::UnitInterval() {
  Domain d;
  d.kind_ = DomainKind::kUnitInterval;
  return d;
}

Domain Domain::Simplex(int dim, double floor) {
  if (dim < 1) throw DomainError("simplex dimension must be positive");
  if (floor < 0.0 || floor * dim > 1.0 + 1e-12) {
    throw DomainError("simplex floor must satisfy 0 <= floor <= 1/dim");
  }
  Domain d;
  d.kind_ = DomainKind::kSimplex;
  d.dim_ = dim;
  d.floor_ = floor;
  return d;
}

Domain Domain::PositiveDefinite(int dim, double eig_floor, double trace_cap) {
  if (dim < 1) throw DomainError("matrix dimension must be positive");
  if (eig_floor <= 0.0) throw DomainError("eigenvalue floor must be positive");
  if (trace_cap < dim * eig_floor) {
    throw DomainError("trace cap below dim * eigenvalue floor");
  }
  Domain d;
  d.kind_ = DomainKind::kPositiveDefinite;
  d.dim_ = dim;
  d.floor_ = eig_floor;
  d.cap_ = trace_cap;
  return d;
}

Domain Domain::Box(std::vector<double> lower, std::vector<double> upper) {
  if (lower.size() != upper.size() || lower.empty()) {
    throw DomainError("box bounds must be nonempty and of equal length");
  }
  for (std::size_t i = 0; i < lower.size(); ++i) {
    if (!(lower[i] <= upper[i])) throw DomainError("box lower exceeds upper");
  }
  Domain d;
  d.kind_ = DomainKind::kBox;
  d.dim_ = static_cast<int>(lower.size());
  d.lower_ = std::move(lower);
  d.upper_ = std::move(upper);
  return d;
}

std::size_t Domain::size() const {
  if (kind_ == DomainKind::kPositiveDefinite) {
    return static_cast<std::size_t>(dim_) * dim_;
  }
  return static_cast<std::size_t>(dim_);
}

bool Domain::contains(std::span<const double> x, double tol) const {
  if (x.size() != size()) return false;
  for (double v : x) {
    if (!std::isfinite(v)) return false;
  }
  switch (kind_) {
    case DomainKind::kBinary:
      return std::abs(x[0]) <= tol || std::abs(x[0] - 1.0) <= tol;
    case DomainKind::kUnitInterval:
      return x[0] >= -tol && x[0] <= 1.0 + tol;
    case DomainKind::kSimplex: {
      double total = 0.0;
      for (double v : x) {
        if (v < floor_ - tol || v < -tol) return false;
        total += v;
      }
      return std::abs(total - 1.0) <= std::max(tol, 1e-9);
    }
    case DomainKind::kPositiveDefinite: {
      Eigen::Map<const Eigen::MatrixXd> m(x.data(), dim_, dim_);
      const double scale = 1.0 + m.cwiseAbs().maxCoeff();
      if ((m - m.transpose()).cwiseAbs().maxCoeff() > tol * scale) return false;
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(SymmetricFrom(x, dim_),
                                                        Eigen::EigenvaluesOnly);
      const double min_eig = es.eigenvalues().minCoeff();
      if (min_eig <= 1e-12 || min_eig < floor_ - tol * scale) return false;
      return m.trace() <= cap_ + tol * std::max(1.0, std::abs(cap_));
    }
    case DomainKind::kBox:
      for (int i = 0; i < dim_; ++i) {
        if (x[i] < lower_[i] - tol || x[i] > upper_[i] + tol) return false;
      }
      return true;
  }
  return false;
}

void Domain::project(std::span<double> x) const {
  if (x.size() != size()) throw DomainError("projection size mismatch");
  switch (kind_) {
    case DomainKind::kBinary:
      x[0] = x[0] >= 0.5 ? 1.0 : 0.0;
      return;
    case DomainKind::kUnitInterval:
      x[0] = std::clamp(x[0], 0.0, 1.0);
      return;
    case DomainKind::kSimplex: {
      for (double& v : x) {
        if (!std::isfinite(v)) v = 0.0;
        v -= floor_;
      }
      ProjectScaledSimplex(x, 1.0 - floor_ * dim_);
      for (double& v : x) v += floor_;
      return;
    }
    case DomainKind::kPositiveDefinite: {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(SymmetricFrom(x, dim_));
      Eigen::VectorXd lam = es.eigenvalues().cwiseMax(floor_);
      const double total = lam.sum();
      if (total > cap_) {
        const double excess = total - dim_ * floor_;
        const double keep = cap_ - dim_ * floor_;
        for (int i = 0; i < dim_; ++i) {
          lam[i] = floor_ + (lam[i] - floor_) * keep / excess;
        }
      }
      Eigen::MatrixXd m =
          es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose();
      m = 0.5 * (m + m.transpose());
      std::copy(m.data(), m.data() + m.size(), x.begin());
      return;
    }
    case DomainKind::kBox:
      for (int i = 0; i < dim_; ++i) x[i] = std::clamp(x[i], lower_[i], upper_[i]);
      return;
  }
}

SupResult Domain::linear_sup(std::span<const double> g) const {
  if (g.size() != size()) throw DomainError("linear_sup size mismatch");
  SupResult out;
  out.argmax.assign(size(), 0.0);
  switch (kind_) {
    case DomainKind::kBinary:
    case DomainKind::kUnitInterval:
      out.value = std::max(0.0, g[0]);
      out.argmax[0] = g[0] > 0.0 ? 1.0 : 0.0;
      return out;
    case DomainKind::kSimplex: {
      const auto best = std::max_element(g.begin(), g.end()) - g.begin();
      double total = 0.0;
      for (int j = 0; j < dim_; ++j) {
        total += g[j];
        out.argmax[j] = floor_;
      }
      const double free_mass = 1.0 - floor_ * dim_;
      out.argmax[best] += free_mass;
      out.value = floor_ * total + free_mass * g[best];
      return out;
    }
    case DomainKind::kPositiveDefinite: {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(SymmetricFrom(g, dim_));
      const double top = es.eigenvalues()(dim_ - 1);
      const double slack = cap_ - dim_ * floor_;
      Eigen::MatrixXd m = floor_ * Eigen::MatrixXd::Identity(dim_, dim_);
      out.value = floor_ * es.eigenvalues().sum();
      if (top > 0.0) {
        if (!std::isfinite(slack)) {
          throw UnboundedCutError("linear term unbounded on an uncapped PD domain");
        }
        const Eigen::VectorXd v = es.eigenvectors().col(dim_ - 1);
        m += slack * v * v.transpose();
        out.value += slack * top;
      }
      std::copy(m.data(), m.data() + m.size(), out.argmax.begin());
      return out;
    }
    case DomainKind::kBox:
      for (int i = 0; i < dim_; ++i) {
        const double bound = g[i] > 0.0 ? upper_[i] : lower_[i];
        if (g[i] == 0.0) {
          out.argmax[i] = std::isfinite(lower_[i]) ? lower_[i]
                          : std::isfinite(upper_[i]) ? upper_[i]
                                                     : 0.0;
          continue;
        }
        if (!std::isfinite(bound)) {
          throw UnboundedCutError("linear term unbounded on an open box");
        }
        out.argmax[i] = bound;
        out.value += g[i] * bound;
      }
      return out;
  }
  return out;
}

std::vector<double> Domain::interior_point() const {
  std::vector<double> x(size(), 0.0);
  switch (kind_) {
    case DomainKind::kBinary:
      break;
    case DomainKind::kUnitInterval:
      x[0] = 0.5;
      break;
    case DomainKind::kSimplex:
      std::fill(x.begin(), x.end(), 1.0 / dim_);
      break;
    case DomainKind::kPositiveDefinite: {
      double diag = 1.0;
      if (std::isfinite(cap_)) diag = std::min(diag, 0.5 * (cap_ / dim_ + floor_));
      diag = std::max(diag, floor_);
      for (int i = 0; i < dim_; ++i) x[i * dim_ + i] = diag;
      break;
    }
    case DomainKind::kBox:
      for (int i = 0; i < dim_; ++i) {
        const bool lo = std::isfinite(lower_[i]);
        const bool hi = std::isfinite(upper_[i]);
        x[i] = lo && hi ? 0.5 * (lower_[i] + upper_[i])
               : lo     ? lower_[i] + 1.0
               : hi     ? upper_[i] - 1.0
                        : 0.0;
      }
      break;
  }
  return x;
}

std::string Domain::describe() const {
  std::ostringstream os;
  switch (kind_) {
    case DomainKind::kBinary:
      os << "binary";
      break;
    case DomainKind::kUnitInterval:
      os << "unit";
      break;
    case DomainKind::kSimplex:
      os << "simplex(" << dim_ << ",floor=" << floor_ << ")";
      break;
    case DomainKind::kPositiveDefinite:
      os << "pd(" << dim_ << ",floor=" << floor_ << ",cap=" << cap_ << ")";
      break;
    case DomainKind::kBox:
      os << "box(" << dim_ << ")";
      break;
  }
  return os.str();
}

}  // namespace gbdmap
