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

#include "gbdmap/factors.h"

#include <cmath>
#include <limits>

#include "gbdmap/closed_form.h"
#include "gbdmap/errors.h"

namespace gbdmap {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool BoxBounds(const Domain& d, std::vector<double>& lo, std::vector<double>& hi) {
  if (d.kind() == DomainKind::kUnitInterval) {
    lo.push_back(0.0);
    hi.push_back(1.0);
    return true;
  }
  if (d.kind() == DomainKind::kBox) {
    lo.insert(lo.end(), d.lower().begin(), d.lower().end());
    hi.insert(hi.end(), d.upper().begin(), d.upper().end());
    return true;
  }
  return false;
}

}  // namespace

QuadraticFactor::QuadraticFactor(std::vector<VarId> scope, Eigen::MatrixXd q,
                                 Eigen::VectorXd b, double c, std::string family)
    : Factor(std::move(family), std::move(scope)),
      q_(0.5 * (q + q.transpose())),
      b_(std::move(b)),
      c_(c) {
  if (q_.rows() != b_.size()) throw DomainError("quadratic factor shape mismatch");
  concave_ = true;
  if (q_.size() > 0) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(q_, Eigen::EigenvaluesOnly);
    concave_ = es.eigenvalues().minCoeff() >= -1e-12;
  }
}

Eigen::VectorXd QuadraticFactor::flatten(const ScopeValues& x) const {
  Eigen::VectorXd out(b_.size());
  Eigen::Index k = 0;
  for (const auto& s : x) {
    for (double v : s) {
      if (k >= out.size()) throw DomainError("quadratic factor scope too large");
      out(k++) = v;
    }
  }
  if (k != out.size()) throw DomainError("quadratic factor scope too small");
  return out;
}

double QuadraticFactor::eval(const ScopeValues& x) const {
  const Eigen::VectorXd v = flatten(x);
  return -0.5 * v.dot(q_ * v) + b_.dot(v) + c_;
}

ScopeVectors QuadraticFactor::gradient(const ScopeValues& x) const {
  const Eigen::VectorXd v = flatten(x);
  const Eigen::VectorXd g = b_ - q_ * v;
  ScopeVectors out;
  Eigen::Index k = 0;
  for (const auto& s : x) {
    out.emplace_back(g.data() + k, g.data() + k + s.size());
    k += static_cast<Eigen::Index>(s.size());
  }
  return out;
}

std::optional<SupResult> QuadraticFactor::tilted_sup(
    std::span<const double> binary, const ScopeVectors& u,
    const std::vector<const Domain*>& domains) const {
  std::vector<int> free_idx;
  std::vector<int> fixed_idx;
  std::vector<double> fixed_val;
  std::vector<double> lo;
  std::vector<double> hi;
  std::vector<double> tilt;
  int k = 0;
  std::size_t next_binary = 0;
  for (std::size_t p = 0; p < domains.size(); ++p) {
    const Domain& d = *domains[p];
    const int n = static_cast<int>(d.size());
    if (d.is_binary()) {
      fixed_idx.push_back(k);
      fixed_val.push_back(binary[next_binary++]);
    } else {
      if (!BoxBounds(d, lo, hi)) return std::nullopt;
      for (int j = 0; j < n; ++j) {
        free_idx.push_back(k + j);
        tilt.push_back(u[p][j]);
      }
    }
    k += n;
  }
  if (k != b_.size()) throw DomainError("quadratic factor domains do not match its size");
  const int f = static_cast<int>(free_idx.size());
  Eigen::MatrixXd qff(f, f);
  Eigen::VectorXd bf(f);
  double constant = c_;
  for (std::size_t a = 0; a < fixed_idx.size(); ++a) {
    constant += b_(fixed_idx[a]) * fixed_val[a];
    for (std::size_t c = 0; c < fixed_idx.size(); ++c) {
      constant -= 0.5 * q_(fixed_idx[a], fixed_idx[c]) * fixed_val[a] * fixed_val[c];
    }
  }
  for (int r = 0; r < f; ++r) {
    bf(r) = b_(free_idx[r]) - tilt[r];
    for (std::size_t a = 0; a < fixed_idx.size(); ++a) {
      bf(r) -= q_(free_idx[r], fixed_idx[a]) * fixed_val[a];
    }
    for (int s = 0; s < f; ++s) qff(r, s) = q_(free_idx[r], free_idx[s]);
  }
  if (f == 0) {
    SupResult out;
    out.value = constant;
    return out;
  }
  SupResult out = MaxQuadraticOnBox(qff, bf, Eigen::Map<Eigen::VectorXd>(lo.data(), f),
                                    Eigen::Map<Eigen::VectorXd>(hi.data(), f));
  out.value += constant;
  return out;
}

std::optional<SupResult> QuadraticFactor::linear_sup(std::span<const double> g,
                                                     const Domain& domain) const {
  if (domain.is_binary()) {
    const double at0 = c_;
    const double at1 = -0.5 * q_(0, 0) + b_(0) + c_ + g[0];
    SupResult out;
    out.value = std::max(at0, at1);
    out.argmax = {at1 > at0 ? 1.0 : 0.0};
    return out;
  }
  std::vector<double> lo;
  std::vector<double> hi;
  if (!BoxBounds(domain, lo, hi)) return std::nullopt;
  const Eigen::Index n = b_.size();
  SupResult out = MaxQuadraticOnBox(q_, b_ + AsVector(g), Eigen::Map<Eigen::VectorXd>(lo.data(), n),
                                    Eigen::Map<Eigen::VectorXd>(hi.data(), n));
  out.value += c_;
  return out;
}

BinaryLogCoordinateFactor::BinaryLogCoordinateFactor(VarId z, VarId p, int coord,
                                                     std::string family)
    : Factor(std::move(family), {z, p}), coord_(coord) {}

double BinaryLogCoordinateFactor::eval(const ScopeValues& x) const {
  const double z = x[0][0];
  if (z == 0.0) return 0.0;
  const double p = x[1][coord_];
  return p > 0.0 ? z * std::log(p) : -kInf;
}

ScopeVectors BinaryLogCoordinateFactor::gradient(const ScopeValues& x) const {
  const double z = x[0][0];
  const double p = x[1][coord_];
  ScopeVectors out(2);
  out[0] = {p > 0.0 ? std::log(p) : -kInf};
  out[1].assign(x[1].size(), 0.0);
  out[1][coord_] = z == 0.0 ? 0.0 : (p > 0.0 ? z / p : kInf);
  return out;
}

std::optional<SupResult> BinaryLogCoordinateFactor::tilted_sup(
    std::span<const double> binary, const ScopeVectors& u,
    const std::vector<const Domain*>& domains) const {
  const Domain& simplex = *domains[1];
  std::vector<double> g(u[1].size());
  for (std::size_t j = 0; j < g.size(); ++j) g[j] = -u[1][j];
  if (binary[0] == 0.0) return simplex.linear_sup(g);
  std::vector<double> c(g.size(), 0.0);
  c[coord_] = binary[0];
  return MaxLogLinearOnSimplex(c, g, simplex.floor());
}

SimplexLogPriorFactor::SimplexLogPriorFactor(VarId p, std::vector<double> coef,
                                             std::string family)
    : Factor(std::move(family), {p}), coef_(std::move(coef)) {}

double SimplexLogPriorFactor::eval(const ScopeValues& x) const {
  double total = 0.0;
  for (std::size_t j = 0; j < coef_.size(); ++j) {
    if (coef_[j] == 0.0) continue;
    total += x[0][j] > 0.0 ? coef_[j] * std::log(x[0][j]) : (coef_[j] > 0.0 ? -kInf : kInf);
  }
  return total;
}

ScopeVectors SimplexLogPriorFactor::gradient(const ScopeValues& x) const {
  ScopeVectors out(1, std::vector<double>(coef_.size(), 0.0));
  for (std::size_t j = 0; j < coef_.size(); ++j) {
    if (coef_[j] != 0.0) out[0][j] = coef_[j] / x[0][j];
  }
  return out;
}

std::optional<SupResult> SimplexLogPriorFactor::linear_sup(std::span<const double> g,
                                                           const Domain& domain) const {
  if (domain.kind() != DomainKind::kSimplex) return std::nullopt;
  return MaxLogLinearOnSimplex(coef_, g, domain.floor());
}

bool SimplexLogPriorFactor::concave() const {
  for (double c : coef_) {
    if (c < 0.0) return false;
  }
  return true;
}

BinaryLinearFactor::BinaryLinearFactor(VarId z, double coef, std::string family)
    : Factor(std::move(family), {z}), coef_(coef) {}

double BinaryLinearFactor::eval(const ScopeValues& x) const {
  return x[0][0] == 0.0 ? 0.0 : coef_ * x[0][0];
}

ScopeVectors BinaryLinearFactor::gradient(const ScopeValues& x) const {
  (void)x;
  return ScopeVectors{{coef_}};
}

std::optional<SupResult> BinaryLinearFactor::linear_sup(std::span<const double> g,
                                                        const Domain& domain) const {
  (void)domain;
  SupResult out;
  const double at1 = coef_ + g[0];
  out.value = std::max(0.0, at1);
  out.argmax = {at1 > 0.0 ? 1.0 : 0.0};
  return out;
}

}  // namespace gbdmap
