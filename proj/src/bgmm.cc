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

#include "gbdmap/bgmm.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

#include "gbdmap/closed_form.h"
#include "gbdmap/errors.h"
#include "gbdmap/factors.h"

namespace gbdmap {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<double> Flatten(const Eigen::MatrixXd& m) {
  return std::vector<double>(m.data(), m.data() + m.size());
}

Eigen::MatrixXd Sym(const Eigen::MatrixXd& m) { return 0.5 * (m + m.transpose()); }

ScopeVectors Pack(std::initializer_list<Eigen::MatrixXd> parts) {
  ScopeVectors out;
  for (const auto& p : parts) out.push_back(Flatten(p));
  return out;
}

SupResult Negated(const Domain& d, const std::vector<double>& u) {
  std::vector<double> g(u.size());
  for (std::size_t j = 0; j < u.size(); ++j) g[j] = -u[j];
  return d.linear_sup(g);
}

// (a/2) log det L - <C, L> + const on one precision matrix.
class PrecisionPriorFactor : public Factor {
 public:
  PrecisionPriorFactor(VarId lambda, double a, Eigen::MatrixXd c, double constant)
      : Factor("precision_prior", {lambda}), a_(a), c_(std::move(c)), constant_(constant) {}

  double eval(const ScopeValues& x) const override {
    const Eigen::MatrixXd l = AsMatrix(x[0], static_cast<int>(c_.rows()));
    const double ld = a_ == 0.0 ? 0.0 : LogDetPd(l);
    return 0.5 * a_ * ld - (c_.array() * l.array()).sum() + constant_;
  }

  ScopeVectors gradient(const ScopeValues& x) const override {
    const Eigen::MatrixXd l = AsMatrix(x[0], static_cast<int>(c_.rows()));
    return Pack({Eigen::MatrixXd(0.5 * a_ * l.inverse() - c_)});
  }

  std::optional<SupResult> linear_sup(std::span<const double> g,
                                      const Domain& domain) const override {
    if (domain.kind() != DomainKind::kPositiveDefinite) return std::nullopt;
    const Eigen::MatrixXd gm = Sym(AsMatrix(g, domain.dim()));
    SupResult r = MaxLogDetLinearOnPd(a_, c_ - gm, domain.floor(), domain.cap());
    r.value += constant_;
    return r;
  }

  bool concave() const override { return a_ >= 0.0; }

 private:
  double a_;
  Eigen::MatrixXd c_;
  double constant_;
};

// z/2 (log det L - y'Ly).
class AssignLogDetFactor : public Factor {
 public:
  AssignLogDetFactor(VarId z, VarId lambda, Eigen::VectorXd y)
      : Factor("assign_logdet", {z, lambda}), y_(std::move(y)) {}

  double eval(const ScopeValues& x) const override {
    const double z = x[0][0];
    if (z == 0.0) return 0.0;
    const Eigen::MatrixXd l = AsMatrix(x[1], dim());
    return 0.5 * z * (LogDetPd(l) - y_.dot(l * y_));
  }

  ScopeVectors gradient(const ScopeValues& x) const override {
    const double z = x[0][0];
    const Eigen::MatrixXd l = AsMatrix(x[1], dim());
    const double dz = 0.5 * (LogDetPd(l) - y_.dot(l * y_));
    const Eigen::MatrixXd dl = 0.5 * z * (l.inverse() - y_ * y_.transpose());
    return {{dz}, Flatten(dl)};
  }

  std::optional<SupResult> tilted_sup(std::span<const double> binary, const ScopeVectors& u,
                                      const std::vector<const Domain*>& domains) const override {
    const Domain& pd = *domains[1];
    if (binary[0] == 0.0) return Negated(pd, u[1]);
    const Eigen::MatrixXd big_u = Sym(AsMatrix(u[1], dim()));
    const Eigen::MatrixXd c = 0.5 * y_ * y_.transpose() + big_u;
    return MaxLogDetLinearOnPd(1.0, c, pd.floor(), pd.cap());
  }

 private:
  int dim() const { return static_cast<int>(y_.size()); }
  Eigen::VectorXd y_;
};

// scale * (m'L c - m'L m / 2), with an optional binary gate z in front.
class GatedQuadraticFormFactor : public Factor {
 public:
  GatedQuadraticFormFactor(std::string family, std::vector<VarId> scope, double scale,
                           Eigen::VectorXd center)
      : Factor(std::move(family), std::move(scope)), scale_(scale), center_(std::move(center)) {
    gated_ = this->scope().size() == 3;
  }

  double eval(const ScopeValues& x) const override {
    const double z = gated_ ? x[0][0] : 1.0;
    if (z == 0.0) return 0.0;
    const std::size_t o = gated_ ? 1 : 0;
    const Eigen::VectorXd m = AsVector(x[o]);
    const Eigen::MatrixXd l = AsMatrix(x[o + 1], dim());
    return z * scale_ * (m.dot(l * center_) - 0.5 * m.dot(l * m));
  }

  ScopeVectors gradient(const ScopeValues& x) const override {
    const double z = gated_ ? x[0][0] : 1.0;
    const std::size_t o = gated_ ? 1 : 0;
    const Eigen::VectorXd m = AsVector(x[o]);
    const Eigen::MatrixXd l = AsMatrix(x[o + 1], dim());
    ScopeVectors out;
    if (gated_) out.push_back({scale_ * (m.dot(l * center_) - 0.5 * m.dot(l * m))});
    const Eigen::VectorXd dm = z * scale_ * (l * (center_ - m));
    const Eigen::MatrixXd dl =
        z * scale_ * (Sym(m * center_.transpose()) - 0.5 * m * m.transpose());
    out.push_back(std::vector<double>(dm.data(), dm.data() + dm.size()));
    out.push_back(Flatten(dl));
    return out;
  }

  std::optional<SupResult> tilted_sup(std::span<const double> binary, const ScopeVectors& u,
                                      const std::vector<const Domain*>& domains) const override {
    const std::size_t o = gated_ ? 1 : 0;
    const Domain& box = *domains[o];
    const Domain& pd = *domains[o + 1];
    if (gated_ && binary[0] == 0.0) {
      const SupResult a = Negated(box, u[o]);
      const SupResult b = Negated(pd, u[o + 1]);
      SupResult out;
      out.value = a.value + b.value;
      out.argmax = a.argmax;
      out.argmax.insert(out.argmax.end(), b.argmax.begin(), b.argmax.end());
      return out;
    }
    const Eigen::VectorXd um = AsVector(u[o]);
    const Eigen::MatrixXd big_u = Sym(AsMatrix(u[o + 1], dim()));
    return QuadraticFormSupBound(scale_, center_, um, big_u, box, pd);
  }

 private:
  int dim() const { return static_cast<int>(center_.size()); }
  double scale_;
  Eigen::VectorXd center_;
  bool gated_ = false;
};

struct UnionFind {
  explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
  std::vector<int> parent;
};

struct Components {
  std::vector<int> of;                   // item -> component
  std::vector<std::vector<int>> members;  // component -> items
  std::vector<std::vector<int>> apart;    // component -> cannot-linked components
};

void CheckPairs(int n, const std::vector<PairConstraint>& pairs) {
  for (const auto& p : pairs) {
    if (p.i < 0 || p.j < 0 || p.i >= n || p.j >= n) {
      throw DomainError("pair constraint index out of range: (" + std::to_string(p.i) + ", " +
                        std::to_string(p.j) + ")");
    }
    if (p.i == p.j) throw DomainError("pair constraint links an item to itself");
  }
}

// Throws InfeasibleError when a cannot-link pair lies inside one component.
Components BuildComponents(int n, const std::vector<PairConstraint>& pairs) {
  CheckPairs(n, pairs);
  UnionFind uf(n);
  for (const auto& p : pairs) {
    if (p.kind == PairKind::kMustLink) uf.unite(p.i, p.j);
  }
  Components c;
  c.of.assign(n, -1);
  std::vector<int> root_id(n, -1);
  for (int i = 0; i < n; ++i) {
    const int r = uf.find(i);
    if (root_id[r] < 0) {
      root_id[r] = static_cast<int>(c.members.size());
      c.members.emplace_back();
    }
    c.of[i] = root_id[r];
    c.members[root_id[r]].push_back(i);
  }
  c.apart.assign(c.members.size(), {});
  for (const auto& p : pairs) {
    if (p.kind != PairKind::kCannotLink) continue;
    const int a = c.of[p.i], b = c.of[p.j];
    if (a == b) {
      throw InfeasibleError("cannot-link pair (" + std::to_string(p.i) + ", " +
                            std::to_string(p.j) + ") is joined by must-links");
    }
    c.apart[a].push_back(b);
    c.apart[b].push_back(a);
  }
  for (auto& v : c.apart) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  }
  return c;
}

std::vector<int> Counts(const std::vector<int>& labels, int k) {
  std::vector<int> counts(k, 0);
  for (int l : labels) ++counts[l];
  return counts;
}

}  // namespace

BgmmPrior BgmmPrior::Defaults(const Eigen::MatrixXd& data, int k) {
  BgmmPrior p;
  const int d = static_cast<int>(data.cols());
  p.alpha0 = Eigen::VectorXd::Ones(k);
  p.beta0 = 1.0;
  p.mu0 = data.colwise().mean().transpose();
  p.w0 = Eigen::MatrixXd::Identity(d, d);
  p.nu0 = d + 2.0;
  return p;
}

void BgmmPrior::Validate(int k, int d) const {
  if (alpha0.size() != k) throw DomainError("alpha0 must have one entry per component");
  if ((alpha0.array() <= 0.0).any()) throw DomainError("alpha0 entries must be positive");
  if (!(beta0 > 0.0)) throw DomainError("beta0 must be positive");
  if (mu0.size() != d) throw DomainError("mu0 dimension mismatch");
  if (w0.rows() != d || w0.cols() != d) throw DomainError("W0 shape mismatch");
  if (!std::isfinite(LogDetPd(Sym(w0)))) throw DomainError("W0 must be positive definite");
  if (!(nu0 > d - 1.0)) throw DomainError("nu0 must exceed D - 1");
}

std::vector<int> BgmmLatent::Labels() const {
  std::vector<int> out(z.rows());
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    Eigen::Index arg = 0;
    z.row(i).maxCoeff(&arg);
    out[i] = static_cast<int>(arg);
  }
  return out;
}

Eigen::MatrixXd BgmmLatent::OneHot(const std::vector<int>& labels, int k) {
  Eigen::MatrixXd z = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(labels.size()), k);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= k) throw DomainError("label out of range");
    z(static_cast<Eigen::Index>(i), labels[i]) = 1.0;
  }
  return z;
}

void BgmmLatent::Validate(int n, int k, int d) const {
  if (z.rows() != n || z.cols() != k) throw DomainError("z shape mismatch");
  for (int i = 0; i < n; ++i) {
    double sum = 0.0;
    for (int c = 0; c < k; ++c) {
      if (z(i, c) != 0.0 && z(i, c) != 1.0) {
        throw DomainError("z row " + std::to_string(i) + " is not one-hot");
      }
      sum += z(i, c);
    }
    if (sum != 1.0) throw DomainError("z row " + std::to_string(i) + " is not one-hot");
  }
  if (static_cast<int>(mu.size()) != k || static_cast<int>(lambda.size()) != k || pi.size() != k) {
    throw DomainError("parameter count does not match K");
  }
  for (int c = 0; c < k; ++c) {
    if (mu[c].size() != d || lambda[c].rows() != d || lambda[c].cols() != d) {
      throw DomainError("parameter dimension mismatch for component " + std::to_string(c));
    }
  }
  if ((pi.array() < 0.0).any() || std::abs(pi.sum() - 1.0) > 1e-9) {
    throw DomainError("pi is not on the simplex");
  }
}

BgmmModel::BgmmModel(Eigen::MatrixXd data, BgmmPrior prior, int k, BgmmDomainOptions options)
    : data_(std::move(data)), prior_(std::move(prior)), k_(k), options_(options) {
  const int n = static_cast<int>(data_.rows());
  const int d = static_cast<int>(data_.cols());
  if (k < 1 || d < 1 || n < 1) throw ConfigError("need N >= K >= 1 and D >= 1");
  if (k > n) {
    throw ConfigError("K = " + std::to_string(k) + " exceeds N = " + std::to_string(n));
  }
  prior_.Validate(k, d);

  std::vector<double> lo(d), hi(d);
  for (int j = 0; j < d; ++j) {
    const double a = std::min(data_.col(j).minCoeff(), prior_.mu0(j));
    const double b = std::max(data_.col(j).maxCoeff(), prior_.mu0(j));
    const double range = b > a ? b - a : 1.0;
    lo[j] = a - options_.mean_margin * range;
    hi[j] = b + options_.mean_margin * range;
  }

  graph_ = std::make_shared<FactorGraph>();
  pi_ = graph_->add_variable({"pi", Domain::Simplex(k, options_.weight_floor), VarRole::kParameter});
  for (int c = 0; c < k; ++c) {
    mu_.push_back(graph_->add_variable(
        {"mu[" + std::to_string(c) + "]", Domain::Box(lo, hi), VarRole::kParameter}));
    lambda_.push_back(graph_->add_variable(
        {"Lambda[" + std::to_string(c) + "]",
         Domain::PositiveDefinite(d, options_.eig_floor, options_.trace_cap), VarRole::kParameter}));
  }
  for (int i = 0; i < n; ++i) {
    std::vector<VarId> row;
    for (int c = 0; c < k; ++c) {
      row.push_back(graph_->add_variable(
          {"z[" + std::to_string(i) + "," + std::to_string(c) + "]", Domain::Binary(),
           VarRole::kAssignment}));
    }
    graph_->add_one_hot(row);
    z_.insert(z_.end(), row.begin(), row.end());
  }

  std::vector<double> weight_coef(k);
  for (int c = 0; c < k; ++c) weight_coef[c] = prior_.alpha0(c) - 1.0;
  graph_->add_factor(std::make_shared<SimplexLogPriorFactor>(pi_, weight_coef, "weight_prior"));

  const Eigen::MatrixXd w0_inv = Sym(prior_.w0).inverse();
  const Eigen::MatrixXd c0 =
      0.5 * prior_.beta0 * prior_.mu0 * prior_.mu0.transpose() + 0.5 * w0_inv;
  const double a = prior_.nu0 - d;
  const double constant = 0.5 * d * std::log(prior_.beta0);
  for (int c = 0; c < k; ++c) {
    graph_->add_factor(std::make_shared<PrecisionPriorFactor>(lambda_[c], a, c0, constant));
  }
  for (int i = 0; i < n; ++i) {
    const Eigen::VectorXd y = data_.row(i).transpose();
    for (int c = 0; c < k; ++c) {
      const VarId z = z_var(i, c);
      graph_->add_factor(std::make_shared<AssignLogDetFactor>(z, lambda_[c], y));
      graph_->add_factor(std::make_shared<GatedQuadraticFormFactor>(
          "assign_quadratic", std::vector<VarId>{z, mu_[c], lambda_[c]}, 1.0, y));
      graph_->add_factor(std::make_shared<BinaryLogCoordinateFactor>(z, pi_, c, "assign_weight"));
    }
  }
  for (int c = 0; c < k; ++c) {
    graph_->add_factor(std::make_shared<GatedQuadraticFormFactor>(
        "mean_precision", std::vector<VarId>{mu_[c], lambda_[c]}, prior_.beta0, prior_.mu0));
  }
}

Assignment BgmmModel::ToAssignment(const BgmmLatent& latent) const {
  latent.Validate(n(), k_, d());
  Assignment x(graph_->num_variables());
  x[pi_] = std::vector<double>(latent.pi.data(), latent.pi.data() + k_);
  for (int c = 0; c < k_; ++c) {
    x[mu_[c]] = std::vector<double>(latent.mu[c].data(), latent.mu[c].data() + d());
    x[lambda_[c]] = Flatten(latent.lambda[c]);
  }
  for (int i = 0; i < n(); ++i) {
    for (int c = 0; c < k_; ++c) x[z_var(i, c)] = {latent.z(i, c)};
  }
  return x;
}

BgmmLatent BgmmModel::FromAssignment(const Assignment& x) const {
  BgmmLatent out;
  out.pi = AsVector(x[pi_]);
  for (int c = 0; c < k_; ++c) {
    out.mu.push_back(AsVector(x[mu_[c]]));
    out.lambda.push_back(AsMatrix(x[lambda_[c]], d()));
  }
  out.z.resize(n(), k_);
  for (int i = 0; i < n(); ++i) {
    for (int c = 0; c < k_; ++c) out.z(i, c) = x[z_var(i, c)][0];
  }
  return out;
}

Assignment BgmmModel::ToFeasibleAssignment(const BgmmLatent& latent) const {
  Assignment x = ToAssignment(latent);
  for (VarId v = 0; v < graph_->num_variables(); ++v) graph_->variable(v).domain.project(x[v]);
  return x;
}

BgmmLatent BgmmModel::ConditionalOptimum(const std::vector<int>& labels) const {
  const int dd = d();
  if (static_cast<int>(labels.size()) != n()) throw DomainError("label count mismatch");
  BgmmLatent out;
  out.z = BgmmLatent::OneHot(labels, k_);
  const std::vector<int> counts = Counts(labels, k_);

  std::vector<double> weight_coef(k_), zero(k_, 0.0);
  for (int c = 0; c < k_; ++c) weight_coef[c] = counts[c] + prior_.alpha0(c) - 1.0;
  out.pi = AsVector(MaxLogLinearOnSimplex(weight_coef, zero, options_.weight_floor).argmax);

  const Domain& box = graph_->variable(mu_[0]).domain;
  const Eigen::VectorXd lo = AsVector(box.lower());
  const Eigen::VectorXd hi = AsVector(box.upper());
  const Eigen::MatrixXd w0_inv = Sym(prior_.w0).inverse();
  for (int c = 0; c < k_; ++c) {
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(dd);
    for (int i = 0; i < n(); ++i) {
      if (labels[i] == c) sum += data_.row(i).transpose();
    }
    const double weight = counts[c] + prior_.beta0;
    const Eigen::VectorXd mean = (sum + prior_.beta0 * prior_.mu0) / weight;
    Eigen::VectorXd mu = mean.cwiseMax(lo).cwiseMin(hi);
    auto precision_for = [&](const Eigen::VectorXd& m) {
      Eigen::MatrixXd s = w0_inv + prior_.beta0 * (m - prior_.mu0) * (m - prior_.mu0).transpose();
      for (int i = 0; i < n(); ++i) {
        if (labels[i] != c) continue;
        const Eigen::VectorXd r = data_.row(i).transpose() - m;
        s += r * r.transpose();
      }
      const SupResult best = MaxLogDetLinearOnPd(counts[c] + prior_.nu0 - dd, 0.5 * Sym(s),
                                                 options_.eig_floor, options_.trace_cap);
      return Eigen::MatrixXd(AsMatrix(best.argmax, dd));
    };
    Eigen::MatrixXd lambda = precision_for(mu);
    if ((mu - mean).norm() > 0.0 && dd <= 8) {
      // Clipped mean: re-optimize it for the current precision on the box.
      const Eigen::MatrixXd q = weight * lambda;
      const SupResult m = MaxQuadraticOnBox(q, q * mean, lo, hi);
      mu = AsVector(m.argmax);
      lambda = precision_for(mu);
    }
    out.mu.push_back(mu);
    out.lambda.push_back(lambda);
  }
  return out;
}

Assignment BgmmModel::Polish(const Assignment& x) const {
  std::vector<int> labels(n(), 0);
  for (int i = 0; i < n(); ++i) {
    double best = -kInf;
    for (int c = 0; c < k_; ++c) {
      if (x[z_var(i, c)][0] > best) {
        best = x[z_var(i, c)][0];
        labels[i] = c;
      }
    }
  }
  return ToAssignment(ConditionalOptimum(labels));
}

std::vector<LinearConstraint> BgmmModel::Constraints(const std::vector<PairConstraint>& pairs,
                                                     int min_cluster_size) const {
  CheckConstraintClosure(n(), k_, pairs, min_cluster_size);
  std::vector<LinearConstraint> rows;
  for (const auto& p : pairs) {
    const std::string tag = "(" + std::to_string(p.i) + "," + std::to_string(p.j) + ")";
    for (int c = 0; c < k_; ++c) {
      if (p.kind == PairKind::kMustLink) {
        rows.push_back({{{z_var(p.i, c), 1.0}, {z_var(p.j, c), -1.0}}, Sense::kEqual, 0.0,
                        "must_link" + tag});
      } else {
        rows.push_back({{{z_var(p.i, c), 1.0}, {z_var(p.j, c), 1.0}}, Sense::kLessEqual, 1.0,
                        "cannot_link" + tag});
      }
    }
  }
  if (min_cluster_size > 0) {
    for (int c = 0; c < k_; ++c) {
      LinearConstraint row;
      for (int i = 0; i < n(); ++i) row.terms.push_back({z_var(i, c), 1.0});
      row.sense = Sense::kGreaterEqual;
      row.rhs = min_cluster_size;
      row.label = "min_size[" + std::to_string(c) + "]";
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

std::shared_ptr<const FactorGraph> BuildBgmmGraph(const Eigen::MatrixXd& data,
                                                  const BgmmPrior& prior, int k) {
  return BgmmModel(data, prior, k).graph();
}

double LogMapBgmm(const Eigen::MatrixXd& data, const BgmmPrior& prior, const BgmmLatent& latent) {
  const int k = static_cast<int>(latent.z.cols());
  latent.Validate(static_cast<int>(data.rows()), k, static_cast<int>(data.cols()));
  const BgmmModel model(data, prior, k);
  return model.graph()->eval_log_posterior(model.ToAssignment(latent));
}

std::optional<std::vector<int>> CheckConstraintClosure(int n, int k,
                                                       const std::vector<PairConstraint>& pairs,
                                                       int min_cluster_size) {
  if (min_cluster_size < 0) throw DomainError("minimum cluster size must be non-negative");
  if (static_cast<long long>(k) * min_cluster_size > n) {
    throw InfeasibleError("K * minimum cluster size exceeds N");
  }
  const Components comp = BuildComponents(n, pairs);
  const int m = static_cast<int>(comp.members.size());
  if (min_cluster_size > 0 && m < k) {
    throw InfeasibleError("fewer must-link components than clusters");
  }

  std::vector<int> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    if (comp.apart[a].size() != comp.apart[b].size()) {
      return comp.apart[a].size() > comp.apart[b].size();
    }
    return comp.members[a].size() > comp.members[b].size();
  });
  std::vector<int> suffix(m + 1, 0);
  for (int t = m - 1; t >= 0; --t) {
    suffix[t] = suffix[t + 1] + static_cast<int>(comp.members[order[t]].size());
  }

  std::vector<int> color(m, -1), counts(k, 0);
  long long budget = 2000000;
  bool exhausted = false;
  std::function<bool(int, int)> search = [&](int t, int used) -> bool {
    if (--budget < 0) {
      exhausted = true;
      return false;
    }
    int deficit = 0;
    for (int c = 0; c < k; ++c) deficit += std::max(0, min_cluster_size - counts[c]);
    if (deficit > suffix[t]) return false;
    if (t == m) return true;
    const int a = order[t];
    const int limit = std::min(k, used + 1);
    for (int c = 0; c < limit; ++c) {
      bool clash = false;
      for (int b : comp.apart[a]) clash = clash || color[b] == c;
      if (clash) continue;
      color[a] = c;
      counts[c] += static_cast<int>(comp.members[a].size());
      if (search(t + 1, std::max(used, c + 1))) return true;
      counts[c] -= static_cast<int>(comp.members[a].size());
      color[a] = -1;
      if (exhausted) return false;
    }
    return false;
  };
  if (search(0, 0)) {
    std::vector<int> labels(n);
    for (int i = 0; i < n; ++i) labels[i] = color[comp.of[i]];
    return labels;
  }
  if (exhausted) return std::nullopt;
  throw InfeasibleError("no labeling satisfies the pair and size constraints");
}

bool LabelsSatisfy(const std::vector<int>& labels, int k, const std::vector<PairConstraint>& pairs,
                   int min_cluster_size) {
  for (const auto& p : pairs) {
    const bool same = labels.at(p.i) == labels.at(p.j);
    if (same != (p.kind == PairKind::kMustLink)) return false;
  }
  if (min_cluster_size > 0) {
    for (int c : Counts(labels, k)) {
      if (c < min_cluster_size) return false;
    }
  }
  return true;
}

std::vector<int> RepairLabels(std::vector<int> labels, int k,
                              const std::vector<PairConstraint>& pairs, int min_cluster_size) {
  const int n = static_cast<int>(labels.size());
  if (LabelsSatisfy(labels, k, pairs, min_cluster_size)) return labels;
  const Components comp = BuildComponents(n, pairs);
  const int m = static_cast<int>(comp.members.size());

  std::vector<int> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return comp.members[a].size() > comp.members[b].size();
  });
  std::vector<int> color(m, -1);
  bool stuck = false;
  for (int a : order) {
    std::vector<int> votes(k, 0);
    for (int i : comp.members[a]) ++votes[labels[i]];
    std::vector<bool> allowed(k, true);
    for (int b : comp.apart[a]) {
      if (color[b] >= 0) allowed[color[b]] = false;
    }
    int best = -1;
    for (int c = 0; c < k; ++c) {
      if (allowed[c] && (best < 0 || votes[c] > votes[best])) best = c;
    }
    if (best < 0) {
      stuck = true;
      break;
    }
    color[a] = best;
  }

  if (!stuck && min_cluster_size > 0) {
    std::vector<int> counts(k, 0);
    for (int a = 0; a < m; ++a) counts[color[a]] += static_cast<int>(comp.members[a].size());
    for (int guard = 0; guard < n + k && !stuck; ++guard) {
      int target = -1;
      for (int c = 0; c < k; ++c) {
        if (counts[c] < min_cluster_size && (target < 0 || counts[c] < counts[target])) target = c;
      }
      if (target < 0) break;
      int pick = -1;
      for (int a = 0; a < m; ++a) {
        const int size = static_cast<int>(comp.members[a].size());
        if (color[a] == target || counts[color[a]] - size < min_cluster_size) continue;
        bool clash = false;
        for (int b : comp.apart[a]) clash = clash || color[b] == target;
        if (clash) continue;
        if (pick < 0 || size < static_cast<int>(comp.members[pick].size())) pick = a;
      }
      if (pick < 0) {
        stuck = true;
        break;
      }
      const int size = static_cast<int>(comp.members[pick].size());
      counts[color[pick]] -= size;
      counts[target] += size;
      color[pick] = target;
    }
  }

  if (!stuck) {
    for (int i = 0; i < n; ++i) labels[i] = color[comp.of[i]];
    if (LabelsSatisfy(labels, k, pairs, min_cluster_size)) return labels;
  }
  auto fallback = CheckConstraintClosure(n, k, pairs, min_cluster_size);
  if (!fallback) throw InfeasibleError("could not find a labeling satisfying the constraints");
  return *fallback;
}

NonconcavityWitness Symmetric2x2Witness(double a, double b, double c, std::string block) {
  NonconcavityWitness w;
  const double mid = 0.5 * (a + c);
  const double rad = 0.5 * std::sqrt((a - c) * (a - c) + 4.0 * b * b);
  w.eigenvalue = mid + rad;
  w.other = mid - rad;
  w.cross = b;
  w.curvature = a != 0.0 ? a : c;
  w.block = std::move(block);
  w.degenerate = b == 0.0;
  return w;
}

NonconcavityWitness BgmmNonconcavityWitness(const Eigen::MatrixXd& data, const BgmmLatent& point,
                                            int i, int k) {
  const int d = static_cast<int>(data.cols());
  if (i < 0 || i >= data.rows() || k < 0 || k >= point.z.cols()) {
    throw DomainError("witness index out of range");
  }
  if (point.pi.size() <= k || !(point.pi(k) > 0.0)) {
    throw BoundaryError("pi", "weight of component " + std::to_string(k) + " is on the boundary");
  }
  const Eigen::MatrixXd lambda = Sym(point.lambda.at(k));
  if (lambda.rows() != d || !std::isfinite(LogDetPd(lambda))) {
    throw BoundaryError("Lambda[" + std::to_string(k) + "]", "precision is not positive definite");
  }
  const Eigen::VectorXd y = data.row(i).transpose();
  const Eigen::MatrixXd inv = lambda.inverse();
  const Eigen::MatrixXd dir = inv - y * y.transpose();
  const double norm = dir.norm();
  double cross = 0.0, curvature = 0.0;
  if (norm > 0.0) {
    const Eigen::MatrixXd e = dir / norm;
    cross = 0.5 * norm;
    curvature = -0.5 * point.z(i, k) * (inv * e * inv * e).trace();
  }
  return Symmetric2x2Witness(0.0, cross, curvature,
                             "assign_logdet[" + std::to_string(i) + "," + std::to_string(k) + "]");
}

}  // namespace gbdmap
