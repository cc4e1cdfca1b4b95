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

// Bayesian Gaussian mixture with a Dirichlet prior on the weights and a
// Normal-Wishart prior on each component's mean and precision.

#ifndef GBDMAP_BGMM_H_
#define GBDMAP_BGMM_H_

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gbdmap/factor_graph.h"
#include "gbdmap/master.h"

namespace gbdmap {

struct BgmmPrior {
  Eigen::VectorXd alpha0;
  double beta0 = 1.0;
  Eigen::VectorXd mu0;
  Eigen::MatrixXd w0;
  double nu0 = 0.0;

  // alpha0 = 1, beta0 = 1, mu0 = data mean, W0 = I, nu0 = D + 2.
  static BgmmPrior Defaults(const Eigen::MatrixXd& data, int k);
  // Throws DomainError when shapes or positivity conditions fail.
  void Validate(int k, int d) const;
};

struct BgmmLatent {
  Eigen::MatrixXd z;  // N x K one-hot
  std::vector<Eigen::VectorXd> mu;
  std::vector<Eigen::MatrixXd> lambda;
  Eigen::VectorXd pi;

  // Zero-based label of each row.
  std::vector<int> Labels() const;
  static Eigen::MatrixXd OneHot(const std::vector<int>& labels, int k);
  void Validate(int n, int k, int d) const;
};

enum class PairKind { kMustLink, kCannotLink };

struct PairConstraint {
  PairKind kind = PairKind::kMustLink;
  int i = 0;
  int j = 0;
};

struct BgmmDomainOptions {
  double weight_floor = 1e-6;
  double eig_floor = 1e-8;
  double trace_cap = 1e4;
  // The mean box spans the data range widened by this fraction on each side.
  double mean_margin = 1.0;
};

class BgmmModel {
 public:
  BgmmModel(Eigen::MatrixXd data, BgmmPrior prior, int k, BgmmDomainOptions options = {});

  std::shared_ptr<const FactorGraph> graph() const { return graph_; }
  const Eigen::MatrixXd& data() const { return data_; }
  const BgmmPrior& prior() const { return prior_; }
  const BgmmDomainOptions& options() const { return options_; }
  int n() const { return static_cast<int>(data_.rows()); }
  int k() const { return k_; }
  int d() const { return static_cast<int>(data_.cols()); }

  VarId pi_var() const { return pi_; }
  VarId mu_var(int k) const { return mu_[k]; }
  VarId lambda_var(int k) const { return lambda_[k]; }
  VarId z_var(int i, int k) const { return z_[static_cast<std::size_t>(i) * k_ + k]; }

  Assignment ToAssignment(const BgmmLatent& latent) const;
  BgmmLatent FromAssignment(const Assignment& x) const;
  // Projects continuous parameters into the solver domains.
  Assignment ToFeasibleAssignment(const BgmmLatent& latent) const;
  // Maximizer of the log posterior over (pi, mu, Lambda) inside the solver
  // domains for fixed labels (means are clipped to their box).
  BgmmLatent ConditionalOptimum(const std::vector<int>& labels) const;
  Assignment Polish(const Assignment& x) const;

  // Rows over z. Throws InfeasibleError when the closure is contradictory.
  std::vector<LinearConstraint> Constraints(const std::vector<PairConstraint>& pairs,
                                            int min_cluster_size) const;

 private:
  Eigen::MatrixXd data_;
  BgmmPrior prior_;
  int k_;
  BgmmDomainOptions options_;
  std::shared_ptr<FactorGraph> graph_;
  VarId pi_ = 0;
  std::vector<VarId> mu_;
  std::vector<VarId> lambda_;
  std::vector<VarId> z_;
};

std::shared_ptr<const FactorGraph> BuildBgmmGraph(const Eigen::MatrixXd& data,
                                                  const BgmmPrior& prior, int k);

// Unnormalized log posterior; terms that do not depend on latent variables
// are dropped.
double LogMapBgmm(const Eigen::MatrixXd& data, const BgmmPrior& prior, const BgmmLatent& latent);

// Detects contradictory must-link/cannot-link/minimum-size requirements.
// Returns a feasible labeling when one was found within the search budget.
std::optional<std::vector<int>> CheckConstraintClosure(int n, int k,
                                                       const std::vector<PairConstraint>& pairs,
                                                       int min_cluster_size);

// Edits labels as little as practical so that every requirement holds.
std::vector<int> RepairLabels(std::vector<int> labels, int k,
                              const std::vector<PairConstraint>& pairs, int min_cluster_size);

bool LabelsSatisfy(const std::vector<int>& labels, int k, const std::vector<PairConstraint>& pairs,
                   int min_cluster_size);

// Eigen-analysis of a symmetric 2x2 Hessian block [[a, b], [b, c]].
struct NonconcavityWitness {
  double eigenvalue = 0.0;  // larger eigenvalue
  double other = 0.0;       // smaller eigenvalue
  double cross = 0.0;       // off-diagonal entry
  double curvature = 0.0;   // the nonzero diagonal entry
  std::string block;
  bool degenerate = false;  // off-diagonal entry vanishes
};

NonconcavityWitness Symmetric2x2Witness(double a, double b, double c, std::string block);

// Hessian of the log-det assignment factor for point i and component k,
// restricted to the plane spanned by z_ik and the precision direction
// proportional to Lambda_k^{-1} - y_i y_i'.
NonconcavityWitness BgmmNonconcavityWitness(const Eigen::MatrixXd& data, const BgmmLatent& point,
                                            int i, int k);

}  // namespace gbdmap

#endif  // GBDMAP_BGMM_H_
