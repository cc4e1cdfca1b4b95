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

// Smoothed latent Dirichlet allocation with token-level topic indicators.

#ifndef GBDMAP_LDA_H_
#define GBDMAP_LDA_H_

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gbdmap/bgmm.h"
#include "gbdmap/factor_graph.h"

namespace gbdmap {

struct Corpus {
  std::vector<std::vector<int>> docs;
  std::vector<std::string> vocab;

  int vocab_size() const { return static_cast<int>(vocab.size()); }
  std::size_t num_tokens() const;
  // Throws DataError when a token id is outside the vocabulary.
  void Validate() const;
};

struct LdaPrior {
  Eigen::VectorXd alpha0;  // K
  Eigen::VectorXd eta0;    // V

  // alpha0 = 1/K, eta0 = 0.1.
  static LdaPrior Defaults(int k, int v);
  void Validate(int k, int v) const;
};

struct LdaLatent {
  std::vector<std::vector<int>> z;  // topic of each token, zero-based
  Eigen::MatrixXd theta;            // M x K
  Eigen::MatrixXd beta;             // K x V

  // Throws StructuralError on shape mismatches, DomainError otherwise.
  void Validate(const Corpus& corpus, int k) const;
};

struct LdaDomainOptions {
  double simplex_floor = 1e-6;
};

class LdaModel {
 public:
  LdaModel(Corpus corpus, LdaPrior prior, int k, LdaDomainOptions options = {});
  // Fold-in variant: topic-word distributions are fixed to `beta` and only
  // document mixtures and token topics are latent.
  static LdaModel FoldIn(Corpus corpus, LdaPrior prior, const Eigen::MatrixXd& beta,
                         LdaDomainOptions options = {});

  std::shared_ptr<const FactorGraph> graph() const { return graph_; }
  const Corpus& corpus() const { return corpus_; }
  const LdaPrior& prior() const { return prior_; }
  int k() const { return k_; }
  bool fixed_topics() const { return fixed_beta_.has_value(); }

  VarId beta_var(int k) const { return beta_.at(k); }
  VarId theta_var(int d) const { return theta_[d]; }
  VarId z_var(int d, int n, int k) const {
    return z_[(doc_offset_[d] + static_cast<std::size_t>(n)) * k_ + k];
  }

  Assignment ToAssignment(const LdaLatent& latent) const;
  LdaLatent FromAssignment(const Assignment& x) const;
  // Exact maximizer of the log posterior over theta (and beta unless fixed)
  // within the floored simplexes, for fixed token topics.
  LdaLatent ConditionalOptimum(const std::vector<std::vector<int>>& z) const;
  Assignment Polish(const Assignment& x) const;
  // Token topics from an assignment, ties to the lowest topic.
  std::vector<std::vector<int>> Topics(const Assignment& x) const;

 private:
  LdaModel(Corpus corpus, LdaPrior prior, int k, LdaDomainOptions options,
           std::optional<Eigen::MatrixXd> fixed_beta);

  Corpus corpus_;
  LdaPrior prior_;
  int k_;
  LdaDomainOptions options_;
  std::optional<Eigen::MatrixXd> fixed_beta_;
  std::shared_ptr<FactorGraph> graph_;
  std::vector<VarId> beta_;
  std::vector<VarId> theta_;
  std::vector<VarId> z_;
  std::vector<std::size_t> doc_offset_;
};

std::shared_ptr<const FactorGraph> BuildLdaGraph(const Corpus& corpus, const LdaPrior& prior,
                                                 int k);

// Unnormalized log posterior; -inf when a used simplex coordinate is 0.
double LogMapLda(const Corpus& corpus, const LdaPrior& prior, const LdaLatent& latent);

struct HeldOutScore {
  double loglik = 0.0;
  double perplexity = 0.0;
  std::size_t tokens = 0;
};

// theta rows align with the documents in `docs`.
HeldOutScore HeldOutLogLik(const Eigen::MatrixXd& beta, const Eigen::MatrixXd& theta,
                           const std::vector<std::vector<int>>& docs);

// Top `count` word ids per topic, by probability then by id.
std::vector<std::vector<int>> TopWords(const Eigen::MatrixXd& beta, int count);

// Hessian of the token-topic factor for token (d, n) and topic k in the
// (theta_dk, z_dnk) plane.
NonconcavityWitness LdaNonconcavityWitness(const Corpus& corpus, const LdaLatent& point, int d,
                                           int n, int k);

}  // namespace gbdmap

#endif  // GBDMAP_LDA_H_
