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

// Gibbs samplers used as baselines: a blocked conjugate sampler for the
// Gaussian mixture and a collapsed sampler for LDA.

#ifndef GBDMAP_GIBBS_H_
#define GBDMAP_GIBBS_H_

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gbdmap/bgmm.h"
#include "gbdmap/lda.h"

namespace gbdmap {

using Rng = std::mt19937_64;

struct ChainConfig {
  int iterations = 1000;
  int burn_in = 100;
  std::uint64_t seed = 1;
  int thin = 1;

  void Validate() const;
};

struct ModeExtraction {
  // Samples are rounded to multiples of 1/scale before taking the mode.
  int scale = 100;
};

// Primitive draws.
double SampleGamma(Rng& rng, double shape);
Eigen::VectorXd SampleDirichlet(Rng& rng, const Eigen::VectorXd& alpha);
// Wishart with scale matrix `scale` and `dof` degrees of freedom, by the
// Bartlett decomposition.
Eigen::MatrixXd SampleWishart(Rng& rng, const Eigen::MatrixXd& scale, double dof);
// Index drawn with probability proportional to exp(log_weight).
int SampleCategorical(Rng& rng, const std::vector<double>& log_weight);

struct NormalWishart {
  Eigen::VectorXd mean;
  double beta = 1.0;
  Eigen::MatrixXd scale;  // Wishart scale matrix W
  double dof = 1.0;
};

// Conjugate posterior of (mu, Lambda) given the rows of `data` with `labels`
// equal to `k`; the prior itself when the cluster is empty.
NormalWishart NormalWishartPosterior(const Eigen::MatrixXd& data, const std::vector<int>& labels,
                                     int k, const BgmmPrior& prior);
void SampleNormalWishart(Rng& rng, const NormalWishart& nw, Eigen::VectorXd& mu,
                         Eigen::MatrixXd& lambda);

// Log weights of the conditional of one label given the parameters.
std::vector<double> BgmmLabelLogWeights(const Eigen::VectorXd& y, const Eigen::VectorXd& pi,
                                        const std::vector<Eigen::VectorXd>& mu,
                                        const std::vector<Eigen::MatrixXd>& lambda);

// Permutation p maximizing #{i : p[from[i]] == to[i]} (Hungarian method).
std::vector<int> BestLabelPermutation(const std::vector<int>& from, const std::vector<int>& to,
                                      int k);

// Most frequent value after rounding to multiples of 1/scale, ties to the
// smaller value.
double QuantizedMode(const std::vector<double>& values, int scale);

struct BgmmChainResult {
  std::vector<BgmmLatent> samples;  // post burn-in, thinned, labels aligned
  BgmmLatent mode;
  std::vector<int> final_labels;
  std::string trace_csv;
};

// `init` labels are used for the first sweep when non-empty; otherwise the
// chain starts from k-means++ seeding.
BgmmChainResult GibbsBgmm(const Eigen::MatrixXd& data, const BgmmPrior& prior, int k,
                          const ChainConfig& chain, const ModeExtraction& mode = {},
                          const std::vector<int>& init = {}, double weight_floor = 1e-6);

struct LdaChainResult {
  LdaLatent mode;
  // Smoothed count ratios averaged over kept sweeps, with majority topics.
  LdaLatent mean;
  std::string trace_csv;
};

// Collapsed-sampler log weights for one token with its own count removed.
std::vector<double> LdaTopicLogWeights(const std::vector<double>& doc_topic,
                                       const Eigen::MatrixXd& topic_word,
                                       const std::vector<double>& topic_total, int word,
                                       const LdaPrior& prior);

LdaChainResult GibbsLda(const Corpus& corpus, const LdaPrior& prior, int k,
                        const ChainConfig& chain, const ModeExtraction& mode = {},
                        double simplex_floor = 1e-6);

// Topics fixed to `beta`; only document mixtures are sampled. Returns the
// averaged smoothed mixtures.
Eigen::MatrixXd GibbsLdaFoldIn(const std::vector<std::vector<int>>& docs,
                               const Eigen::MatrixXd& beta, const Eigen::VectorXd& alpha,
                               const ChainConfig& chain);

}  // namespace gbdmap

#endif  // GBDMAP_GIBBS_H_
