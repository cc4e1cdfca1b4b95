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

#include "gbdmap/gibbs.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/distributions/beta.hpp>
#include <boost/math/distributions/chi_squared.hpp>

#include "gbdmap/errors.h"
#include "gtest/gtest.h"

namespace gbdmap {
namespace {

constexpr int kDraws = 50000;

// Upper-tail p-value of Pearson's statistic.
double ChiSquarePValue(const std::vector<double>& observed, const std::vector<double>& expected) {
  double stat = 0.0;
  for (std::size_t j = 0; j < observed.size(); ++j) {
    stat += (observed[j] - expected[j]) * (observed[j] - expected[j]) / expected[j];
  }
  boost::math::chi_squared dist(static_cast<double>(observed.size() - 1));
  return boost::math::cdf(boost::math::complement(dist, stat));
}

// Equiprobable-bin test of draws against a continuous quantile function.
template <typename Dist>
double BinnedPValue(const std::vector<double>& draws, const Dist& dist, int bins) {
  std::vector<double> edges;
  for (int b = 1; b < bins; ++b) edges.push_back(boost::math::quantile(dist, b / double(bins)));
  std::vector<double> observed(bins, 0.0), expected(bins, draws.size() / double(bins));
  for (double x : draws) {
    observed[std::upper_bound(edges.begin(), edges.end(), x) - edges.begin()] += 1.0;
  }
  return ChiSquarePValue(observed, expected);
}

double CategoricalPValue(Rng& rng, const std::vector<double>& log_w, const std::vector<double>& p) {
  std::vector<double> observed(p.size(), 0.0), expected(p.size());
  for (int t = 0; t < kDraws; ++t) observed[SampleCategorical(rng, log_w)] += 1.0;
  for (std::size_t j = 0; j < p.size(); ++j) expected[j] = kDraws * p[j];
  return ChiSquarePValue(observed, expected);
}

TEST(GibbsTest, CategoricalMatchesWeights) {
  Rng rng(1);
  const std::vector<double> p = {0.1, 0.25, 0.05, 0.6};
  std::vector<double> lw;
  for (double q : p) lw.push_back(std::log(q) + 7.0);
  EXPECT_GT(CategoricalPValue(rng, lw, p), 1e-3);
}

TEST(GibbsTest, DirichletMarginalIsBeta) {
  Rng rng(2);
  Eigen::VectorXd a(3);
  a << 0.7, 2.0, 3.5;
  std::vector<double> first;
  for (int t = 0; t < kDraws; ++t) first.push_back(SampleDirichlet(rng, a)(0));
  const boost::math::beta_distribution<double> marginal(a(0), a.sum() - a(0));
  EXPECT_GT(BinnedPValue(first, marginal, 20), 1e-3);
}

TEST(GibbsTest, WishartTraceIsChiSquare) {
  Rng rng(3);
  Eigen::MatrixXd w(3, 3);
  w << 2.0, 0.3, 0.1, 0.3, 1.0, -0.2, 0.1, -0.2, 0.5;
  const double dof = 5.5;
  const Eigen::MatrixXd inv = w.inverse();
  std::vector<double> stat;
  for (int t = 0; t < kDraws; ++t) stat.push_back((inv * SampleWishart(rng, w, dof)).trace());
  EXPECT_GT(BinnedPValue(stat, boost::math::chi_squared(dof * 3), 20), 1e-3);
}

TEST(GibbsTest, NormalGivenPrecisionHasChiSquareForm) {
  Rng rng(4);
  NormalWishart nw;
  nw.mean = Eigen::Vector2d(1.0, -2.0);
  nw.beta = 3.0;
  nw.scale = Eigen::Matrix2d::Identity() * 0.5;
  nw.dof = 4.0;
  std::vector<double> stat;
  Eigen::VectorXd mu;
  Eigen::MatrixXd lambda;
  for (int t = 0; t < kDraws; ++t) {
    SampleNormalWishart(rng, nw, mu, lambda);
    const Eigen::VectorXd r = mu - nw.mean;
    stat.push_back(nw.beta * r.dot(lambda * r));
  }
  EXPECT_GT(BinnedPValue(stat, boost::math::chi_squared(2.0), 20), 1e-3);
}

TEST(GibbsTest, LabelConditionalMatchesDensityRatio) {
  Rng rng(5);
  const Eigen::Vector2d y(0.3, -0.4);
  Eigen::VectorXd pi(3);
  pi << 0.2, 0.5, 0.3;
  std::vector<Eigen::VectorXd> mu = {Eigen::Vector2d(0, 0), Eigen::Vector2d(1, -1),
                                     Eigen::Vector2d(-0.5, 0.5)};
  std::vector<Eigen::MatrixXd> lambda;
  Eigen::Matrix2d l;
  l << 2.0, 0.4, 0.4, 1.0;
  lambda.push_back(l);
  lambda.push_back(Eigen::Matrix2d::Identity() * 0.5);
  lambda.push_back(Eigen::Matrix2d::Identity() * 3.0);
  std::vector<double> p(3);
  for (int k = 0; k < 3; ++k) {
    const Eigen::VectorXd r = y - mu[k];
    p[k] = pi(k) * std::sqrt(lambda[k].determinant()) * std::exp(-0.5 * r.dot(lambda[k] * r));
  }
  const double s = std::accumulate(p.begin(), p.end(), 0.0);
  for (double& q : p) q /= s;
  EXPECT_GT(CategoricalPValue(rng, BgmmLabelLogWeights(y, pi, mu, lambda), p), 1e-3);
}

TEST(GibbsTest, CollapsedTopicConditionalMatchesCounts) {
  Rng rng(6);
  const LdaPrior prior = LdaPrior::Defaults(3, 4);
  const std::vector<double> doc = {2.0, 0.0, 5.0};
  Eigen::MatrixXd tw(3, 4);
  tw << 1, 0, 3, 2, 4, 4, 0, 1, 0, 2, 2, 2;
  const std::vector<double> totals = {6.0, 9.0, 6.0};
  std::vector<double> p(3);
  for (int t = 0; t < 3; ++t) p[t] = (doc[t] + 1.0 / 3) * (tw(t, 2) + 0.1) / (totals[t] + 0.4);
  const double s = std::accumulate(p.begin(), p.end(), 0.0);
  for (double& q : p) q /= s;
  EXPECT_GT(CategoricalPValue(rng, LdaTopicLogWeights(doc, tw, totals, 2, prior), p), 1e-3);
}

TEST(GibbsTest, HungarianMatchesBruteForce) {
  Rng rng(7);
  for (int t = 0; t < 50; ++t) {
    const int k = 2 + t % 4;
    std::uniform_int_distribution<int> pick(0, k - 1);
    std::vector<int> a(40), b(40);
    for (int i = 0; i < 40; ++i) {
      a[i] = pick(rng);
      b[i] = pick(rng);
    }
    auto overlap = [&](const std::vector<int>& perm) {
      int c = 0;
      for (int i = 0; i < 40; ++i) c += perm[a[i]] == b[i];
      return c;
    };
    std::vector<int> perm(k);
    std::iota(perm.begin(), perm.end(), 0);
    int best = 0;
    do best = std::max(best, overlap(perm));
    while (std::next_permutation(perm.begin(), perm.end()));
    EXPECT_EQ(overlap(BestLabelPermutation(a, b, k)), best);
  }
}

TEST(GibbsTest, QuantizedModeRounds) {
  EXPECT_DOUBLE_EQ(QuantizedMode({0.123, 0.118, 0.5, 0.121}, 100), 0.12);
  EXPECT_DOUBLE_EQ(QuantizedMode({0.3, 0.1}, 10), 0.1);
  EXPECT_THROW(QuantizedMode({}, 10), DomainError);
}

TEST(GibbsTest, SingleClusterMeanMatchesConjugatePosterior) {
  Rng data_rng(8);
  std::normal_distribution<double> g(4.0, 0.5);
  Eigen::MatrixXd y(40, 1);
  for (int i = 0; i < 40; ++i) y(i, 0) = g(data_rng);
  const BgmmPrior prior = BgmmPrior::Defaults(y, 1);
  ChainConfig chain;
  chain.iterations = 3000;
  chain.burn_in = 100;
  chain.seed = 9;
  const BgmmChainResult r = GibbsBgmm(y, prior, 1, chain);
  const NormalWishart post = NormalWishartPosterior(y, std::vector<int>(40, 0), 0, prior);
  double mean = 0.0, sq = 0.0;
  for (const auto& s : r.samples) mean += s.mu[0](0);
  mean /= r.samples.size();
  for (const auto& s : r.samples) sq += (s.mu[0](0) - mean) * (s.mu[0](0) - mean);
  const double se = std::sqrt(sq / (r.samples.size() - 1)) / std::sqrt(double(r.samples.size()));
  EXPECT_LE(std::abs(mean - post.mean(0)), 3.0 * se);
}

TEST(GibbsTest, FixedSeedIsDeterministic) {
  Rng data_rng(10);
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::MatrixXd y(20, 2);
  for (int i = 0; i < 20; ++i) y.row(i) << g(data_rng), g(data_rng);
  ChainConfig chain;
  chain.iterations = 50;
  chain.burn_in = 10;
  chain.seed = 11;
  const auto a = GibbsBgmm(y, BgmmPrior::Defaults(y, 2), 2, chain);
  const auto b = GibbsBgmm(y, BgmmPrior::Defaults(y, 2), 2, chain);
  EXPECT_EQ(a.trace_csv, b.trace_csv);
  EXPECT_EQ(a.final_labels, b.final_labels);
  chain.seed = 12;
  EXPECT_NE(GibbsBgmm(y, BgmmPrior::Defaults(y, 2), 2, chain).trace_csv, a.trace_csv);
}

TEST(GibbsTest, RecoversPlantedSeparatedClusters) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    Rng data_rng(100 + seed);
    std::normal_distribution<double> g(0.0, 0.3);
    Eigen::MatrixXd y(30, 2);
    std::vector<int> plant(30);
    for (int i = 0; i < 30; ++i) {
      plant[i] = i < 15 ? 0 : 1;
      const double c = plant[i] == 0 ? -10.0 : 10.0;
      y.row(i) << c + g(data_rng), c + g(data_rng);
    }
    ChainConfig chain;
    chain.iterations = 200;
    chain.burn_in = 50;
    chain.seed = seed;
    const BgmmChainResult r = GibbsBgmm(y, BgmmPrior::Defaults(y, 2), 2, chain);
    const std::vector<int> got = r.mode.Labels();
    const bool same = got == plant;
    std::vector<int> swapped(plant);
    for (int& l : swapped) l = 1 - l;
    EXPECT_TRUE(same || got == swapped) << "seed " << seed;
    EXPECT_NEAR(r.mode.pi.sum(), 1.0, 1e-12);
    EXPECT_TRUE(std::isfinite(LogMapBgmm(y, BgmmPrior::Defaults(y, 2), r.mode)));
  }
}

TEST(GibbsTest, SingleTopicUsesSmoothedFrequencies) {
  Corpus c;
  c.vocab = {"a", "b", "c"};
  c.docs = {{0, 0, 1}, {0, 2}};
  const LdaPrior prior = LdaPrior::Defaults(1, 3);
  ChainConfig chain;
  chain.iterations = 20;
  chain.burn_in = 5;
  const LdaChainResult r = GibbsLda(c, prior, 1, chain);
  for (const auto& doc : r.mean.z)
    for (int t : doc) EXPECT_EQ(t, 0);
  const double denom = 5 + 0.3;
  EXPECT_NEAR(r.mean.beta(0, 0), 3.1 / denom, 1e-12);
  EXPECT_NEAR(r.mean.beta(0, 1), 1.1 / denom, 1e-12);
  EXPECT_NEAR(r.mean.beta(0, 2), 1.1 / denom, 1e-12);
}

TEST(GibbsTest, DisjointVocabulariesSeparateTopics) {
  Corpus c;
  c.vocab = {"a", "b", "c", "d"};
  c.docs = {std::vector<int>(20, 0), std::vector<int>(20, 2)};
  for (int i = 0; i < 20; i += 2) {
    c.docs[0][i] = 1;
    c.docs[1][i] = 3;
  }
  ChainConfig chain;
  chain.iterations = 300;
  chain.burn_in = 100;
  chain.seed = 3;
  const LdaChainResult r = GibbsLda(c, LdaPrior::Defaults(2, 4), 2, chain);
  const int t0 = r.mean.z[0][0];
  for (int t : r.mean.z[0]) EXPECT_EQ(t, t0);
  for (int t : r.mean.z[1]) EXPECT_EQ(t, 1 - t0);
  EXPECT_GT(r.mean.beta(t0, 0) + r.mean.beta(t0, 1), 0.95);
  for (Eigen::Index t = 0; t < 2; ++t) EXPECT_NEAR(r.mode.beta.row(t).sum(), 1.0, 1e-12);
}

TEST(GibbsTest, FoldInFavorsMatchingTopic) {
  Eigen::MatrixXd beta(2, 2);
  beta << 0.95, 0.05, 0.05, 0.95;
  ChainConfig chain;
  chain.iterations = 100;
  chain.burn_in = 20;
  const Eigen::MatrixXd theta =
      GibbsLdaFoldIn({{0, 0, 0, 0}, {1, 1, 1}}, beta, Eigen::VectorXd::Constant(2, 0.5), chain);
  EXPECT_GT(theta(0, 0), 0.7);
  EXPECT_GT(theta(1, 1), 0.7);
}

TEST(GibbsTest, RejectsBadChains) {
  ChainConfig chain;
  chain.burn_in = chain.iterations;
  EXPECT_THROW(chain.Validate(), ConfigError);
  chain.burn_in = 0;
  chain.thin = 0;
  EXPECT_THROW(chain.Validate(), ConfigError);
}

}  // namespace
}  // namespace gbdmap
