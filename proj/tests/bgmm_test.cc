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

#include <cmath>
#include <numeric>
#include <random>

#include "gbdmap/closed_form.h"
#include "gbdmap/errors.h"
#include "gbdmap/gbd.h"
#include "gtest/gtest.h"

namespace gbdmap {
namespace {

Eigen::MatrixXd RandomPd(std::mt19937_64& rng, int d) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::MatrixXd a(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) a(i, j) = n(rng);
  return a * a.transpose() / d + 0.3 * Eigen::MatrixXd::Identity(d, d);
}

Eigen::MatrixXd RandomData(std::mt19937_64& rng, int n, int d) {
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::MatrixXd y(n, d);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j) y(i, j) = g(rng) + (i % 2 == 0 ? 2.0 : -2.0);
  return y;
}

BgmmLatent RandomLatent(std::mt19937_64& rng, int n, int k, int d) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_int_distribution<int> lab(0, k - 1);
  std::exponential_distribution<double> e(1.0);
  BgmmLatent out;
  std::vector<int> labels(n);
  for (int& l : labels) l = lab(rng);
  out.z = BgmmLatent::OneHot(labels, k);
  out.pi.resize(k);
  for (int c = 0; c < k; ++c) out.pi(c) = 0.05 + e(rng);
  out.pi /= out.pi.sum();
  for (int c = 0; c < k; ++c) {
    Eigen::VectorXd m(d);
    for (int j = 0; j < d; ++j) m(j) = g(rng);
    out.mu.push_back(m);
    out.lambda.push_back(RandomPd(rng, d));
  }
  return out;
}

// Term-by-term evaluator written against the six factor formulas directly.
double SixTermOracle(const Eigen::MatrixXd& y, const BgmmPrior& p, const BgmmLatent& x) {
  const int n = static_cast<int>(y.rows()), k = static_cast<int>(x.pi.size());
  const int d = static_cast<int>(y.cols());
  auto logdet = [](const Eigen::MatrixXd& m) { return std::log(m.determinant()); };
  double t1 = 0, t2 = 0, t3 = 0, t4 = 0, t5 = 0, t6 = 0;
  for (int c = 0; c < k; ++c) {
    const Eigen::MatrixXd& l = x.lambda[c];
    const Eigen::VectorXd& m = x.mu[c];
    t1 += (p.alpha0(c) - 1.0) * std::log(x.pi(c));
    t2 += 0.5 * logdet(p.beta0 * l) - 0.5 * p.beta0 * p.mu0.dot(l * p.mu0) +
          0.5 * (p.nu0 - d - 1.0) * logdet(l) - 0.5 * (p.w0.inverse() * l).trace();
    t6 += p.beta0 * (m.dot(l * p.mu0) - 0.5 * m.dot(l * m));
    for (int i = 0; i < n; ++i) {
      const Eigen::VectorXd yi = y.row(i).transpose();
      const double z = x.z(i, c);
      t3 += 0.5 * z * (logdet(l) - yi.dot(l * yi));
      t4 += z * (m.dot(l * yi) - 0.5 * m.dot(l * m));
      t5 += z * std::log(x.pi(c));
    }
  }
  return t1 + t2 + t3 + t4 + t5 + t6;
}

TEST(BgmmTest, FactorCountsAndDimension) {
  std::mt19937_64 rng(1);
  const Eigen::MatrixXd y = RandomData(rng, 2, 2);
  const BgmmModel model(y, BgmmPrior::Defaults(y, 2), 2);
  const auto counts = model.graph()->family_counts(false);
  std::size_t total = 0;
  for (const auto& [name, c] : counts) total += c;
  EXPECT_EQ(total, 14u);
  EXPECT_EQ(counts.at("assign_logdet"), 4u);
  EXPECT_EQ(counts.at("assign_quadratic"), 4u);
  EXPECT_EQ(counts.at("assign_weight"), 4u);
  EXPECT_EQ(counts.at("mean_precision"), 2u);
  const auto all = model.graph()->family_counts(true);
  EXPECT_EQ(all.at("weight_prior"), 1u);
  EXPECT_EQ(all.at("precision_prior"), 2u);

  const Eigen::MatrixXd big = RandomData(rng, 7, 3);
  const BgmmModel m3(big, BgmmPrior::Defaults(big, 3), 3);
  EXPECT_EQ(m3.graph()->block_count(), 7u * 3u + 3u * 3u);
}

TEST(BgmmTest, RejectsMoreComponentsThanPoints) {
  std::mt19937_64 rng(2);
  const Eigen::MatrixXd y = RandomData(rng, 2, 1);
  EXPECT_THROW(BgmmModel(y, BgmmPrior::Defaults(y, 3), 3), ConfigError);
}

TEST(BgmmTest, ScalarFactorExamples) {
  Eigen::MatrixXd y(1, 2);
  y << 1.0, 1.0;
  BgmmModel model(y, BgmmPrior::Defaults(y, 1), 1);
  const FactorGraph& g = *model.graph();
  Assignment x(g.num_variables());
  x[model.pi_var()] = {std::exp(-1.0)};
  x[model.lambda_var(0)] = {1.0, 0.0, 0.0, 1.0};
  x[model.mu_var(0)] = {0.0, 0.0};
  x[model.z_var(0, 0)] = {1.0};
  for (FactorId f = 0; f < g.num_factors(); ++f) {
    const Factor& fac = g.factor(f);
    const double v = fac.eval(g.scope_values(fac, x));
    if (fac.family() == "assign_weight") EXPECT_NEAR(v, -1.0, 1e-12);
    if (fac.family() == "assign_logdet") EXPECT_NEAR(v, -1.0, 1e-12);
  }
}

TEST(BgmmTest, LogMapMatchesSixTermOracle) {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 10; ++t) {
    const int n = 5 + t, k = 1 + t % 3, d = 1 + t % 3;
    const Eigen::MatrixXd y = RandomData(rng, n, d);
    BgmmPrior prior = BgmmPrior::Defaults(y, k);
    prior.beta0 = 0.5 + t * 0.2;
    prior.w0 = RandomPd(rng, d);
    prior.alpha0 = Eigen::VectorXd::Constant(k, 0.7 + 0.3 * t);
    const BgmmLatent x = RandomLatent(rng, n, k, d);
    EXPECT_NEAR(LogMapBgmm(y, prior, x), SixTermOracle(y, prior, x), 1e-9) << t;
  }
}

TEST(BgmmTest, SingleComponentIsNormalWishartDensityUpToConstant) {
  std::mt19937_64 rng(4);
  const int n = 6, d = 2;
  const Eigen::MatrixXd y = RandomData(rng, n, d);
  const BgmmPrior prior = BgmmPrior::Defaults(y, 1);
  auto density = [&](const BgmmLatent& x) {
    const Eigen::MatrixXd& l = x.lambda[0];
    const Eigen::VectorXd& m = x.mu[0];
    const double ld = std::log(l.determinant());
    double v = 0.5 * d * std::log(prior.beta0) + 0.5 * ld -
               0.5 * prior.beta0 * (m - prior.mu0).dot(l * (m - prior.mu0));
    v += 0.5 * (prior.nu0 - d - 1) * ld - 0.5 * (prior.w0.inverse() * l).trace();
    for (int i = 0; i < n; ++i) {
      const Eigen::VectorXd r = y.row(i).transpose() - m;
      v += 0.5 * ld - 0.5 * r.dot(l * r);
    }
    return v;
  };
  const BgmmLatent a = RandomLatent(rng, n, 1, d);
  const BgmmLatent b = RandomLatent(rng, n, 1, d);
  EXPECT_NEAR(LogMapBgmm(y, prior, a) - density(a), LogMapBgmm(y, prior, b) - density(b), 1e-9);
}

TEST(BgmmTest, LabelPermutationInvariance) {
  std::mt19937_64 rng(5);
  const int n = 9, k = 3, d = 2;
  const Eigen::MatrixXd y = RandomData(rng, n, d);
  const BgmmPrior prior = BgmmPrior::Defaults(y, k);
  const BgmmLatent x = RandomLatent(rng, n, k, d);
  const std::vector<int> perm = {2, 0, 1};
  BgmmLatent p = x;
  for (int c = 0; c < k; ++c) {
    p.mu[perm[c]] = x.mu[c];
    p.lambda[perm[c]] = x.lambda[c];
    p.pi(perm[c]) = x.pi(c);
    p.z.col(perm[c]) = x.z.col(c);
  }
  EXPECT_NEAR(LogMapBgmm(y, prior, x), LogMapBgmm(y, prior, p), 1e-9);
}

TEST(BgmmTest, DoublingConcentrationAddsLogWeights) {
  std::mt19937_64 rng(6);
  const Eigen::MatrixXd y = RandomData(rng, 8, 2);
  BgmmPrior prior = BgmmPrior::Defaults(y, 3);
  const BgmmLatent x = RandomLatent(rng, 8, 3, 2);
  const double base = LogMapBgmm(y, prior, x);
  prior.alpha0 *= 2.0;
  EXPECT_NEAR(LogMapBgmm(y, prior, x) - base, x.pi.array().log().sum(), 1e-9);
}

TEST(BgmmTest, RejectsNonOneHotRows) {
  std::mt19937_64 rng(7);
  const Eigen::MatrixXd y = RandomData(rng, 4, 1);
  BgmmLatent x = RandomLatent(rng, 4, 2, 1);
  x.z(1, 0) = 1.0;
  x.z(1, 1) = 1.0;
  EXPECT_THROW(LogMapBgmm(y, BgmmPrior::Defaults(y, 2), x), DomainError);
  x.z(1, 0) = 0.5;
  x.z(1, 1) = 0.5;
  EXPECT_THROW(LogMapBgmm(y, BgmmPrior::Defaults(y, 2), x), DomainError);
}

TEST(BgmmTest, GradientsMatchFiniteDifferences) {
  std::mt19937_64 rng(8);
  const Eigen::MatrixXd y = RandomData(rng, 3, 2);
  BgmmPrior prior = BgmmPrior::Defaults(y, 2);
  prior.alpha0 = Eigen::VectorXd::Constant(2, 2.5);
  const BgmmModel model(y, prior, 2);
  const FactorGraph& g = *model.graph();
  const Assignment x = model.ToAssignment(RandomLatent(rng, 3, 2, 2));
  for (FactorId f = 0; f < g.num_factors(); ++f) {
    const Factor& fac = g.factor(f);
    const ScopeVectors grad = fac.gradient(g.scope_values(fac, x));
    for (std::size_t s = 0; s < fac.scope().size(); ++s) {
      const VarId v = fac.scope()[s];
      const bool pd = g.variable(v).domain.kind() == DomainKind::kPositiveDefinite;
      const int dim = g.variable(v).domain.dim();
      for (std::size_t j = 0; j < x[v].size(); ++j) {
        const double h = 1e-6;
        Assignment up = x, dn = x;
        up[v][j] += h;
        dn[v][j] -= h;
        if (pd) {
          // Perturb symmetrically; compare against the directional derivative.
          const std::size_t r = j % dim, c = j / dim;
          if (r > c) continue;
          const std::size_t jt = c + r * dim;
          if (jt != j) {
            up[v][jt] += h;
            dn[v][jt] -= h;
          }
        }
        const double fd = (fac.eval(g.scope_values(fac, up)) - fac.eval(g.scope_values(fac, dn))) /
                          (2 * h);
        double analytic = grad[s][j];
        if (pd) {
          const std::size_t r = j % dim, c = j / dim;
          const std::size_t jt = c + r * dim;
          if (jt != j) analytic += grad[s][jt];
        }
        EXPECT_NEAR(analytic, fd, 1e-5 * (1.0 + std::abs(fd))) << fac.family() << " var " << v;
      }
    }
  }
}

TEST(BgmmTest, TiltedSupsUpperBoundRandomPoints) {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> g(0.0, 1.0);
  const Eigen::MatrixXd y = RandomData(rng, 2, 2);
  const BgmmModel model(y, BgmmPrior::Defaults(y, 2), 2);
  const FactorGraph& fg = *model.graph();
  for (FactorId f = 0; f < fg.num_factors(); ++f) {
    if (fg.is_singleton(f)) continue;
    const Factor& fac = fg.factor(f);
    std::vector<const Domain*> domains;
    for (VarId v : fac.scope()) domains.push_back(&fg.variable(v).domain);
    for (double zval : {0.0, 1.0}) {
      ScopeVectors u;
      std::vector<double> binary;
      for (VarId v : fac.scope()) {
        std::vector<double> w(fg.variable(v).domain.size());
        for (double& e : w) e = 0.3 * g(rng);
        if (fg.variable(v).domain.kind() == DomainKind::kPositiveDefinite) {
          const int d = fg.variable(v).domain.dim();
          const Eigen::MatrixXd m = AsMatrix(w, d);
          const Eigen::MatrixXd s = 0.5 * (m + m.transpose());
          w.assign(s.data(), s.data() + s.size());
        }
        if (fg.variable(v).domain.is_binary()) binary.push_back(zval);
        u.push_back(w);
      }
      const auto sup = fac.tilted_sup(binary, u, domains);
      ASSERT_TRUE(sup.has_value()) << fac.family();
      for (int t = 0; t < 300; ++t) {
        Assignment x = model.ToFeasibleAssignment(RandomLatent(rng, 2, 2, 2));
        for (std::size_t s = 0; s < fac.scope().size(); ++s) {
          if (fg.variable(fac.scope()[s]).domain.is_binary()) x[fac.scope()[s]] = {zval};
        }
        double tilt = 0.0;
        for (std::size_t s = 0; s < fac.scope().size(); ++s) {
          const auto& xv = x[fac.scope()[s]];
          if (fg.variable(fac.scope()[s]).domain.is_binary()) continue;
          for (std::size_t j = 0; j < xv.size(); ++j) tilt += u[s][j] * xv[j];
        }
        const double val = fac.eval(fg.scope_values(fac, x)) - tilt;
        EXPECT_LE(val, sup->value + 1e-8) << fac.family() << " z=" << zval;
      }
    }
  }
}

TEST(BgmmTest, ConditionalOptimumBeatsPerturbations) {
  std::mt19937_64 rng(10);
  std::normal_distribution<double> g(0.0, 1.0);
  const Eigen::MatrixXd y = RandomData(rng, 12, 2);
  const BgmmPrior prior = BgmmPrior::Defaults(y, 2);
  const BgmmModel model(y, prior, 2);
  std::vector<int> labels(12);
  for (int i = 0; i < 12; ++i) labels[i] = i % 2;
  const BgmmLatent best = model.ConditionalOptimum(labels);
  const double v = LogMapBgmm(y, prior, best);
  for (int t = 0; t < 200; ++t) {
    BgmmLatent p = best;
    for (int c = 0; c < 2; ++c) {
      for (int j = 0; j < 2; ++j) p.mu[c](j) += 0.05 * g(rng);
      Eigen::MatrixXd e(2, 2);
      e << g(rng), g(rng), 0, g(rng);
      e(1, 0) = e(0, 1);
      p.lambda[c] += 0.02 * e;
    }
    const double w = 0.02 * g(rng);
    p.pi(0) += w;
    p.pi(1) -= w;
    if (p.pi.minCoeff() <= 0.0) continue;
    EXPECT_LE(LogMapBgmm(y, prior, p), v + 1e-9);
  }
}

TEST(BgmmTest, ConstraintRows) {
  std::mt19937_64 rng(11);
  const Eigen::MatrixXd y = RandomData(rng, 2, 1);
  const BgmmModel model(y, BgmmPrior::Defaults(y, 2), 2);
  const auto ml = model.Constraints({{PairKind::kMustLink, 0, 1}}, 0);
  ASSERT_EQ(ml.size(), 2u);
  for (const auto& r : ml) EXPECT_EQ(r.sense, Sense::kEqual);
  EXPECT_TRUE(model.Constraints({}, 0).empty());
  EXPECT_EQ(model.Constraints({}, 1).size(), 2u);
  EXPECT_THROW(model.Constraints({{PairKind::kMustLink, 0, 2}}, 0), DomainError);
}

TEST(BgmmTest, ClosureDetectsContradictions) {
  // Cannot-link clique of size K + 1.
  std::vector<PairConstraint> clique;
  for (int a = 0; a < 4; ++a)
    for (int b = a + 1; b < 4; ++b) clique.push_back({PairKind::kCannotLink, a, b});
  EXPECT_THROW(CheckConstraintClosure(10, 3, clique, 0), InfeasibleError);
  EXPECT_TRUE(CheckConstraintClosure(10, 4, clique, 0).has_value());
  // Must-link component containing a cannot-link pair.
  const std::vector<PairConstraint> mixed = {
      {PairKind::kMustLink, 0, 1}, {PairKind::kMustLink, 1, 2}, {PairKind::kCannotLink, 0, 2}};
  EXPECT_THROW(CheckConstraintClosure(5, 3, mixed, 0), InfeasibleError);
  EXPECT_THROW(CheckConstraintClosure(5, 3, {}, 2), InfeasibleError);
  const std::vector<PairConstraint> chain = {{PairKind::kMustLink, 0, 1},
                                             {PairKind::kMustLink, 1, 2}};
  EXPECT_THROW(CheckConstraintClosure(4, 2, chain, 2), InfeasibleError);
  const auto ok = CheckConstraintClosure(6, 2, chain, 2);
  ASSERT_TRUE(ok.has_value());
  EXPECT_TRUE(LabelsSatisfy(*ok, 2, chain, 2));
}

TEST(BgmmTest, RepairProducesFeasibleLabels) {
  std::mt19937_64 rng(12);
  std::uniform_int_distribution<int> item(0, 29), lab(0, 2);
  for (int t = 0; t < 30; ++t) {
    std::vector<PairConstraint> pairs;
    for (int c = 0; c < 8; ++c) {
      const int a = item(rng);
      int b = item(rng);
      if (a == b) b = (a + 1) % 30;
      pairs.push_back({c % 3 == 0 ? PairKind::kCannotLink : PairKind::kMustLink, a, b});
    }
    std::vector<int> labels(30);
    for (int& l : labels) l = lab(rng);
    try {
      CheckConstraintClosure(30, 3, pairs, 5);
    } catch (const InfeasibleError&) {
      continue;
    }
    const std::vector<int> fixed = RepairLabels(labels, 3, pairs, 5);
    EXPECT_TRUE(LabelsSatisfy(fixed, 3, pairs, 5)) << t;
  }
}

TEST(BgmmTest, WitnessExamples) {
  const NonconcavityWitness w = Symmetric2x2Witness(0.0, 0.0, -4.0, "b");
  EXPECT_DOUBLE_EQ(w.eigenvalue, 0.0);
  EXPECT_DOUBLE_EQ(w.other, -4.0);
  EXPECT_TRUE(w.degenerate);

  std::mt19937_64 rng(13);
  const Eigen::MatrixXd y = RandomData(rng, 5, 3);
  for (int t = 0; t < 20; ++t) {
    const BgmmLatent x = RandomLatent(rng, 5, 2, 3);
    const NonconcavityWitness h = BgmmNonconcavityWitness(y, x, t % 5, t % 2);
    EXPECT_GT(h.eigenvalue, 0.0);
    Eigen::Matrix2d m;
    m << 0.0, h.cross, h.cross, h.curvature;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(m);
    EXPECT_NEAR(es.eigenvalues()(1), h.eigenvalue, 1e-8);
    EXPECT_NEAR(es.eigenvalues()(0), h.other, 1e-8);

    // Second derivative of the factor along the witness direction, by finite
    // differences of the closed-form factor value.
    const Eigen::VectorXd yi = y.row(t % 5).transpose();
    const Eigen::MatrixXd l = x.lambda[t % 2];
    const Eigen::MatrixXd dir = l.inverse() - yi * yi.transpose();
    const Eigen::MatrixXd e = dir / dir.norm();
    auto f = [&](double z, double s) {
      const Eigen::MatrixXd ls = l + s * e;
      return 0.5 * z * (std::log(ls.determinant()) - yi.dot(ls * yi));
    };
    const double z = x.z(t % 5, t % 2), h2 = 1e-4;
    const double fss = (f(z, h2) - 2 * f(z, 0) + f(z, -h2)) / (h2 * h2);
    const double fzs = (f(1, h2) - f(1, -h2) - f(0, h2) + f(0, -h2)) / (2 * h2);
    EXPECT_NEAR(fss, h.curvature, 1e-4);
    EXPECT_NEAR(fzs, h.cross, 1e-6);
  }

  BgmmLatent bad = RandomLatent(rng, 5, 2, 3);
  bad.lambda[0] = -Eigen::MatrixXd::Identity(3, 3);
  EXPECT_THROW(BgmmNonconcavityWitness(y, bad, 0, 0), BoundaryError);
  bad = RandomLatent(rng, 5, 2, 3);
  bad.pi << 1.0, 0.0;
  EXPECT_THROW(BgmmNonconcavityWitness(y, bad, 0, 1), BoundaryError);
}

TEST(BgmmTest, GbdOnSmallMixtureKeepsBoundsAndConstraints) {
  std::mt19937_64 rng(14);
  const Eigen::MatrixXd y = RandomData(rng, 6, 1);
  const BgmmPrior prior = BgmmPrior::Defaults(y, 2);
  const BgmmModel model(y, prior, 2);
  const std::vector<PairConstraint> pairs = {{PairKind::kMustLink, 0, 1}};
  GbdProblem problem{model.graph(), model.Constraints(pairs, 0)};
  GbdOptions options;
  options.max_iterations = 15;
  options.polish = [&](const Assignment& x) { return model.Polish(x); };
  std::vector<int> labels = {0, 0, 0, 1, 0, 1};
  const Assignment init = model.ToAssignment(model.ConditionalOptimum(labels));
  const GbdResult r = RunGbd(problem, init, options);
  EXPECT_EQ(CheckBoundDiscipline(r), "");
  EXPECT_TRUE(r.certificate.local);
  const BgmmLatent best = model.FromAssignment(r.incumbent);
  const auto l = best.Labels();
  EXPECT_EQ(l[0], l[1]);
  EXPECT_NEAR(r.incumbent_value, LogMapBgmm(y, prior, best), 1e-9);
  EXPECT_GE(r.incumbent_value, LogMapBgmm(y, prior, model.FromAssignment(init)) - 1e-9);
}

}  // namespace
}  // namespace gbdmap
