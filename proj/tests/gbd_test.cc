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

#include "gbdmap/gbd.h"

#include <cmath>
#include <limits>
#include <memory>
#include <random>
#include <sstream>

#include "gbdmap/errors.h"
#include "gbdmap/factors.h"
#include "gtest/gtest.h"

namespace gbdmap {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Eigen::MatrixXd Mat1(double v) { return Eigen::MatrixXd::Constant(1, 1, v); }
Eigen::VectorXd Vec1(double v) { return Eigen::VectorXd::Constant(1, v); }

// max -(x1-1)^2 - (x2+2)^2 - (x1-x2)^2/2, attained at (0.25, -1.25) with value -2.25.
std::shared_ptr<FactorGraph> ConcaveToy() {
  auto g = std::make_shared<FactorGraph>();
  const VarId x1 = g->add_variable({"x1", Domain::Box({-5.0}, {5.0})});
  const VarId x2 = g->add_variable({"x2", Domain::Box({-5.0}, {5.0})});
  g->add_factor(std::make_shared<QuadraticFactor>(std::vector<VarId>{x1}, Mat1(2.0), Vec1(2.0), -1.0));
  g->add_factor(std::make_shared<QuadraticFactor>(std::vector<VarId>{x2}, Mat1(2.0), Vec1(-4.0), -4.0));
  Eigen::MatrixXd q(2, 2);
  q << 1.0, -1.0, -1.0, 1.0;
  g->add_factor(std::make_shared<QuadraticFactor>(std::vector<VarId>{x1, x2}, q, Eigen::VectorXd::Zero(2)));
  return g;
}

// Two points, two labels, weights p on a simplex: z_ik log p_k plus a
// per-point preference for label k.
std::shared_ptr<FactorGraph> TinyMixture(const std::vector<std::vector<double>>& pref) {
  auto g = std::make_shared<FactorGraph>();
  const int k_count = static_cast<int>(pref[0].size());
  const VarId p = g->add_variable({"p", Domain::Simplex(k_count, 1e-6)});
  for (std::size_t i = 0; i < pref.size(); ++i) {
    std::vector<VarId> row;
    for (int k = 0; k < k_count; ++k) {
      const VarId z = g->add_variable({"z_" + std::to_string(i) + "_" + std::to_string(k),
                                       Domain::Binary(), VarRole::kAssignment});
      row.push_back(z);
      g->add_factor(std::make_shared<BinaryLinearFactor>(z, pref[i][k], "pref"));
      g->add_factor(std::make_shared<BinaryLogCoordinateFactor>(z, p, k, "zlogp"));
    }
    g->add_one_hot(row);
  }
  return g;
}

TEST(FactorGraphTest, RejectsMalformedScopes) {
  FactorGraph g;
  const VarId x = g.add_variable({"x", Domain::Box({0.0}, {1.0})});
  EXPECT_THROW(g.add_factor(std::make_shared<QuadraticFactor>(std::vector<VarId>{x, 7}, Eigen::MatrixXd::Zero(2, 2),
                                                              Eigen::VectorXd::Zero(2))),
               StructuralError);
  EXPECT_THROW(g.add_factor(std::make_shared<QuadraticFactor>(std::vector<VarId>{}, Eigen::MatrixXd::Zero(0, 0),
                                                              Eigen::VectorXd::Zero(0))),
               StructuralError);
  EXPECT_THROW(g.add_factor(std::make_shared<QuadraticFactor>(std::vector<VarId>{x, x}, Eigen::MatrixXd::Zero(2, 2),
                                                              Eigen::VectorXd::Zero(2))),
               StructuralError);
}

TEST(FactorGraphTest, AugmentationClonesEveryCouplingScopeEntry) {
  auto g = TinyMixture({{0.1, 0.2}, {0.3, -0.1}});
  const AugmentedGraph aug = BuildAugmented(g);
  std::size_t expected = 0;
  for (FactorId f = 0; f < g->num_factors(); ++f) {
    if (g->factor(f).scope().size() > 1) expected += g->factor(f).scope().size();
  }
  EXPECT_EQ(aug.clones().size(), expected);
  EXPECT_EQ(aug.coupling_factors().size(), 4u);
  EXPECT_EQ(aug.singleton_factors().size(), 4u);
  std::ostringstream os;
  aug.dump(os);
  EXPECT_NE(os.str().find("clone 0 factor"), std::string::npos);
}

TEST(FactorGraphTest, AugmentedObjectiveEqualsOriginalAtEqualClones) {
  auto g = TinyMixture({{0.1, 0.2}, {0.3, -0.1}});
  const AugmentedGraph aug = BuildAugmented(g);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.05, 1.0);
  for (int t = 0; t < 100; ++t) {
    Assignment x = g->interior_assignment();
    const double a = u(rng);
    x[0] = {a / (a + 1.0), 1.0 / (a + 1.0)};
    x[1] = {static_cast<double>(t % 2)};
    x[2] = {static_cast<double>(1 - t % 2)};
    x[3] = {static_cast<double>((t / 2) % 2)};
    x[4] = {static_cast<double>(1 - (t / 2) % 2)};
    const Assignment c = aug.clones_from(x);
    EXPECT_EQ(aug.equality_residual(x, c), 0.0);
    EXPECT_NEAR(aug.eval_augmented(x, c), g->eval_log_posterior(x), 1e-12);
  }
}

TEST(SubproblemTest, MultipliersAreCloneGradients) {
  auto g = TinyMixture({{0.0, 0.0}});
  const AugmentedGraph aug = BuildAugmented(g);
  Assignment x = {{0.5, 0.5}, {1.0}, {0.0}};
  const SubproblemResult sub = SolveSubproblem(aug, x);
  EXPECT_NEAR(sub.value, std::log(0.5), 1e-12);
  // Factor 1 is z_0_0 log p_0 with clones (z, p).
  const CloneId cz = *aug.clone_of(1, 1);
  const CloneId cp = *aug.clone_of(1, 0);
  EXPECT_NEAR(sub.multipliers[cz][0], std::log(0.5), 1e-12);
  EXPECT_NEAR(sub.multipliers[cp][0], 2.0, 1e-12);
  EXPECT_NEAR(sub.multipliers[cp][1], 0.0, 1e-12);
}

TEST(SubproblemTest, TiltedQuadraticSupremum) {
  QuadraticFactor f({0}, Mat1(2.0), Vec1(0.0));
  const Domain box = Domain::Box({-10.0}, {10.0});
  const auto s = f.tilted_sup({}, ScopeVectors{{-6.0}}, {&box});
  ASSERT_TRUE(s.has_value());
  EXPECT_NEAR(s->value, 9.0, 1e-12);
  EXPECT_NEAR(s->argmax[0], 3.0, 1e-12);
}

TEST(SubproblemTest, BoundaryGradientNamesVariable) {
  auto g = TinyMixture({{0.0, 0.0}});
  g = std::make_shared<FactorGraph>(*g);
  const AugmentedGraph aug = BuildAugmented(g);
  Assignment x = {{1.0, 0.0}, {0.0}, {1.0}};
  EXPECT_THROW(SolveSubproblem(aug, x), DomainError);
  auto loose = std::make_shared<FactorGraph>();
  const VarId p = loose->add_variable({"weights", Domain::Simplex(2, 0.0)});
  const VarId z = loose->add_variable({"z", Domain::Binary()});
  loose->add_factor(std::make_shared<BinaryLogCoordinateFactor>(z, p, 1, "zlogp"));
  const AugmentedGraph aug2 = BuildAugmented(loose);
  try {
    SolveSubproblem(aug2, {{1.0, 0.0}, {1.0}});
    FAIL() << "expected a boundary error";
  } catch (const BoundaryError& e) {
    EXPECT_EQ(e.variable(), "weights");
  }
}

TEST(CutTest, ValidEverywhereAndTightForExactBlocks) {
  auto g = TinyMixture({{0.4, -0.2}, {-0.3, 0.5}});
  const AugmentedGraph aug = BuildAugmented(g);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.02, 0.98);
  auto random_point = [&]() {
    const double a = u(rng);
    Assignment x = {{a, 1.0 - a}};
    for (int i = 0; i < 2; ++i) {
      const bool first = u(rng) < 0.5;
      x.push_back({first ? 1.0 : 0.0});
      x.push_back({first ? 0.0 : 1.0});
    }
    return x;
  };
  for (int t = 0; t < 50; ++t) {
    const Assignment xbar = random_point();
    const BendersCut cut = BuildOptimalityCut(aug, SolveSubproblem(aug, xbar), xbar);
    EXPECT_TRUE(cut.tight);
    EXPECT_NEAR(cut.value_at(*g, xbar), g->eval_log_posterior(xbar), 1e-9);
    for (int k = 0; k < 50; ++k) {
      const Assignment probe = random_point();
      EXPECT_GE(cut.value_at(*g, probe), g->eval_log_posterior(probe) - 1e-9);
    }
  }
}

TEST(GbdTest, ConcaveToyConvergesToAnalyticMaximum) {
  auto g = ConcaveToy();
  GbdOptions opt;
  opt.epsilon = 1e-3;
  opt.max_iterations = 50;
  const GbdResult r = RunGbd({g, {}}, {{0.0}, {0.0}}, opt);
  EXPECT_EQ(r.certificate.status, CertificateStatus::kEpsOptimal);
  EXPECT_LE(r.certificate.gap, 1e-3);
  EXPECT_NEAR(r.incumbent_value, -2.25, 1e-3);
  EXPECT_FALSE(r.certificate.local);
  EXPECT_EQ(CheckBoundDiscipline(r), "");
  opt.epsilon = 1e-7;
  const GbdResult fine = RunGbd({g, {}}, {{0.0}, {0.0}}, opt);
  EXPECT_NEAR(fine.incumbent_value, -2.25, 1e-4);
  EXPECT_GE(fine.certificate.ubd, -2.25 - 1e-9);
  EXPECT_EQ(CheckBoundDiscipline(fine), "");
}

TEST(GbdTest, InfiniteEpsilonStopsAfterFirstMaster) {
  GbdOptions opt;
  opt.epsilon = kInf;
  const GbdResult r = RunGbd({ConcaveToy(), {}}, {{0.0}, {0.0}}, opt);
  EXPECT_EQ(r.certificate.status, CertificateStatus::kEpsOptimal);
  EXPECT_EQ(r.certificate.iterations, 1);
  EXPECT_EQ(r.trace.size(), 1u);
}

TEST(GbdTest, ZeroEpsilonRunsToIterationLimit) {
  GbdOptions opt;
  opt.epsilon = 0.0;
  opt.max_iterations = 3;
  auto g = TinyMixture({{0.4, -0.2}, {-0.3, 0.5}});
  const Assignment x0 = {{0.5, 0.5}, {1.0}, {0.0}, {1.0}, {0.0}};
  const GbdResult r = RunGbd({g, {}}, x0, opt);
  EXPECT_NE(r.certificate.status, CertificateStatus::kEpsOptimal);
  EXPECT_LE(r.certificate.iterations, 3);
  EXPECT_TRUE(std::isfinite(r.certificate.gap));
  EXPECT_EQ(CheckBoundDiscipline(r), "");
}

TEST(GbdTest, EmptyFeasibleSetIsReportedInfeasible) {
  auto g = TinyMixture({{0.0, 0.0}, {0.0, 0.0}});
  // z_0_0 = z_1_0 and z_0_0 + z_1_0 = 1 cannot both hold.
  LinearConstraint same{{{1, 1.0}, {3, -1.0}}, Sense::kEqual, 0.0, "same"};
  LinearConstraint split{{{1, 1.0}, {3, 1.0}}, Sense::kEqual, 1.0, "split"};
  const Assignment x0 = {{0.5, 0.5}, {1.0}, {0.0}, {1.0}, {0.0}};
  const GbdResult r = RunGbd({g, {same, split}}, x0, GbdOptions{});
  EXPECT_EQ(r.certificate.status, CertificateStatus::kInfeasible);
  EXPECT_TRUE(r.incumbent.empty());
}

TEST(GbdTest, LazyRowsProduceFeasibilityCuts) {
  auto g = TinyMixture({{2.0, 0.0}, {0.0, 2.0}});
  LinearConstraint same{{{1, 1.0}, {3, -1.0}}, Sense::kEqual, 0.0, "must-link"};
  const Assignment x0 = {{0.5, 0.5}, {1.0}, {0.0}, {1.0}, {0.0}};
  GbdOptions opt;
  opt.constraints_in_master = false;
  opt.epsilon = 1e-6;
  const GbdResult r = RunGbd({g, {same}}, x0, opt);
  ASSERT_FALSE(r.incumbent.empty());
  EXPECT_TRUE(same.satisfied(r.incumbent));
  EXPECT_EQ(CheckBoundDiscipline(r), "");
}

TEST(GbdTest, InitialPointOutsideDomainIsRejected) {
  EXPECT_THROW(RunGbd({ConcaveToy(), {}}, {{9.0}, {0.0}}, GbdOptions{}), DomainError);
}

TEST(GbdTest, MixtureBoundsBracketEnumeratedOptimum) {
  const std::vector<std::vector<double>> pref{{0.4, -0.2}, {-0.3, 0.5}};
  auto g = TinyMixture(pref);
  GbdOptions opt;
  opt.epsilon = 1e-6;
  opt.max_iterations = 40;
  const Assignment x0 = {{0.5, 0.5}, {1.0}, {0.0}, {1.0}, {0.0}};
  const GbdResult r = RunGbd({g, {}}, x0, opt);
  // Enumerate labelings; for counts (n0, n1) the best weight is the empirical
  // frequency clamped to the floor.
  double best = -kInf;
  for (int code = 0; code < 4; ++code) {
    const int l0 = code & 1, l1 = (code >> 1) & 1;
    const int n1 = l0 + l1;
    double p1 = std::clamp(n1 / 2.0, 1e-6, 1.0 - 1e-6);
    const double p[2] = {1.0 - p1, p1};
    best = std::max(best, pref[0][l0] + pref[1][l1] + std::log(p[l0]) + std::log(p[l1]));
  }
  EXPECT_LE(r.incumbent_value, best + 1e-9);
  EXPECT_GE(r.certificate.ubd, best - 1e-6);
  EXPECT_EQ(CheckBoundDiscipline(r), "");
}

}  // namespace
}  // namespace gbdmap
