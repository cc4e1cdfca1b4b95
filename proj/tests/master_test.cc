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

#include "gbdmap/master.h"

#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "gbdmap/errors.h"
#include "gbdmap/factors.h"
#include "gtest/gtest.h"

namespace gbdmap {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Labeling {
  std::shared_ptr<FactorGraph> graph;
  std::vector<std::vector<VarId>> z;  // z[i][k]
};

Labeling MakeLabeling(int n, int k, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Labeling out;
  out.graph = std::make_shared<FactorGraph>();
  for (int i = 0; i < n; ++i) {
    std::vector<VarId> row;
    for (int c = 0; c < k; ++c) {
      const VarId v = out.graph->add_variable(
          {"z" + std::to_string(i) + "_" + std::to_string(c), Domain::Binary(), VarRole::kAssignment});
      out.graph->add_factor(std::make_shared<BinaryLinearFactor>(v, normal(rng), "pref"));
      row.push_back(v);
    }
    out.graph->add_one_hot(row);
    out.z.push_back(row);
  }
  return out;
}

BendersCut RandomCut(const FactorGraph& g, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  BendersCut cut;
  cut.linear.resize(g.num_variables());
  for (VarId v = 0; v < g.num_variables(); ++v) cut.linear[v] = {normal(rng)};
  cut.constant = 2.0 * normal(rng);
  return cut;
}

double BruteForce(const MasterProblem& mp, const Labeling& lab, int k) {
  const int n = static_cast<int>(lab.z.size());
  int total = 1;
  for (int i = 0; i < n; ++i) total *= k;
  double best = -kInf;
  for (int code = 0; code < total; ++code) {
    Assignment x(mp.graph->num_variables(), std::vector<double>{0.0});
    int rest = code;
    for (int i = 0; i < n; ++i) {
      x[lab.z[i][rest % k]][0] = 1.0;
      rest /= k;
    }
    bool ok = true;
    for (const auto& row : mp.constraints) ok = ok && row.satisfied(x);
    if (!ok) continue;
    double cut_min = kInf;
    for (const auto& c : mp.cuts) cut_min = std::min(cut_min, c.value_at(*mp.graph, x));
    best = std::max(best, cut_min);
  }
  return best;
}

TEST(MasterTest, BranchAndBoundMatchesEnumeration) {
  std::mt19937_64 rng(42);
  for (int t = 0; t < 20; ++t) {
    const int n = 3 + t % 3;
    const int k = 2 + t % 2;
    Labeling lab = MakeLabeling(n, k, rng);
    MasterProblem mp;
    mp.graph = lab.graph;
    for (int j = 0; j < 1 + t % 4; ++j) mp.cuts.push_back(RandomCut(*lab.graph, rng));
    if (t % 2 == 1) {
      mp.constraints.push_back({{{lab.z[0][0], 1.0}, {lab.z[1][0], 1.0}}, Sense::kLessEqual, 1.0, "cl"});
    }
    const double truth = BruteForce(mp, lab, k);
    const MasterResult r = SolveMaster(mp, MasterConfig{});
    ASSERT_TRUE(r.point.has_value()) << t;
    EXPECT_EQ(r.status, MasterStatus::kOptimal) << t;
    EXPECT_NEAR(r.point_value, truth, 1e-6) << t;
    EXPECT_GE(r.upper_bound, truth - 1e-9) << t;
    EXPECT_LE(r.upper_bound, truth + 1e-5 * (1.0 + std::abs(truth))) << t;
    for (const auto& row : mp.constraints) EXPECT_TRUE(row.satisfied(*r.point));
  }
}

TEST(MasterTest, MustLinkChainCollapsesToOneLeafPerLabel) {
  std::mt19937_64 rng(3);
  const int n = 12, k = 3;
  Labeling lab = MakeLabeling(n, k, rng);
  MasterProblem mp;
  mp.graph = lab.graph;
  mp.cuts.push_back(RandomCut(*lab.graph, rng));
  for (int i = 0; i + 1 < n; ++i) {
    for (int c = 0; c < k; ++c) {
      mp.constraints.push_back({{{lab.z[i][c], 1.0}, {lab.z[i + 1][c], -1.0}}, Sense::kEqual, 0.0, "ml"});
    }
  }
  const MasterResult r = SolveMaster(mp, MasterConfig{});
  EXPECT_LE(r.leaves, static_cast<std::size_t>(k));
  EXPECT_LE(r.nodes, static_cast<std::size_t>(k + 1));
  ASSERT_TRUE(r.point.has_value());
  for (const auto& row : mp.constraints) EXPECT_TRUE(row.satisfied(*r.point));
  EXPECT_NEAR(r.point_value, BruteForce(mp, lab, k), 1e-6);
}

TEST(MasterTest, CannotLinkPairExploresOnlySeparatedLeaves) {
  std::mt19937_64 rng(8);
  Labeling lab = MakeLabeling(2, 2, rng);
  MasterProblem mp;
  mp.graph = lab.graph;
  mp.cuts.push_back(RandomCut(*lab.graph, rng));
  for (int c = 0; c < 2; ++c) {
    mp.constraints.push_back({{{lab.z[0][c], 1.0}, {lab.z[1][c], 1.0}}, Sense::kLessEqual, 1.0, "cl"});
  }
  std::ostringstream log;
  MasterConfig cfg;
  cfg.node_log = &log;
  const MasterResult r = SolveMaster(mp, cfg);
  ASSERT_TRUE(r.point.has_value());
  EXPECT_NE((*r.point)[lab.z[0][0]][0], (*r.point)[lab.z[1][0]][0]);
  EXPECT_LE(r.leaves, 2u);
  EXPECT_NEAR(r.point_value, BruteForce(mp, lab, 2), 1e-9);
}

TEST(MasterTest, FullyFixedRelaxationIsExactEvaluation) {
  std::mt19937_64 rng(5);
  Labeling lab = MakeLabeling(4, 3, rng);
  MasterProblem mp;
  mp.graph = lab.graph;
  for (int j = 0; j < 4; ++j) mp.cuts.push_back(RandomCut(*lab.graph, rng));
  MasterModel model(mp);
  BnBNode node;
  node.fixed.assign(model.num_binaries(), 0);
  Assignment x(lab.graph->num_variables(), std::vector<double>{0.0});
  for (int i = 0; i < 4; ++i) {
    const VarId v = lab.z[i][i % 3];
    x[v][0] = 1.0;
    for (std::size_t b = 0; b < model.num_binaries(); ++b) {
      if (model.binary_var(b) == v) node.fixed[b] = 1;
    }
  }
  const RelaxationResult rel = model.relax(node, MasterConfig{});
  EXPECT_NEAR(rel.bound, model.objective(x), 1e-7);
  ASSERT_TRUE(rel.candidate.has_value());
  EXPECT_NEAR(rel.candidate_value, model.objective(x), 1e-12);
}

TEST(MasterTest, AppendingCutsNeverRaisesTheBound) {
  std::mt19937_64 rng(13);
  Labeling lab = MakeLabeling(5, 2, rng);
  MasterProblem mp;
  mp.graph = lab.graph;
  mp.cuts.push_back(RandomCut(*lab.graph, rng));
  double previous = kInf;
  for (int j = 0; j < 6; ++j) {
    MasterConfig cfg;
    cfg.bound_hint = previous;
    const MasterResult r = SolveMaster(mp, cfg);
    EXPECT_LE(r.upper_bound, previous);
    previous = r.upper_bound;
    mp.cuts.push_back(RandomCut(*lab.graph, rng));
  }
}

TEST(MasterTest, ErrorsAndInfeasibility) {
  std::mt19937_64 rng(17);
  Labeling lab = MakeLabeling(2, 2, rng);
  MasterProblem mp;
  mp.graph = lab.graph;
  EXPECT_THROW(SolveMaster(mp, MasterConfig{}), UnboundedCutError);
  mp.cuts.push_back(RandomCut(*lab.graph, rng));
  mp.constraints.push_back({{{lab.z[0][0], 1.0}, {lab.z[0][1], 1.0}}, Sense::kGreaterEqual, 2.0, "bad"});
  const MasterResult r = SolveMaster(mp, MasterConfig{});
  EXPECT_EQ(r.status, MasterStatus::kInfeasible);
  EXPECT_FALSE(r.point.has_value());
}

TEST(MasterTest, AnchoringFixesFirstRow) {
  std::mt19937_64 rng(21);
  Labeling lab = MakeLabeling(3, 3, rng);
  MasterProblem mp;
  mp.graph = lab.graph;
  mp.cuts.push_back(RandomCut(*lab.graph, rng));
  MasterConfig cfg;
  cfg.anchor_labels = true;
  const MasterResult r = SolveMaster(mp, cfg);
  ASSERT_TRUE(r.point.has_value());
  EXPECT_EQ((*r.point)[lab.z[0][0]][0], 1.0);
}

TEST(MasterTest, ContinuousSingletonsUseClosedForms) {
  // max log p_0 + log p_1 + min(cut) with cut linear in p: optimum p = (1/2, 1/2)
  // when the cut is flat.
  auto g = std::make_shared<FactorGraph>();
  const VarId p = g->add_variable({"p", Domain::Simplex(2, 1e-6)});
  g->add_factor(std::make_shared<SimplexLogPriorFactor>(p, std::vector<double>{1.0, 1.0}, "prior"));
  MasterProblem mp;
  mp.graph = g;
  BendersCut flat;
  flat.linear = {{0.0, 0.0}};
  flat.constant = 1.0;
  mp.cuts.push_back(flat);
  BendersCut tilted;
  tilted.linear = {{4.0, 0.0}};
  tilted.constant = 0.0;
  mp.cuts.push_back(tilted);
  const MasterResult r = SolveMaster(mp, MasterConfig{});
  ASSERT_TRUE(r.point.has_value());
  // Objective log p0 + log(1-p0) + min(1, 4 p0): brute force on a grid.
  double best = -kInf;
  for (int i = 1; i < 200000; ++i) {
    const double q = i / 200000.0;
    best = std::max(best, std::log(q) + std::log(1 - q) + std::min(1.0, 4 * q));
  }
  EXPECT_GE(r.upper_bound, best - 1e-9);
  EXPECT_NEAR(r.point_value, best, 1e-4);
  EXPECT_LE(r.upper_bound - r.point_value, 1e-3);
}

}  // namespace
}  // namespace gbdmap
