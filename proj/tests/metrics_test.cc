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

#include "gbdmap/metrics.h"

#include <cmath>
#include <random>

#include "gbdmap/errors.h"
#include "gtest/gtest.h"

namespace gbdmap {
namespace {

// Contingency-table oracle using dense arrays over labels 1..k.
double VoiOracle(const Clustering& a, const Clustering& b) {
  const int ka = *std::max_element(a.begin(), a.end());
  const int kb = *std::max_element(b.begin(), b.end());
  std::vector<std::vector<double>> n(ka + 1, std::vector<double>(kb + 1, 0.0));
  for (std::size_t i = 0; i < a.size(); ++i) n[a[i]][b[i]] += 1.0;
  const double total = static_cast<double>(a.size());
  double voi = 0.0;
  for (int i = 1; i <= ka; ++i) {
    double ri = 0.0;
    for (int j = 1; j <= kb; ++j) ri += n[i][j];
    for (int j = 1; j <= kb; ++j) {
      double cj = 0.0;
      for (int r = 1; r <= ka; ++r) cj += n[r][j];
      if (n[i][j] == 0.0) continue;
      const double p = n[i][j] / total;
      voi -= p * (std::log(n[i][j] / ri) + std::log(n[i][j] / cj));
    }
  }
  return voi;
}

Clustering RandomClustering(std::mt19937_64& rng, int n, int k) {
  std::uniform_int_distribution<int> pick(1, k);
  Clustering c(n);
  for (int& l : c) l = pick(rng);
  return c;
}

TEST(MetricsTest, VoiExamples) {
  const Clustering c = {1, 1, 2, 2};
  const Clustering d = {1, 2, 1, 2};
  EXPECT_EQ(VariationOfInformation(c, c), 0.0);
  EXPECT_NEAR(VariationOfInformation(c, d), 2.0 * std::log(2.0), 1e-12);
  EXPECT_THROW(VariationOfInformation(c, {1, 2}), StructuralError);
}

TEST(MetricsTest, VoiMatchesOracle) {
  std::mt19937_64 rng(1);
  for (int t = 0; t < 200; ++t) {
    const int n = 1 + t % 50;
    const Clustering a = RandomClustering(rng, n, 1 + t % 6);
    const Clustering b = RandomClustering(rng, n, 1 + t % 4);
    EXPECT_NEAR(VariationOfInformation(a, b), VoiOracle(a, b), 1e-12);
  }
}

TEST(MetricsTest, VoiIsAMetric) {
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<int> size(1, 50), kk(1, 8);
  for (int t = 0; t < 1000; ++t) {
    const int n = size(rng);
    const Clustering a = RandomClustering(rng, n, kk(rng));
    const Clustering b = RandomClustering(rng, n, kk(rng));
    const Clustering c = RandomClustering(rng, n, kk(rng));
    const double ab = VariationOfInformation(a, b);
    EXPECT_GE(ab, 0.0);
    EXPECT_NEAR(ab, VariationOfInformation(b, a), 1e-9);
    EXPECT_NEAR(VariationOfInformation(a, a), 0.0, 1e-9);
    EXPECT_LE(ab, VariationOfInformation(a, c) + VariationOfInformation(c, b) + 1e-9);
    EXPECT_LE(ab, std::log(static_cast<double>(n)) + 1e-9);
    Clustering relabeled = a;
    for (int& l : relabeled) l = 100 - 7 * l;
    EXPECT_NEAR(VariationOfInformation(relabeled, b), ab, 1e-9);
  }
}

TEST(MetricsTest, OneHotToClustering) {
  Eigen::MatrixXd z(3, 3);
  z << 0, 1, 0, 0.5, 0.5, 0, 0, 0, 1;
  EXPECT_EQ(ClusteringFromOneHot(z), (Clustering{2, 1, 3}));
}

TEST(MetricsTest, TablesHaveExpectedShape) {
  RunSummary a{"GBD", {1, 1, 2}, -89.41123, -80.0, 1.5, "eps-optimal", 0.1, {}, {}};
  RunSummary b{"Gibbs", {2, 2, 1}, -95.0, {}, 0.2, "", {}, {}, {}};
  RunSummary c{"Other", {1, 2, 3}, -99.0, {}, 0.3, "", {}, -10.0, 12.5};

  const Table single = VoiTable({a}, false);
  ASSERT_EQ(single.rows.size(), 1u);
  EXPECT_EQ(single.rows[0][1], "0.000");

  const Table two = VoiTable({a, b}, false);
  EXPECT_EQ(two.rows[0][2], "0.000");

  const Table three = VoiTable({a, b, c}, true);
  ASSERT_EQ(three.rows.size(), 3u);
  for (int i = 0; i < 3; ++i) {
    EXPECT_EQ(three.rows[i][i + 1], "0");
    for (int j = 0; j < 3; ++j) EXPECT_EQ(three.rows[i][j + 1], three.rows[j][i + 1]);
  }

  const Table lm = LogMapTable({a, b}, false);
  EXPECT_EQ(lm.rows[0][1], "-89.411 (-80.000)");
  EXPECT_EQ(lm.rows[1][1], "-95.000");
  EXPECT_EQ(LogMapTable({a}, true).ToCsv(), "method,log_map,upper_bound\nGBD,-89.41123,-80\n");
  EXPECT_EQ(PerplexityTable({c}, false).rows[0][2], "12.500");
  EXPECT_NE(RuntimeTable({a, b}, false).ToText().find("eps-optimal"), std::string::npos);
}

}  // namespace
}  // namespace gbdmap
