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

#include "gbdmap/data.h"

#include <cstdlib>
#include <fstream>

#include "gbdmap/errors.h"
#include "gtest/gtest.h"

namespace gbdmap {
namespace {
namespace fs = std::filesystem;

const fs::path kDataDir = fs::path(GBDMAP_SOURCE_DIR) / "data";

fs::path ScratchDir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("gbdmap_data_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void WriteText(const fs::path& path, const std::string& text) {
  std::ofstream(path, std::ios::binary) << text;
}

DatasetSpec Shipped(const std::string& name, const std::string& file) {
  DatasetSpec spec;
  spec.name = name;
  spec.source = (kDataDir / file).string();
  return spec;
}

TEST(DataTest, Sha256KnownVectors) {
  EXPECT_EQ(Sha256Hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  EXPECT_EQ(Sha256Hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST(DataTest, ParseCsvDetectsHeader) {
  const CsvTable t = ParseCsv("a, b\n1,2\r\n3,4.5\n\n");
  EXPECT_EQ(t.header, (std::vector<std::string>{"a", "b"}));
  ASSERT_EQ(t.values.rows(), 2);
  EXPECT_EQ(t.values(1, 1), 4.5);
  EXPECT_TRUE(ParseCsv("1,2\n").header.empty());
  EXPECT_THROW(ParseCsv("1,2\n3\n"), DataError);
  EXPECT_THROW(ParseCsv("1,2\n3,x\n"), DataError);
  EXPECT_THROW(ParseCsv("a,b\n"), DataError);
}

TEST(DataTest, PcaOnDiagonalCovarianceFindsAxes) {
  Eigen::MatrixXd x(8, 3);
  int r = 0;
  for (int a : {-1, 1}) {
    for (int b : {-1, 1}) {
      for (int c : {-1, 1}) x.row(r++) << 2.0 * b, 3.0 * a, 1.0 * c;
    }
  }
  const Pca pca = FitPca(x, 3);
  EXPECT_NEAR(pca.components(1, 0), 1.0, 1e-12);
  EXPECT_NEAR(pca.components(0, 1), 1.0, 1e-12);
  EXPECT_NEAR(pca.components(2, 2), 1.0, 1e-12);
  EXPECT_NEAR((pca.components.transpose() * pca.components - Eigen::Matrix3d::Identity()).norm(), 0.0, 1e-12);
  EXPECT_GT(pca.variances(0), pca.variances(1));
  EXPECT_THROW(FitPca(x, 4), DataError);
}

TEST(DataTest, IrisAndWineProjections) {
  const TabularData iris = LoadTabular(Shipped("iris", "iris.csv"));
  EXPECT_EQ(iris.x.rows(), 150);
  EXPECT_EQ(iris.x.cols(), 3);
  EXPECT_EQ(iris.labels.size(), 150u);
  const CsvTable raw = ParseCsv(ReadSource(Shipped("iris", "iris.csv")));
  const Pca pca = FitPca(raw.values.leftCols(4), 3);
  EXPECT_LT((pca.components.transpose() * pca.components - Eigen::Matrix3d::Identity()).norm(), 1e-9);
  // Projected columns are centered and uncorrelated.
  EXPECT_LT(iris.x.colwise().mean().norm(), 1e-9);
  const Eigen::MatrixXd cov = iris.x.transpose() * iris.x / 149.0;
  EXPECT_LT(std::abs(cov(0, 1)) + std::abs(cov(0, 2)) + std::abs(cov(1, 2)), 1e-8);

  const TabularData wine = LoadTabular(Shipped("wine", "wine.csv"));
  EXPECT_EQ(wine.x.rows(), 178);
  EXPECT_EQ(wine.x.cols(), 6);
}

TEST(DataTest, BrcaSubsetIsStandardized) {
  const TabularData brca = LoadTabular(Shipped("brca", "wdbc.csv"));
  ASSERT_EQ(brca.x.rows(), 569);
  ASSERT_EQ(brca.x.cols(), 3);
  EXPECT_EQ(brca.columns, (std::vector<std::string>{"worst_area", "worst_smoothness", "mean_texture"}));
  for (int j = 0; j < 3; ++j) {
    const double mean = brca.x.col(j).mean();
    EXPECT_LT(std::abs(mean), 1e-9);
    EXPECT_NEAR((brca.x.col(j).array() - mean).square().mean(), 1.0, 1e-9);
  }
  EXPECT_THROW(Standardize(Eigen::MatrixXd::Ones(3, 1)), DataError);
}

TEST(DataTest, LoadingIsIdempotent) {
  const TabularData a = LoadTabular(Shipped("iris", "iris.csv"));
  const TabularData b = LoadTabular(Shipped("iris", "iris.csv"));
  EXPECT_EQ(TabularToCsv(a), TabularToCsv(b));
  EXPECT_EQ(a.content_hash, b.content_hash);
  DatasetSpec bad = Shipped("iris", "iris.csv");
  bad.sha256 = std::string(64, '0');
  EXPECT_THROW(LoadTabular(bad), CacheCorruptionError);
  bad.transform = "pca9";
  bad.sha256.clear();
  EXPECT_THROW(LoadTabular(bad), ConfigError);
}

TEST(DataTest, CacheNeverRefetches) {
  const fs::path dir = ScratchDir("cache");
  const fs::path src = dir / "source.csv";
  WriteText(src, "x,label\n1,1\n2,2\n");
  const std::string url = "file://" + src.string();
  ArtifactCache cache(dir / "store");
  EXPECT_FALSE(cache.Contains(url));
  const std::string first = cache.Fetch(url);
  EXPECT_TRUE(cache.Contains(url));
  EXPECT_TRUE(fs::exists(dir / "store" / Sha256Hex(first)));
  fs::remove(src);
  EXPECT_EQ(cache.Fetch(url), first);

  WriteText(dir / "store" / Sha256Hex(first), "tampered");
  EXPECT_THROW(cache.Fetch(url), CacheCorruptionError);
  EXPECT_THROW(cache.Fetch("file://" + (dir / "missing.csv").string()), AcquisitionError);

  WriteText(src, "x\n1\n");
  EXPECT_THROW(ArtifactCache(dir / "other").Fetch(url, std::string(64, 'a')), CacheCorruptionError);
}

TEST(DataTest, UrlSourcesGoThroughTheCache) {
  const fs::path dir = ScratchDir("url");
  fs::copy_file(kDataDir / "iris.csv", dir / "iris.csv");
  DatasetSpec spec;
  spec.name = "iris";
  spec.source = "file://" + (dir / "iris.csv").string();
  spec.cache_dir = dir / "cache";
  const TabularData first = LoadTabular(spec);
  fs::remove(dir / "iris.csv");
  EXPECT_EQ(LoadTabular(spec).content_hash, first.content_hash);
  EXPECT_EQ(first.content_hash, LoadTabular(Shipped("iris", "iris.csv")).content_hash);
}

TEST(DataTest, CacheDirEnvironmentOverride) {
  setenv("GBDMAP_CACHE_DIR", "/tmp/gbdmap-override", 1);
  EXPECT_EQ(DefaultCacheDir(), fs::path("/tmp/gbdmap-override"));
  unsetenv("GBDMAP_CACHE_DIR");
  EXPECT_NE(DefaultCacheDir(), fs::path("/tmp/gbdmap-override"));
}

TEST(DataTest, TokenizerLowercasesAndFilters) {
  EXPECT_EQ(Tokenize("The NASA launch, of the Shuttle!! x2 don't"),
            (std::vector<std::string>{"nasa", "launch", "shuttle"}));
  EXPECT_TRUE(IsStopword("the"));
  EXPECT_FALSE(IsStopword("orbit"));
}

TEST(DataTest, VocabularyTiesAreLexicographic) {
  const std::vector<std::string> raw = {"delta alpha alpha", "charlie bravo delta", "echo"};
  const CorpusBuild b = BuildCorpus(raw, 3, 3, 1);
  EXPECT_EQ(b.corpus.vocab, (std::vector<std::string>{"alpha", "delta", "bravo"}));
  ASSERT_EQ(b.corpus.docs.size(), 2u);
  ASSERT_EQ(b.warnings.size(), 1u);
  const CorpusBuild all = BuildCorpus(raw, 3, 100, 1);
  EXPECT_EQ(all.corpus.vocab.size(), 5u);
  EXPECT_EQ(all.corpus.docs.size(), 3u);
}

TEST(DataTest, CorpusSubsampleIsDeterministic) {
  const auto raw = GenerateNewsSurrogate(400, 7);
  const CorpusBuild a = BuildCorpus(raw, 50, 25, 3);
  const CorpusBuild b = BuildCorpus(raw, 50, 25, 3);
  EXPECT_EQ(a.corpus.vocab.size(), 25u);
  EXPECT_EQ(a.corpus.docs.size(), 50u);
  EXPECT_EQ(CorpusDocsText(a.corpus), CorpusDocsText(b.corpus));
  EXPECT_EQ(a.source_docs, b.source_docs);
  EXPECT_NE(BuildCorpus(raw, 50, 25, 4).source_docs, a.source_docs);
  EXPECT_EQ(GenerateNewsSurrogate(400, 7), raw);
  a.corpus.Validate();
}

TEST(DataTest, CorpusTextRoundTrip) {
  const Corpus c = GeneratePlantedCorpus(6, 5, 10, 2);
  const Corpus back = ParseCorpus(CorpusDocsText(c), CorpusVocabText(c));
  EXPECT_EQ(back.docs, c.docs);
  EXPECT_EQ(back.vocab, c.vocab);
  EXPECT_THROW(ParseCorpus("w000 zzz\n", CorpusVocabText(c)), DataError);
}

TEST(DataTest, HeldOutSplitShapes) {
  Corpus c;
  c.vocab = {"a", "b"};
  for (int d = 0; d < 300; ++d) c.docs.push_back({0, 1, 0, 1, 1});
  const HeldOutSplit s = SplitHeldOut(c, 0.9, 11);
  EXPECT_EQ(s.train.docs.size(), 270u);
  ASSERT_EQ(s.fold_in.size(), 30u);
  EXPECT_EQ(s.fold_in[0].size(), 3u);
  EXPECT_EQ(s.evaluate[0].size(), 2u);
  EXPECT_EQ(SplitHeldOut(c, 0.9, 11).test_docs, s.test_docs);
  EXPECT_THROW(SplitHeldOut(c, 1.0, 1), ConfigError);

  c.docs.assign(10, {0});
  const HeldOutSplit tiny = SplitHeldOut(c, 0.5, 1);
  EXPECT_TRUE(tiny.fold_in.empty());
  EXPECT_EQ(tiny.warnings.size(), 5u);
}

TEST(DataTest, PlantedGenerators) {
  SyntheticSpec spec;
  spec.n = 40;
  const TabularData a = GeneratePlantedMixture(spec);
  EXPECT_EQ(a.content_hash, GeneratePlantedMixture(spec).content_hash);
  EXPECT_EQ(a.labels[0], 1);
  EXPECT_EQ(a.labels[1], 2);
  std::vector<int> topics;
  const Corpus c = GeneratePlantedCorpus(4, 20, 10, 1, &topics);
  for (std::size_t d = 0; d < c.docs.size(); ++d) {
    for (int w : c.docs[d]) EXPECT_EQ(w / 5, topics[d]);
  }
}

}  // namespace
}  // namespace gbdmap
