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

// Dataset acquisition, caching and preprocessing.

#ifndef GBDMAP_DATA_H_
#define GBDMAP_DATA_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "gbdmap/lda.h"

namespace gbdmap {

std::string Sha256Hex(std::string_view bytes);

// $GBDMAP_CACHE_DIR, else $XDG_CACHE_HOME/gbdmap, else ~/.cache/gbdmap.
std::filesystem::path DefaultCacheDir();

// Reads a URL with libcurl (http, https, file). Throws AcquisitionError.
std::string FetchUrl(const std::string& url);

// Content-addressed store: blobs are named by their SHA-256 and a manifest
// maps each source to its hash. A cached source is never fetched again.
class ArtifactCache {
 public:
  explicit ArtifactCache(std::filesystem::path dir);

  // Bytes of `source`. Throws CacheCorruptionError when a cached blob no
  // longer matches its hash or when `expected_sha256` is given and differs,
  // and AcquisitionError when the source is unreachable and not cached.
  std::string Fetch(const std::string& source, const std::string& expected_sha256 = "");
  bool Contains(const std::string& source) const;
  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path ManifestPath() const;
  std::string Lookup(const std::string& source) const;
  void Record(const std::string& source, const std::string& sha);

  std::filesystem::path dir_;
};

struct SyntheticSpec {
  int n = 200;
  int k = 2;
  int d = 2;
  double separation = 10.0;
  std::uint64_t seed = 1;
};

struct DatasetSpec {
  std::string name;       // iris, wine, brca, news20, synthetic
  std::string source;     // URL or local path
  std::string sha256;     // expected content hash; empty skips the check
  std::string transform;  // recipe id; empty selects the dataset default
  std::filesystem::path cache_dir;
  SyntheticSpec synthetic;

  // Default recipe for the dataset name.
  std::string Recipe() const;
};

// Raw bytes of a source: URLs go through the cache, local paths are read
// directly. Both honor `sha256`.
std::string ReadSource(const DatasetSpec& spec);

struct CsvTable {
  std::vector<std::string> header;  // empty when the file has none
  Eigen::MatrixXd values;
};

// Comma separated numbers. A first row with a non-numeric field is a header.
// Throws DataError on ragged rows or unparsable cells.
CsvTable ParseCsv(const std::string& text);

struct Pca {
  Eigen::VectorXd mean;
  Eigen::MatrixXd components;  // D x r, orthonormal columns
  Eigen::VectorXd variances;   // descending

  Eigen::MatrixXd Project(const Eigen::MatrixXd& x) const;
};

// Eigendecomposition of the sample covariance; each component is flipped so
// that its largest-magnitude loading is positive.
Pca FitPca(const Eigen::MatrixXd& x, int components);

// Zero mean, unit population variance per column. Throws DataError on a
// constant column.
Eigen::MatrixXd Standardize(const Eigen::MatrixXd& x);

struct TabularData {
  Eigen::MatrixXd x;
  std::vector<int> labels;  // empty when the source has none
  std::vector<std::string> columns;
  std::string content_hash;  // SHA-256 of the processed CSV rendering
};

// Recipes: "pca3", "pca6", "brca3" (worst area, worst smoothness, mean
// texture, standardized), "raw".
TabularData ApplyRecipe(const CsvTable& table, const std::string& recipe);
TabularData LoadTabular(const DatasetSpec& spec);

// Rows of the data followed by a "label" column when labels are present.
std::string TabularToCsv(const TabularData& data);

// Well-separated Gaussian clusters with centers on a scaled simplex.
TabularData GeneratePlantedMixture(const SyntheticSpec& spec);

// Lowercased alphabetic runs of length at least 2, minus stopwords.
std::vector<std::string> Tokenize(std::string_view text);
bool IsStopword(std::string_view word);

struct CorpusBuild {
  Corpus corpus;
  std::vector<std::size_t> source_docs;  // index of each kept document
  std::vector<std::string> warnings;
};

// Seeded subsample of `n_docs` nonempty documents (source order kept), a
// vocabulary of the `vocab_size` most frequent words (ties lexicographic),
// and out-of-vocabulary tokens dropped. Documents left empty are dropped
// with a warning.
CorpusBuild BuildCorpus(const std::vector<std::string>& raw_docs, int n_docs, int vocab_size,
                        std::uint64_t seed);

// One raw document per nonempty line.
std::vector<std::string> SplitLines(const std::string& text);

// Raw news documents: the configured source, or the generated surrogate
// when no source is set.
std::vector<std::string> LoadRawDocuments(const DatasetSpec& spec, std::vector<std::string>* warnings);

// Synthetic newsgroup-style posts drawn from a mixture of themed word lists
// with stopword filler.
std::vector<std::string> GenerateNewsSurrogate(int n_docs, std::uint64_t seed);

// Two topics over disjoint halves of the vocabulary; each document uses one.
Corpus GeneratePlantedCorpus(int n_docs, int doc_length, int vocab_size, std::uint64_t seed,
                             std::vector<int>* doc_topic = nullptr);

// Documents as whitespace-separated words, one per line; vocabulary one word
// per line.
std::string CorpusDocsText(const Corpus& corpus);
std::string CorpusVocabText(const Corpus& corpus);
Corpus ParseCorpus(const std::string& docs_text, const std::string& vocab_text);

struct HeldOutSplit {
  Corpus train;
  std::vector<std::vector<int>> fold_in;   // first ceil(n/2) tokens
  std::vector<std::vector<int>> evaluate;  // remaining tokens
  std::vector<std::size_t> test_docs;      // indices into the input corpus
  std::vector<std::string> warnings;
};

// Seeded document-level split with round(train_frac * M) training documents.
// Test documents with fewer than two tokens are dropped with a warning.
HeldOutSplit SplitHeldOut(const Corpus& corpus, double train_frac, std::uint64_t seed);

// Fisher-Yates with an unbiased bounded draw, identical on every platform.
void SeededShuffle(std::vector<std::size_t>& items, std::uint64_t seed);

}  // namespace gbdmap

#endif  // GBDMAP_DATA_H_
