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

// Experiment configuration: an INI file with sections run, dataset, model,
// method, prior, constraints, solver, gibbs and lda.

#ifndef GBDMAP_CONFIG_H_
#define GBDMAP_CONFIG_H_

#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "gbdmap/bgmm.h"
#include "gbdmap/data.h"
#include "gbdmap/gibbs.h"

namespace gbdmap {

struct PriorConfig {
  std::optional<double> alpha;  // bgmm: 1, lda: 1/K
  double beta0 = 1.0;
  std::optional<std::vector<double>> mu0;  // default: data mean
  double w0_scale = 1.0;                   // W0 = w0_scale * I
  std::optional<double> nu0;               // default: D + 2
  double eta = 0.1;
};

struct SolverConfig {
  double epsilon = 1e-3;
  int max_iterations = 50;
  double time_limit = std::numeric_limits<double>::infinity();
  double master_time_limit = 600.0;
  std::size_t node_limit = 50000;
  int dual_iterations = 500;
  std::string warm_start = "gibbs-mode";  // gibbs-mode, file, none
  std::string warm_start_file;
  int warm_start_sweeps = 200;
  bool anchor_labels = false;
};

struct CorpusConfig {
  int n_docs = 50;
  int vocab_size = 25;
  // Zero disables held-out evaluation.
  double train_frac = 0.0;
};

struct RunConfig {
  std::uint64_t seed = 1;
  std::filesystem::path output_dir;
  // Relative paths in the file are resolved against this directory.
  std::filesystem::path base_dir;

  DatasetSpec dataset;
  std::uint64_t data_seed = 1;
  std::string model = "bgmm";
  int k = 3;
  std::string method = "gbd";
  std::string latent_file;
  PriorConfig prior;
  std::vector<PairConstraint> pairs;  // zero-based indices
  int min_cluster_size = 0;
  SolverConfig solver;
  ChainConfig gibbs;
  ModeExtraction mode;
  CorpusConfig corpus;

  // Throws ConfigError on syntax errors, unknown keys or invalid values.
  static RunConfig Parse(const std::string& text, const std::filesystem::path& base_dir = {});
  static RunConfig Load(const std::filesystem::path& path);

  void Validate() const;
  std::filesystem::path Resolve(const std::string& path) const;
  // Every field with defaults filled in, output_dir excluded.
  std::string Resolved() const;
  std::string Hash() const;
};

// CSV rows "kind,i,j" with kind must_link or cannot_link and one-based
// indices; an optional header row is skipped.
std::vector<PairConstraint> ParsePairCsv(const std::string& text);

}  // namespace gbdmap

#endif  // GBDMAP_CONFIG_H_
