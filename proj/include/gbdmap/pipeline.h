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

// End-to-end experiment runs and run-directory comparison.

#ifndef GBDMAP_PIPELINE_H_
#define GBDMAP_PIPELINE_H_

#include <exception>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "gbdmap/bgmm.h"
#include "gbdmap/config.h"
#include "gbdmap/errors.h"
#include "gbdmap/gbd.h"
#include "gbdmap/lda.h"

namespace gbdmap {

enum ExitCode {
  kExitOk = 0,
  kExitError = 1,
  kExitConfig = 2,
  kExitInfeasible = 3,
  kExitCompareRefused = 4,
  kExitAcquisition = 5,
};

// Refusal to compare runs over different datasets.
class CompareError : public Error {
 public:
  using Error::Error;
};

int ExitCodeFor(const std::exception& e);

// Text formats, one record per line with '#' comments. Labels and token
// topics are one-based on disk.
std::string BgmmLatentText(const BgmmLatent& latent);
BgmmLatent ParseBgmmLatent(const std::string& text);
std::string LdaLatentText(const LdaLatent& latent);
LdaLatent ParseLdaLatent(const std::string& text);

// Topic proportions of held-out documents by alternating exact conditional
// maximization of token topics and mixtures, with `beta` fixed.
Eigen::MatrixXd MapFoldIn(const std::vector<std::vector<int>>& docs, const Eigen::MatrixXd& beta,
                          const Eigen::VectorXd& alpha, int max_sweeps = 100);

struct RunReport {
  double log_map = 0.0;
  std::optional<double> upper_bound;
  std::string certificate = "none";
  std::optional<double> gap;
  std::optional<HeldOutScore> heldout;
  std::vector<int> labels;  // zero-based, bgmm only
  std::optional<GbdResult> gbd;
  std::string config_hash;
  std::string dataset_hash;
  double seconds = 0.0;
};

// Runs the configured experiment and writes its result files into
// config.output_dir. `log` receives progress lines when non-null.
RunReport RunExperiment(const RunConfig& config, std::ostream* log = nullptr);

// Key-value lines of a summary file.
std::map<std::string, std::string> ReadSummary(const std::filesystem::path& run_dir);

// Prints the comparison tables for completed run directories; writes CSV
// renderings into `csv_dir` when it is non-empty. Throws CompareError when
// the runs used different datasets.
void CompareRuns(const std::vector<std::filesystem::path>& run_dirs, std::ostream& out,
                 const std::filesystem::path& csv_dir = {});

}  // namespace gbdmap

#endif  // GBDMAP_PIPELINE_H_
