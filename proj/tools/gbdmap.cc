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

// gbdmap run --config FILE [--seed N] [--output DIR] [--verbose]
// gbdmap compare DIR DIR... [--output DIR]

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "gbdmap/config.h"
#include "gbdmap/errors.h"
#include "gbdmap/metrics.h"
#include "gbdmap/pipeline.h"

int main(int argc, char** argv) {
  CLI::App app{"MAP inference by generalized Benders decomposition"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string output;
  bool verbose = false;
  CLI::App* run = app.add_subcommand("run", "Run one experiment");
  run->add_option("--config", config_path, "Experiment configuration file")->required();
  run->add_option("--seed", seed, "Override the configured seed");
  run->add_option("--output", output, "Override the configured output directory");
  run->add_flag("--verbose", verbose, "Print solver progress");

  std::vector<std::string> dirs;
  std::string csv_dir;
  CLI::App* compare = app.add_subcommand("compare", "Tabulate completed runs");
  compare->add_option("dirs", dirs, "Run directories")->required()->expected(2, -1);
  compare->add_option("--output", csv_dir, "Directory for CSV tables");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : gbdmap::kExitConfig;
  }

  try {
    if (*run) {
      gbdmap::RunConfig config = gbdmap::RunConfig::Load(config_path);
      if (seed) config.seed = *seed;
      if (!output.empty()) config.output_dir = output;
      const gbdmap::RunReport report = gbdmap::RunExperiment(config, verbose ? &std::cerr : nullptr);
      std::cout << "log MAP: " << gbdmap::FormatFixed(report.log_map) << "\n";
      if (report.upper_bound) std::cout << "upper bound: " << gbdmap::FormatFixed(*report.upper_bound) << "\n";
      std::cout << "certificate: " << report.certificate << "\n";
      if (report.heldout) std::cout << "perplexity: " << gbdmap::FormatFixed(report.heldout->perplexity) << "\n";
      std::cout << "runtime: " << gbdmap::FormatFixed(report.seconds) << " s\n";
      std::cout << "results: " << config.output_dir.string() << "\n";
    } else {
      std::vector<std::filesystem::path> paths(dirs.begin(), dirs.end());
      gbdmap::CompareRuns(paths, std::cout, csv_dir);
    }
  } catch (const std::exception& e) {
    std::cerr << "gbdmap: " << e.what() << "\n";
    return gbdmap::ExitCodeFor(e);
  }
  return gbdmap::kExitOk;
}
