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

// Clustering comparison and result tables.

#ifndef GBDMAP_METRICS_H_
#define GBDMAP_METRICS_H_

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace gbdmap {

// Labels are arbitrary integers; only equality matters.
using Clustering = std::vector<int>;

// Argmax per row, ties to the lowest column; labels start at 1.
Clustering ClusteringFromOneHot(const Eigen::MatrixXd& z);

// Variation of information in nats. Throws StructuralError on a length
// mismatch.
double VariationOfInformation(const Clustering& a, const Clustering& b);

struct RunSummary {
  std::string method;
  Clustering labels;
  double log_map = 0.0;
  std::optional<double> upper_bound;
  double seconds = 0.0;
  std::string certificate;
  std::optional<double> gap;
  std::optional<double> heldout_loglik;
  std::optional<double> perplexity;
};

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::string ToCsv() const;
  // Columns padded to a common width.
  std::string ToText() const;
};

std::string FormatFixed(double value, int decimals = 3);
// Shortest text that parses back to the same double.
std::string FormatFull(double value);

Table VoiTable(const std::vector<RunSummary>& runs, bool full_precision);
// "log MAP (UB)" in text form; separate columns in CSV form.
Table LogMapTable(const std::vector<RunSummary>& runs, bool full_precision);
Table RuntimeTable(const std::vector<RunSummary>& runs, bool full_precision);
Table PerplexityTable(const std::vector<RunSummary>& runs, bool full_precision);

}  // namespace gbdmap

#endif  // GBDMAP_METRICS_H_
