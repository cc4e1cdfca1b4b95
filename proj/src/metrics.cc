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

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include "gbdmap/errors.h"

namespace gbdmap {
namespace {

double Entropy(const std::map<int, double>& counts, double n) {
  double h = 0.0;
  for (const auto& [label, c] : counts) {
    if (c > 0.0) h -= (c / n) * std::log(c / n);
  }
  return h;
}

std::string Cell(double v, bool full) { return full ? FormatFull(v) : FormatFixed(v); }

std::string Quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

Clustering ClusteringFromOneHot(const Eigen::MatrixXd& z) {
  Clustering out(static_cast<std::size_t>(z.rows()));
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    Eigen::Index best = 0;
    for (Eigen::Index c = 1; c < z.cols(); ++c) {
      if (z(i, c) > z(i, best)) best = c;
    }
    out[static_cast<std::size_t>(i)] = static_cast<int>(best) + 1;
  }
  return out;
}

double VariationOfInformation(const Clustering& a, const Clustering& b) {
  if (a.size() != b.size()) {
    throw StructuralError("clusterings have different lengths: " + std::to_string(a.size()) +
                          " and " + std::to_string(b.size()));
  }
  if (a.empty()) return 0.0;
  const double n = static_cast<double>(a.size());
  std::map<int, double> ca, cb;
  std::map<std::pair<int, int>, double> joint;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ca[a[i]] += 1.0;
    cb[b[i]] += 1.0;
    joint[{a[i], b[i]}] += 1.0;
  }
  double mutual = 0.0;
  for (const auto& [key, c] : joint) {
    mutual += (c / n) * std::log(c * n / (ca[key.first] * cb[key.second]));
  }
  return std::max(0.0, Entropy(ca, n) + Entropy(cb, n) - 2.0 * mutual);
}

std::string FormatFixed(double value, int decimals) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, value);
  std::string s(buf);
  if (s == "-0.000") s = "0.000";
  return s;
}

std::string FormatFull(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

std::string Table::ToCsv() const {
  std::ostringstream os;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t j = 0; j < cells.size(); ++j) os << (j ? "," : "") << Quote(cells[j]);
    os << '\n';
  };
  line(header);
  for (const auto& r : rows) line(r);
  return os.str();
}

std::string Table::ToText() const {
  std::vector<std::size_t> width(header.size(), 0);
  for (std::size_t j = 0; j < header.size(); ++j) width[j] = header[j].size();
  for (const auto& r : rows) {
    for (std::size_t j = 0; j < r.size() && j < width.size(); ++j) width[j] = std::max(width[j], r[j].size());
  }
  std::ostringstream os;
  auto line = [&](const std::vector<std::string>& cells) {
    std::string s;
    for (std::size_t j = 0; j < cells.size(); ++j) {
      if (j) s += "  ";
      s += cells[j];
      if (j + 1 < cells.size()) s.append(width[j] - cells[j].size(), ' ');
    }
    os << s << '\n';
  };
  line(header);
  std::size_t total = 0;
  for (std::size_t w : width) total += w;
  os << std::string(total + 2 * (width.empty() ? 0 : width.size() - 1), '-') << '\n';
  for (const auto& r : rows) line(r);
  return os.str();
}

Table VoiTable(const std::vector<RunSummary>& runs, bool full_precision) {
  Table t;
  t.header.push_back("Label");
  for (const auto& r : runs) t.header.push_back(r.method);
  for (const auto& a : runs) {
    std::vector<std::string> row = {a.method};
    for (const auto& b : runs) row.push_back(Cell(VariationOfInformation(a.labels, b.labels), full_precision));
    t.rows.push_back(std::move(row));
  }
  return t;
}

Table LogMapTable(const std::vector<RunSummary>& runs, bool full_precision) {
  Table t;
  if (full_precision) {
    t.header = {"method", "log_map", "upper_bound"};
    for (const auto& r : runs) {
      t.rows.push_back({r.method, FormatFull(r.log_map), r.upper_bound ? FormatFull(*r.upper_bound) : ""});
    }
  } else {
    t.header = {"method", "log MAP (UB)"};
    for (const auto& r : runs) {
      std::string cell = FormatFixed(r.log_map);
      if (r.upper_bound) cell += " (" + FormatFixed(*r.upper_bound) + ")";
      t.rows.push_back({r.method, cell});
    }
  }
  return t;
}

Table RuntimeTable(const std::vector<RunSummary>& runs, bool full_precision) {
  Table t;
  t.header = {"method", "runtime_s", "certificate", "gap"};
  for (const auto& r : runs) {
    t.rows.push_back({r.method, Cell(r.seconds, full_precision), r.certificate.empty() ? "none" : r.certificate,
                      r.gap ? Cell(*r.gap, full_precision) : ""});
  }
  return t;
}

Table PerplexityTable(const std::vector<RunSummary>& runs, bool full_precision) {
  Table t;
  t.header = {"method", "log_likelihood", "perplexity"};
  for (const auto& r : runs) {
    t.rows.push_back({r.method, r.heldout_loglik ? Cell(*r.heldout_loglik, full_precision) : "",
                      r.perplexity ? Cell(*r.perplexity, full_precision) : ""});
  }
  return t;
}

}  // namespace gbdmap
