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

#ifndef GBDMAP_DOMAIN_H_
#define GBDMAP_DOMAIN_H_

#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace gbdmap {

enum class DomainKind { kBinary, kUnitInterval, kSimplex, kPositiveDefinite, kBox };

// Result of maximizing a function over a domain.
struct SupResult {
  double value = 0.0;
  std::vector<double> argmax;
  // True when `value` is the exact supremum, false when it is only an upper
  // bound.
  bool exact = true;
};

// The set a variable ranges over. Positive-definite matrices are stored as
// dim*dim column-major scalars.
class Domain {
 public:
  static Domain Binary();
  static Domain UnitInterval();
  // Probability simplex with every coordinate at least `floor`.
  static Domain Simplex(int dim, double floor = 0.0);
  // Symmetric matrices with eigenvalues >= eig_floor and trace <= trace_cap.
  static Domain PositiveDefinite(
      int dim, double eig_floor = 1e-12,
      double trace_cap = std::numeric_limits<double>::infinity());
  static Domain Box(std::vector<double> lower, std::vector<double> upper);

  DomainKind kind() const { return kind_; }
  int dim() const { return dim_; }
  std::size_t size() const;
  double floor() const { return floor_; }
  double cap() const { return cap_; }
  const std::vector<double>& lower() const { return lower_; }
  const std::vector<double>& upper() const { return upper_; }
  bool is_binary() const { return kind_ == DomainKind::kBinary; }

  bool contains(std::span<const double> x, double tol = 1e-9) const;
  // Euclidean-style projection; for the PD domain eigenvalues are clipped and
  // the trace cap enforced by uniform shrinking toward the floor.
  void project(std::span<double> x) const;
  // sup over the domain of <g, x>. Throws UnboundedCutError if infinite.
  SupResult linear_sup(std::span<const double> g) const;
  // A point in the relative interior.
  std::vector<double> interior_point() const;
  std::string describe() const;

 private:
  DomainKind kind_ = DomainKind::kBinary;
  int dim_ = 1;
  double floor_ = 0.0;
  double cap_ = std::numeric_limits<double>::infinity();
  std::vector<double> lower_;
  std::vector<double> upper_;
};

}  // namespace gbdmap

#endif  // GBDMAP_DOMAIN_H_
