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

// Reusable factor families.

#ifndef GBDMAP_FACTORS_H_
#define GBDMAP_FACTORS_H_

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gbdmap/factor_graph.h"

namespace gbdmap {

// -x'Qx/2 + b'x + c over the concatenated scope values. Scope variables must be
// binary, unit-interval or box valued; at most 8 continuous coordinates.
class QuadraticFactor : public Factor {
 public:
  QuadraticFactor(std::vector<VarId> scope, Eigen::MatrixXd q, Eigen::VectorXd b,
                  double c = 0.0, std::string family = "quadratic");

  double eval(const ScopeValues& x) const override;
  ScopeVectors gradient(const ScopeValues& x) const override;
  std::optional<SupResult> tilted_sup(std::span<const double> binary, const ScopeVectors& u,
                                      const std::vector<const Domain*>& domains) const override;
  std::optional<SupResult> linear_sup(std::span<const double> g,
                                      const Domain& domain) const override;
  bool concave() const override { return concave_; }

 private:
  Eigen::VectorXd flatten(const ScopeValues& x) const;

  Eigen::MatrixXd q_;
  Eigen::VectorXd b_;
  double c_;
  bool concave_;
};

// z * log p[coord] with z binary and p on a simplex; 0 * log 0 is 0.
class BinaryLogCoordinateFactor : public Factor {
 public:
  BinaryLogCoordinateFactor(VarId z, VarId p, int coord, std::string family);

  double eval(const ScopeValues& x) const override;
  ScopeVectors gradient(const ScopeValues& x) const override;
  std::optional<SupResult> tilted_sup(std::span<const double> binary, const ScopeVectors& u,
                                      const std::vector<const Domain*>& domains) const override;
  int coord() const { return coord_; }

 private:
  int coord_;
};

// sum_j c_j log p_j on a simplex variable; terms with c_j = 0 vanish.
class SimplexLogPriorFactor : public Factor {
 public:
  SimplexLogPriorFactor(VarId p, std::vector<double> coef, std::string family);

  double eval(const ScopeValues& x) const override;
  ScopeVectors gradient(const ScopeValues& x) const override;
  std::optional<SupResult> linear_sup(std::span<const double> g,
                                      const Domain& domain) const override;
  bool concave() const override;

 private:
  std::vector<double> coef_;
};

// coef * z on a binary variable.
class BinaryLinearFactor : public Factor {
 public:
  BinaryLinearFactor(VarId z, double coef, std::string family);

  double eval(const ScopeValues& x) const override;
  ScopeVectors gradient(const ScopeValues& x) const override;
  std::optional<SupResult> linear_sup(std::span<const double> g,
                                      const Domain& domain) const override;
  bool concave() const override { return true; }
  double coef() const { return coef_; }

 private:
  double coef_;
};

}  // namespace gbdmap

#endif  // GBDMAP_FACTORS_H_
