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

// The relaxed master problem
//
//   max  sum_v theta_v(x_v) + min_j (<a_j, x> + c_j)
//   s.t. one-hot rows, linear rows on binaries, domain membership
//
// solved by best-first branch and bound over one-hot rows. Node bounds come
// from the Lagrangian dual over the cut weights and row multipliers, so every
// reported bound is valid even when the dual is not solved to optimality.

#ifndef GBDMAP_MASTER_H_
#define GBDMAP_MASTER_H_

#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gbdmap/factor_graph.h"

namespace gbdmap {

enum class Sense { kLessEqual, kGreaterEqual, kEqual };

struct LinearTerm {
  VarId var = 0;
  double coef = 0.0;
};

// sum coef * x_var (sense) rhs over scalar (size one) variables.
struct LinearConstraint {
  std::vector<LinearTerm> terms;
  Sense sense = Sense::kLessEqual;
  double rhs = 0.0;
  std::string label;

  double activity(const Assignment& x) const;
  bool satisfied(const Assignment& x, double tol = 1e-9) const;
};

// An upper-approximating function
//   L(x) = sum_{singletons} theta_v(x_v) + <linear, x> + constant.
struct BendersCut {
  Assignment linear;  // per variable; an empty entry means zero
  double constant = 0.0;
  Assignment generator;
  double generator_value = 0.0;
  // Every block attains its bound at the generator.
  bool tight = false;
  // Every block bound came from a closed form (not a local search).
  bool certified = true;

  double linear_part(const Assignment& x) const;
  double value_at(const FactorGraph& graph, const Assignment& x) const;
};

struct MasterProblem {
  std::shared_ptr<const FactorGraph> graph;
  std::vector<BendersCut> cuts;
  std::vector<LinearConstraint> constraints;
};

struct MasterConfig {
  std::size_t node_limit = 50000;
  double time_limit = 600.0;
  int dual_iterations = 500;
  double gap_tolerance = 1e-6;
  // Fix the first one-hot row to its first option (label symmetry breaking).
  bool anchor_labels = false;
  // A previously certified master bound; the result never exceeds it.
  double bound_hint = std::numeric_limits<double>::infinity();
  std::ostream* node_log = nullptr;
};

enum class MasterStatus { kOptimal, kLimit, kInfeasible };

struct MasterResult {
  MasterStatus status = MasterStatus::kLimit;
  std::optional<Assignment> point;
  double point_value = -std::numeric_limits<double>::infinity();
  // Valid upper bound on the master optimum.
  double upper_bound = std::numeric_limits<double>::infinity();
  std::size_t nodes = 0;
  std::size_t leaves = 0;
  double seconds = 0.0;
};

// Per-binary fixing: -1 free, 0 or 1 fixed.
struct BnBNode {
  std::vector<std::int8_t> fixed;
  double bound = std::numeric_limits<double>::infinity();
  int depth = 0;
  std::size_t id = 0;
};

struct RelaxationResult {
  double bound = std::numeric_limits<double>::infinity();
  // Averaged inner solutions of the dual, one entry per binary.
  std::vector<double> fractional;
  std::optional<Assignment> candidate;
  double candidate_value = -std::numeric_limits<double>::infinity();
  int iterations = 0;
};

// The master problem compiled into flat arrays.
class MasterModel {
 public:
  explicit MasterModel(const MasterProblem& problem);
  ~MasterModel();
  MasterModel(const MasterModel&) = delete;
  MasterModel& operator=(const MasterModel&) = delete;

  std::size_t num_binaries() const;
  VarId binary_var(std::size_t b) const;
  // Unit propagation of one-hot rows and linear rows. False when infeasible.
  bool propagate(std::vector<std::int8_t>& fixed) const;
  // Root node after propagation (and anchoring); nullopt when infeasible.
  std::optional<BnBNode> root(const MasterConfig& config) const;
  RelaxationResult relax(const BnBNode& node, const MasterConfig& config,
                         double prune_at = -std::numeric_limits<double>::infinity()) const;
  // Exact master objective: singletons plus the minimum over cuts.
  double objective(const Assignment& x) const;

 private:
  friend MasterResult SolveMaster(const MasterProblem& problem, const MasterConfig& config);

  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Throws UnboundedCutError when the problem has no cuts.
MasterResult SolveMaster(const MasterProblem& problem, const MasterConfig& config);

RelaxationResult ContinuousRelaxation(const BnBNode& node, const MasterProblem& problem,
                                      const MasterConfig& config);

}  // namespace gbdmap

#endif  // GBDMAP_MASTER_H_
