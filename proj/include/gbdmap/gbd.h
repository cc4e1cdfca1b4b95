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

// Generalized Benders' decomposition over a clone-augmented factor graph.

#ifndef GBDMAP_GBD_H_
#define GBDMAP_GBD_H_

#include <functional>
#include <limits>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include "gbdmap/factor_graph.h"
#include "gbdmap/master.h"

namespace gbdmap {

struct SubproblemResult {
  // Log posterior at the fixed point.
  double value = 0.0;
  // Equality multipliers, one vector per clone (indexed by CloneId).
  std::vector<std::vector<double>> multipliers;
};

// Evaluates the subproblem at a fixed assignment. Throws DomainError when xbar
// leaves its domains and BoundaryError when a multiplier is undefined.
SubproblemResult SolveSubproblem(const AugmentedGraph& graph, const Assignment& xbar);

// Builds the optimality cut generated at xbar. Binary multipliers are moved
// inside the normal cone of [0, 1] so that the cut is as low as possible at
// xbar while staying valid.
BendersCut BuildOptimalityCut(const AugmentedGraph& graph, const SubproblemResult& sub,
                              const Assignment& xbar);

// Rows for an infeasible master point: the violated rows themselves and a
// no-good cut on the binaries they involve.
std::vector<LinearConstraint> BuildFeasibilityCut(const std::vector<LinearConstraint>& violated,
                                                  const Assignment& xhat);

enum class CertificateStatus { kEpsOptimal, kIterationLimit, kTimeLimit, kInfeasible };

std::string ToString(CertificateStatus status);

struct Certificate {
  CertificateStatus status = CertificateStatus::kIterationLimit;
  double lbd = -std::numeric_limits<double>::infinity();
  double ubd = std::numeric_limits<double>::infinity();
  double gap = std::numeric_limits<double>::infinity();
  double epsilon = 1e-3;
  int iterations = 0;
  // Some coupling factor is non-concave, so bounds certify a local optimum
  // relative to the cut family rather than the global MAP.
  bool local = false;
  // Every cut came from closed-form block bounds.
  bool certified_bounds = true;
};

struct TraceRow {
  int iteration = 0;
  double lbd = 0.0;
  double ubd = 0.0;
  double seconds = 0.0;
};

struct GbdProblem {
  std::shared_ptr<const FactorGraph> graph;
  std::vector<LinearConstraint> constraints;
};

struct GbdOptions {
  double epsilon = 1e-3;
  int max_iterations = 50;
  double time_limit = std::numeric_limits<double>::infinity();
  MasterConfig master;
  // Maps an assignment to one with the same binaries and better continuous
  // values; every returned point is evaluated as an extra primal candidate.
  std::function<Assignment(const Assignment&)> polish;
  // When false the rows are enforced lazily through feasibility cuts.
  bool constraints_in_master = true;
  std::ostream* log = nullptr;
};

struct GbdResult {
  Assignment incumbent;
  double incumbent_value = -std::numeric_limits<double>::infinity();
  Certificate certificate;
  std::vector<TraceRow> trace;
  std::vector<BendersCut> cuts;
  std::vector<LinearConstraint> feasibility_rows;
  std::vector<double> master_seconds;
  double seconds = 0.0;
};

GbdResult RunGbd(const GbdProblem& problem, const Assignment& initial_point,
                 const GbdOptions& options);

// Checks LBD nondecreasing, UBD nonincreasing and LBD <= UBD + tol along the
// trace, and that the certificate agrees with the last row. Returns an empty
// string when everything holds, otherwise a description of the violation.
std::string CheckBoundDiscipline(const GbdResult& result, double tol = 1e-6);

}  // namespace gbdmap

#endif  // GBDMAP_GBD_H_
