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

#include "gbdmap/gbd.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

#include "gbdmap/errors.h"

namespace gbdmap {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double Seconds(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - since).count();
}

// Local projected gradient ascent for factors without a closed form. The
// result is a lower estimate of the supremum and is flagged uncertified.
SupResult LocalTiltedSup(const Factor& f, const ScopeValues& start,
                         const std::vector<const Domain*>& domains, const ScopeVectors& u) {
  ScopeVectors x;
  for (const auto& s : start) x.emplace_back(s.begin(), s.end());
  auto objective = [&](const ScopeVectors& pt) {
    ScopeValues view;
    for (const auto& v : pt) view.emplace_back(v);
    double val = f.eval(view);
    for (std::size_t p = 0; p < pt.size(); ++p) {
      if (domains[p]->is_binary()) continue;
      for (std::size_t j = 0; j < pt[p].size(); ++j) val -= u[p][j] * pt[p][j];
    }
    return val;
  };
  double value = objective(x);
  double step = 1.0;
  for (int it = 0; it < 300 && step > 1e-14; ++it) {
    ScopeValues view;
    for (const auto& v : x) view.emplace_back(v);
    ScopeVectors g = f.gradient(view);
    ScopeVectors trial = x;
    for (std::size_t p = 0; p < x.size(); ++p) {
      if (domains[p]->is_binary()) continue;
      for (std::size_t j = 0; j < x[p].size(); ++j) trial[p][j] += step * (g[p][j] - u[p][j]);
      domains[p]->project(trial[p]);
    }
    const double tv = objective(trial);
    if (std::isfinite(tv) && tv > value) {
      x = std::move(trial);
      value = tv;
      step *= 1.5;
    } else {
      step *= 0.5;
    }
  }
  SupResult out;
  out.value = value;
  out.exact = false;
  return out;
}

bool SameAssignment(const Assignment& a, const Assignment& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t v = 0; v < a.size(); ++v) {
    if (a[v].size() != b[v].size()) return false;
    for (std::size_t j = 0; j < a[v].size(); ++j) {
      if (std::abs(a[v][j] - b[v][j]) > 1e-12 * (1.0 + std::abs(a[v][j]))) return false;
    }
  }
  return true;
}

}  // namespace

SubproblemResult SolveSubproblem(const AugmentedGraph& graph, const Assignment& xbar) {
  const FactorGraph& g = graph.base();
  g.check_domains(xbar);
  SubproblemResult out;
  out.multipliers.resize(graph.clones().size());
  double value = 0.0;
  for (FactorId f = 0; f < g.num_factors(); ++f) {
    const Factor& fac = g.factor(f);
    const ScopeValues vals = g.scope_values(fac, xbar);
    const double fv = fac.eval(vals);
    const bool coupling = !g.is_singleton(f);
    ScopeVectors grad;
    if (coupling || !std::isfinite(fv)) grad = fac.gradient(vals);
    // Blame a continuous variable first: binaries never sit on a boundary.
    std::optional<std::size_t> bad;
    for (std::size_t p = 0; p < grad.size(); ++p) {
      bool finite = true;
      for (double gv : grad[p]) finite = finite && std::isfinite(gv);
      if (finite) continue;
      if (!bad || (g.variable(fac.scope()[*bad]).domain.is_binary() &&
                   !g.variable(fac.scope()[p]).domain.is_binary())) {
        bad = p;
      }
    }
    if (!std::isfinite(fv) || bad) {
      const std::string& name = g.variable(fac.scope()[bad.value_or(0)]).name;
      throw BoundaryError(name, "factor " + fac.family() + " is undefined at the boundary value of " +
                                    name);
    }
    value += fv;
    if (!coupling) continue;
    const auto& ids = graph.clones_of(f);
    for (std::size_t p = 0; p < ids.size(); ++p) out.multipliers[ids[p]] = std::move(grad[p]);
  }
  out.value = value;
  return out;
}

BendersCut BuildOptimalityCut(const AugmentedGraph& graph, const SubproblemResult& sub,
                              const Assignment& xbar) {
  const FactorGraph& g = graph.base();
  BendersCut cut;
  cut.linear.resize(g.num_variables());
  cut.generator = xbar;
  cut.generator_value = sub.value;
  cut.tight = true;
  for (FactorId f : graph.coupling_factors()) {
    const Factor& fac = g.factor(f);
    const auto& scope = fac.scope();
    const auto& ids = graph.clones_of(f);
    std::vector<const Domain*> domains;
    std::vector<std::size_t> binary_pos;
    ScopeVectors u;
    for (std::size_t p = 0; p < scope.size(); ++p) {
      domains.push_back(&g.variable(scope[p]).domain);
      if (domains.back()->is_binary()) binary_pos.push_back(p);
      u.push_back(sub.multipliers.at(ids[p]));
    }
    const ScopeValues vals = g.scope_values(fac, xbar);
    auto restricted = [&](std::span<const double> vertex) {
      std::optional<SupResult> s = fac.tilted_sup(vertex, u, domains);
      if (s) return *s;
      ScopeVectors start;
      for (const auto& v : vals) start.emplace_back(v.begin(), v.end());
      for (std::size_t b = 0; b < binary_pos.size(); ++b) start[binary_pos[b]][0] = vertex[b];
      ScopeValues view;
      for (const auto& v : start) view.emplace_back(v);
      cut.certified = false;
      return LocalTiltedSup(fac, view, domains, u);
    };

    double block;
    if (binary_pos.empty()) {
      block = restricted({}).value;
    } else if (binary_pos.size() == 1) {
      const double zero = 0.0;
      const double one = 1.0;
      const double s0 = restricted(std::span<const double>(&zero, 1)).value;
      const double s1 = restricted(std::span<const double>(&one, 1)).value;
      double& uz = u[binary_pos[0]][0];
      const double zbar = vals[binary_pos[0]][0];
      uz = zbar >= 0.5 ? std::min(uz, s1 - s0) : std::max(uz, s1 - s0);
      block = std::max(s0, s1 - uz);
    } else {
      if (binary_pos.size() > 12) {
        throw StructuralError("factor " + fac.family() + " has too many binary scope entries");
      }
      block = -kInf;
      const std::size_t vertices = std::size_t{1} << binary_pos.size();
      std::vector<double> vertex(binary_pos.size());
      for (std::size_t code = 0; code < vertices; ++code) {
        double tilt = 0.0;
        for (std::size_t b = 0; b < binary_pos.size(); ++b) {
          vertex[b] = static_cast<double>((code >> b) & 1U);
          tilt += u[binary_pos[b]][0] * vertex[b];
        }
        block = std::max(block, restricted(vertex).value - tilt);
      }
    }
    double at_generator = fac.eval(vals);
    for (std::size_t p = 0; p < scope.size(); ++p) {
      for (std::size_t j = 0; j < u[p].size(); ++j) at_generator -= u[p][j] * vals[p][j];
    }
    // The generator is feasible for the block, so the supremum is at least its value.
    block = std::max(block, at_generator);
    if (block - at_generator > 1e-7 * (1.0 + std::abs(at_generator))) cut.tight = false;
    cut.constant += block;
    for (std::size_t p = 0; p < scope.size(); ++p) {
      auto& lin = cut.linear[scope[p]];
      if (lin.empty()) lin.assign(u[p].size(), 0.0);
      for (std::size_t j = 0; j < u[p].size(); ++j) lin[j] += u[p][j];
    }
  }
  return cut;
}

std::vector<LinearConstraint> BuildFeasibilityCut(const std::vector<LinearConstraint>& violated,
                                                  const Assignment& xhat) {
  std::vector<LinearConstraint> out(violated.begin(), violated.end());
  LinearConstraint nogood;
  nogood.sense = Sense::kGreaterEqual;
  nogood.rhs = 1.0;
  nogood.label = "nogood";
  std::vector<VarId> seen;
  for (const auto& row : violated) {
    for (const auto& t : row.terms) {
      if (std::find(seen.begin(), seen.end(), t.var) != seen.end()) continue;
      seen.push_back(t.var);
      if (xhat.at(t.var).at(0) >= 0.5) {
        nogood.terms.push_back({t.var, -1.0});
        nogood.rhs -= 1.0;
      } else {
        nogood.terms.push_back({t.var, 1.0});
      }
    }
  }
  if (!nogood.terms.empty()) out.push_back(std::move(nogood));
  return out;
}

std::string ToString(CertificateStatus status) {
  switch (status) {
    case CertificateStatus::kEpsOptimal:
      return "eps-optimal";
    case CertificateStatus::kIterationLimit:
      return "iteration-limit";
    case CertificateStatus::kTimeLimit:
      return "time-limit";
    case CertificateStatus::kInfeasible:
      return "infeasible";
  }
  return "unknown";
}

GbdResult RunGbd(const GbdProblem& problem, const Assignment& initial_point,
                 const GbdOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  const AugmentedGraph aug = BuildAugmented(problem.graph);
  const FactorGraph& g = *problem.graph;
  g.check_domains(initial_point);

  GbdResult result;
  Certificate& cert = result.certificate;
  cert.epsilon = options.epsilon;
  for (FactorId f : aug.coupling_factors()) {
    if (!g.factor(f).concave()) cert.local = true;
  }

  auto seen_before = [&](const Assignment& x) {
    for (const auto& c : result.cuts) {
      if (SameAssignment(c.generator, x)) return true;
    }
    return false;
  };
  auto feasible = [&](const Assignment& x) {
    try {
      g.check_domains(x);
    } catch (const DomainError&) {
      return false;
    }
    for (const auto& row : problem.constraints) {
      if (!row.satisfied(x)) return false;
    }
    return true;
  };
  // Cuts are valid everywhere, but only constraint-feasible points may become
  // the incumbent.
  auto consider = [&](const Assignment& x) {
    const SubproblemResult sub = SolveSubproblem(aug, x);
    BendersCut cut = BuildOptimalityCut(aug, sub, x);
    if (!cut.certified) cert.certified_bounds = false;
    result.cuts.push_back(std::move(cut));
    if (sub.value > result.incumbent_value && feasible(x)) {
      result.incumbent_value = sub.value;
      result.incumbent = x;
    }
  };
  auto consider_polished = [&](const Assignment& x) {
    if (!options.polish) return false;
    Assignment xp = options.polish(x);
    if (!feasible(xp) || seen_before(xp)) return false;
    consider(xp);
    return true;
  };

  consider(initial_point);
  consider_polished(initial_point);

  double ubd = kInf;
  int iteration = 0;
  cert.status = CertificateStatus::kIterationLimit;
  while (true) {
    if (iteration >= options.max_iterations) {
      cert.status = CertificateStatus::kIterationLimit;
      break;
    }
    const double elapsed = Seconds(start);
    if (elapsed >= options.time_limit) {
      cert.status = CertificateStatus::kTimeLimit;
      break;
    }
    ++iteration;
    MasterProblem mp;
    mp.graph = problem.graph;
    mp.cuts = result.cuts;
    if (options.constraints_in_master) mp.constraints = problem.constraints;
    mp.constraints.insert(mp.constraints.end(), result.feasibility_rows.begin(),
                          result.feasibility_rows.end());
    MasterConfig mc = options.master;
    mc.bound_hint = std::min(mc.bound_hint, ubd);
    mc.time_limit = std::min(mc.time_limit, options.time_limit - elapsed);
    const MasterResult master = SolveMaster(mp, mc);
    result.master_seconds.push_back(master.seconds);
    if (master.status == MasterStatus::kInfeasible) {
      cert.status = CertificateStatus::kInfeasible;
      break;
    }
    ubd = std::min(ubd, master.upper_bound);

    bool progressed = false;
    bool feasibility_step = false;
    if (master.point && result.incumbent_value < ubd - options.epsilon) {
      const Assignment& xhat = *master.point;
      std::vector<LinearConstraint> violated;
      if (!options.constraints_in_master) {
        for (const auto& row : problem.constraints) {
          if (!row.satisfied(xhat)) violated.push_back(row);
        }
      }
      if (!violated.empty()) {
        auto rows = BuildFeasibilityCut(violated, xhat);
        result.feasibility_rows.insert(result.feasibility_rows.end(), rows.begin(), rows.end());
        progressed = true;
        feasibility_step = true;
      } else {
        if (!seen_before(xhat)) {
          consider(xhat);
          progressed = true;
        }
        progressed = consider_polished(xhat) || progressed;
      }
    }
    result.trace.push_back({iteration, result.incumbent_value, ubd, Seconds(start)});
    if (options.log != nullptr) {
      *options.log << "iteration " << iteration << " lbd " << result.incumbent_value << " ubd "
                   << ubd << (feasibility_step ? " feasibility" : "") << "\n";
    }
    if (result.incumbent_value >= ubd - options.epsilon) {
      cert.status = CertificateStatus::kEpsOptimal;
      break;
    }
    if (!master.point || !progressed) {
      cert.status = Seconds(start) >= options.time_limit ? CertificateStatus::kTimeLimit
                                                         : CertificateStatus::kIterationLimit;
      break;
    }
  }
  cert.iterations = iteration;
  cert.lbd = result.incumbent_value;
  cert.ubd = ubd;
  cert.gap = ubd - result.incumbent_value;
  result.seconds = Seconds(start);
  return result;
}

std::string CheckBoundDiscipline(const GbdResult& result, double tol) {
  std::ostringstream err;
  double prev_l = -kInf;
  double prev_u = kInf;
  for (const auto& row : result.trace) {
    if (row.lbd < prev_l - tol) err << "lbd decreased at iteration " << row.iteration << "; ";
    if (row.ubd > prev_u + tol) err << "ubd increased at iteration " << row.iteration << "; ";
    if (row.lbd > row.ubd + tol * (1.0 + std::abs(row.ubd))) {
      err << "lbd above ubd at iteration " << row.iteration << "; ";
    }
    prev_l = row.lbd;
    prev_u = row.ubd;
  }
  const Certificate& c = result.certificate;
  if (!result.trace.empty()) {
    const auto& last = result.trace.back();
    if (std::abs(last.lbd - c.lbd) > tol || last.ubd != c.ubd) {
      err << "certificate does not match the final trace row; ";
    }
  }
  if (c.status == CertificateStatus::kEpsOptimal && !(c.gap <= c.epsilon + tol)) {
    err << "eps-optimal certificate with gap above epsilon; ";
  }
  return err.str();
}

}  // namespace gbdmap
