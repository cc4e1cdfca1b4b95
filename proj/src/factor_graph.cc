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

#include "gbdmap/factor_graph.h"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "gbdmap/errors.h"

namespace gbdmap {

VarId FactorGraph::add_variable(VariableSpec spec) {
  variables_.push_back(std::move(spec));
  incidence_.emplace_back();
  return variables_.size() - 1;
}

FactorId FactorGraph::add_factor(std::shared_ptr<const Factor> factor) {
  if (!factor) throw StructuralError("null factor");
  const auto& scope = factor->scope();
  if (scope.empty()) {
    throw StructuralError("factor '" + factor->family() + "' has an empty scope");
  }
  std::set<VarId> seen;
  for (VarId v : scope) {
    if (v >= variables_.size()) {
      throw StructuralError("factor '" + factor->family() +
                            "' references unknown variable id " + std::to_string(v));
    }
    if (!seen.insert(v).second) {
      throw StructuralError("factor '" + factor->family() + "' repeats variable " +
                            variables_[v].name);
    }
  }
  const FactorId id = factors_.size();
  for (VarId v : scope) incidence_[v].push_back(id);
  factors_.push_back(std::move(factor));
  return id;
}

void FactorGraph::add_one_hot(std::vector<VarId> block) {
  if (block.empty()) throw StructuralError("empty one-hot block");
  for (VarId v : block) {
    if (v >= variables_.size()) throw StructuralError("one-hot block has unknown id");
    if (!variables_[v].domain.is_binary()) {
      throw StructuralError("one-hot block member " + variables_[v].name +
                            " is not binary");
    }
  }
  one_hot_.push_back(std::move(block));
}

std::vector<FactorId> FactorGraph::singletons_of(VarId v) const {
  std::vector<FactorId> out;
  for (FactorId f : incidence_.at(v)) {
    if (is_singleton(f)) out.push_back(f);
  }
  return out;
}

ScopeValues FactorGraph::scope_values(const Factor& f, const Assignment& x) const {
  ScopeValues out;
  out.reserve(f.scope().size());
  for (VarId v : f.scope()) out.emplace_back(x.at(v));
  return out;
}

double FactorGraph::eval_log_posterior(const Assignment& x) const {
  if (x.size() != variables_.size()) {
    throw DomainError("assignment covers " + std::to_string(x.size()) +
                      " variables, graph has " + std::to_string(variables_.size()));
  }
  double total = 0.0;
  for (const auto& f : factors_) total += f->eval(scope_values(*f, x));
  return total;
}

std::size_t FactorGraph::posterior_dimension() const {
  std::size_t total = 0;
  for (const auto& v : variables_) total += v.domain.size();
  return total;
}

std::size_t FactorGraph::block_count() const {
  std::size_t total = 0;
  for (const auto& v : variables_) {
    total += v.domain.kind() == DomainKind::kSimplex ? static_cast<std::size_t>(v.domain.dim()) : 1;
  }
  return total;
}

std::map<std::string, std::size_t> FactorGraph::family_counts(bool include_singletons) const {
  std::map<std::string, std::size_t> out;
  for (FactorId f = 0; f < factors_.size(); ++f) {
    if (!include_singletons && is_singleton(f)) continue;
    ++out[factors_[f]->family()];
  }
  return out;
}

void FactorGraph::check_domains(const Assignment& x, double tol) const {
  if (x.size() != variables_.size()) throw DomainError("assignment size mismatch");
  for (VarId v = 0; v < variables_.size(); ++v) {
    if (!variables_[v].domain.contains(x[v], tol)) {
      throw DomainError("variable " + variables_[v].name + " lies outside " +
                        variables_[v].domain.describe());
    }
  }
}

Assignment FactorGraph::interior_assignment() const {
  Assignment x;
  x.reserve(variables_.size());
  for (const auto& v : variables_) x.push_back(v.domain.interior_point());
  for (const auto& block : one_hot_) x[block.front()][0] = 1.0;
  return x;
}

void FactorGraph::dump(std::ostream& os) const {
  os << "graph variables " << variables_.size() << " factors " << factors_.size() << "\n";
  for (VarId v = 0; v < variables_.size(); ++v) {
    os << "var " << v << " " << variables_[v].name << " "
       << variables_[v].domain.describe() << " "
       << (variables_[v].role == VarRole::kAssignment ? "assignment" : "parameter") << "\n";
  }
  for (FactorId f = 0; f < factors_.size(); ++f) {
    os << "factor " << f << " " << factors_[f]->family() << " scope";
    for (VarId v : factors_[f]->scope()) os << " " << v;
    os << "\n";
  }
  for (const auto& block : one_hot_) {
    os << "one_hot";
    for (VarId v : block) os << " " << v;
    os << "\n";
  }
}

AugmentedGraph::AugmentedGraph(std::shared_ptr<const FactorGraph> base)
    : base_(std::move(base)) {
  factor_clones_.resize(base_->num_factors());
  for (FactorId f = 0; f < base_->num_factors(); ++f) {
    const auto& scope = base_->factor(f).scope();
    if (scope.size() == 1) {
      singletons_.push_back(f);
      continue;
    }
    coupling_.push_back(f);
    for (std::size_t p = 0; p < scope.size(); ++p) {
      factor_clones_[f].push_back(clones_.size());
      clones_.push_back(CloneRef{f, p, scope[p]});
    }
  }
}

std::optional<CloneId> AugmentedGraph::clone_of(FactorId f, VarId v) const {
  for (CloneId c : factor_clones_.at(f)) {
    if (clones_[c].original == v) return c;
  }
  return std::nullopt;
}

Assignment AugmentedGraph::clones_from(const Assignment& x) const {
  Assignment out;
  out.reserve(clones_.size());
  for (const auto& c : clones_) out.push_back(x.at(c.original));
  return out;
}

double AugmentedGraph::eval_augmented(const Assignment& x, const Assignment& c) const {
  if (c.size() != clones_.size()) throw DomainError("clone assignment size mismatch");
  double total = 0.0;
  for (FactorId f : singletons_) {
    const Factor& fac = base_->factor(f);
    total += fac.eval(base_->scope_values(fac, x));
  }
  for (FactorId f : coupling_) {
    ScopeValues vals;
    for (CloneId id : factor_clones_[f]) vals.emplace_back(c[id]);
    total += base_->factor(f).eval(vals);
  }
  return total;
}

double AugmentedGraph::equality_residual(const Assignment& x, const Assignment& c) const {
  double worst = 0.0;
  for (CloneId id = 0; id < clones_.size(); ++id) {
    const auto& orig = x.at(clones_[id].original);
    for (std::size_t j = 0; j < orig.size(); ++j) {
      worst = std::max(worst, std::abs(orig[j] - c[id][j]));
    }
  }
  return worst;
}

void AugmentedGraph::dump(std::ostream& os) const {
  base_->dump(os);
  os << "clones " << clones_.size() << "\n";
  for (CloneId id = 0; id < clones_.size(); ++id) {
    os << "clone " << id << " factor " << clones_[id].factor << " var "
       << clones_[id].original << "\n";
  }
  for (CloneId id = 0; id < clones_.size(); ++id) {
    os << "equality var " << clones_[id].original << " clone " << id << "\n";
  }
}

AugmentedGraph BuildAugmented(std::shared_ptr<const FactorGraph> graph) {
  if (!graph) throw StructuralError("null graph");
  for (FactorId f = 0; f < graph->num_factors(); ++f) {
    const auto& scope = graph->factor(f).scope();
    if (scope.empty()) throw StructuralError("factor with empty scope");
    for (VarId v : scope) {
      if (v >= graph->num_variables()) throw StructuralError("scope references unknown variable");
    }
  }
  return AugmentedGraph(std::move(graph));
}

}  // namespace gbdmap
