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

// Factor graphs over mixed binary/continuous variables and their clone
// augmentation.

#ifndef GBDMAP_FACTOR_GRAPH_H_
#define GBDMAP_FACTOR_GRAPH_H_

#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "gbdmap/domain.h"

namespace gbdmap {

using VarId = std::size_t;
using FactorId = std::size_t;
using CloneId = std::size_t;

enum class VarRole { kAssignment, kParameter };

struct VariableSpec {
  std::string name;
  Domain domain;
  VarRole role = VarRole::kParameter;
};

// One value vector per variable, indexed by VarId.
using Assignment = std::vector<std::vector<double>>;
// Values of a factor's scope, in scope order.
using ScopeValues = std::vector<std::span<const double>>;
// Per-scope-entry vectors (gradients, multipliers), in scope order.
using ScopeVectors = std::vector<std::vector<double>>;

// A log-potential over a fixed scope of variables.
class Factor {
 public:
  Factor(std::string family, std::vector<VarId> scope)
      : family_(std::move(family)), scope_(std::move(scope)) {}
  virtual ~Factor() = default;

  const std::string& family() const { return family_; }
  const std::vector<VarId>& scope() const { return scope_; }

  virtual double eval(const ScopeValues& x) const = 0;
  virtual ScopeVectors gradient(const ScopeValues& x) const = 0;

  // sup over the non-binary scope entries of eval(x) - sum_j <u_j, x_j>, with
  // binary entries fixed to `binary` (in scope order, binaries only). Returns
  // nullopt when no closed form is available; the value must otherwise be a
  // valid upper bound, and `exact` reports whether it is the supremum.
  virtual std::optional<SupResult> tilted_sup(
      std::span<const double> binary, const ScopeVectors& u,
      const std::vector<const Domain*>& domains) const {
    (void)binary;
    (void)u;
    (void)domains;
    return std::nullopt;
  }

  // Singleton factors only: sup over the domain of eval(x) + <g, x>. Must be a
  // valid upper bound; the argmax must lie in the domain.
  virtual std::optional<SupResult> linear_sup(std::span<const double> g,
                                              const Domain& domain) const {
    (void)g;
    (void)domain;
    return std::nullopt;
  }

  // True when the log-potential is jointly concave on its domains.
  virtual bool concave() const { return false; }

 private:
  std::string family_;
  std::vector<VarId> scope_;
};

class FactorGraph {
 public:
  VarId add_variable(VariableSpec spec);
  // Throws StructuralError for empty scopes, unknown ids or repeated ids.
  FactorId add_factor(std::shared_ptr<const Factor> factor);
  // Declares that exactly one of the given binary variables equals 1.
  void add_one_hot(std::vector<VarId> block);

  std::size_t num_variables() const { return variables_.size(); }
  std::size_t num_factors() const { return factors_.size(); }
  const VariableSpec& variable(VarId v) const { return variables_.at(v); }
  const Factor& factor(FactorId f) const { return *factors_.at(f); }
  const std::vector<std::vector<VarId>>& one_hot_blocks() const { return one_hot_; }
  const std::vector<FactorId>& factors_of(VarId v) const { return incidence_.at(v); }

  bool is_singleton(FactorId f) const { return factor(f).scope().size() == 1; }
  // Singleton factor attached to v, if any.
  std::vector<FactorId> singletons_of(VarId v) const;

  ScopeValues scope_values(const Factor& f, const Assignment& x) const;
  double eval_log_posterior(const Assignment& x) const;
  // Count of scalar coordinates; a simplex of dimension d counts as d.
  std::size_t posterior_dimension() const;
  // Count of latent blocks: each simplex coordinate is one block, any other
  // variable (vector or matrix valued) is one block.
  std::size_t block_count() const;
  std::map<std::string, std::size_t> family_counts(bool include_singletons) const;

  // Throws DomainError naming the first variable outside its domain.
  void check_domains(const Assignment& x, double tol = 1e-9) const;
  Assignment interior_assignment() const;

  void dump(std::ostream& os) const;

 private:
  std::vector<VariableSpec> variables_;
  std::vector<std::shared_ptr<const Factor>> factors_;
  std::vector<std::vector<FactorId>> incidence_;
  std::vector<std::vector<VarId>> one_hot_;
};

// A clone x_v^f of variable v private to non-singleton factor f.
struct CloneRef {
  FactorId factor = 0;
  std::size_t position = 0;
  VarId original = 0;
};

// The factor graph with one clone per (non-singleton factor, scope variable)
// and the equalities tying clones to originals.
class AugmentedGraph {
 public:
  explicit AugmentedGraph(std::shared_ptr<const FactorGraph> base);

  const FactorGraph& base() const { return *base_; }
  std::shared_ptr<const FactorGraph> base_ptr() const { return base_; }
  const std::vector<CloneRef>& clones() const { return clones_; }
  // Clone ids of factor f's scope, or empty for singleton factors.
  const std::vector<CloneId>& clones_of(FactorId f) const { return factor_clones_.at(f); }
  std::optional<CloneId> clone_of(FactorId f, VarId v) const;
  const std::vector<FactorId>& coupling_factors() const { return coupling_; }
  const std::vector<FactorId>& singleton_factors() const { return singletons_; }

  // Clone values copied from the originals (the equality-feasible choice).
  Assignment clones_from(const Assignment& x) const;
  // Objective of the augmented problem at originals x and clone values c.
  double eval_augmented(const Assignment& x, const Assignment& c) const;
  // Largest |x_v - x_v^f| over all equalities.
  double equality_residual(const Assignment& x, const Assignment& c) const;

  void dump(std::ostream& os) const;

 private:
  std::shared_ptr<const FactorGraph> base_;
  std::vector<CloneRef> clones_;
  std::vector<std::vector<CloneId>> factor_clones_;
  std::vector<FactorId> coupling_;
  std::vector<FactorId> singletons_;
};

// Validates the graph and returns its augmentation.
AugmentedGraph BuildAugmented(std::shared_ptr<const FactorGraph> graph);

}  // namespace gbdmap

#endif  // GBDMAP_FACTOR_GRAPH_H_
