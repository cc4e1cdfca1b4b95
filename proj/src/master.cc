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

#include "gbdmap/master.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <numeric>
#include <queue>
#include <utility>

#include "gbdmap/errors.h"

namespace gbdmap {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

void ProjectSimplex(Eigen::Ref<Eigen::VectorXd> v) {
  std::vector<double> sorted(v.data(), v.data() + v.size());
  std::sort(sorted.begin(), sorted.end(), std::greater<double>());
  double cumulative = 0.0;
  double theta = 0.0;
  for (std::size_t j = 0; j < sorted.size(); ++j) {
    cumulative += sorted[j];
    const double candidate = (cumulative - 1.0) / static_cast<double>(j + 1);
    if (sorted[j] - candidate > 0.0) theta = candidate;
  }
  for (Eigen::Index j = 0; j < v.size(); ++j) v(j) = std::max(0.0, v(j) - theta);
}

double Seconds(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - since).count();
}

}  // namespace

double LinearConstraint::activity(const Assignment& x) const {
  double total = 0.0;
  for (const auto& t : terms) total += t.coef * x.at(t.var).at(0);
  return total;
}

bool LinearConstraint::satisfied(const Assignment& x, double tol) const {
  const double a = activity(x);
  switch (sense) {
    case Sense::kLessEqual:
      return a <= rhs + tol;
    case Sense::kGreaterEqual:
      return a >= rhs - tol;
    case Sense::kEqual:
      return std::abs(a - rhs) <= tol;
  }
  return false;
}

double BendersCut::linear_part(const Assignment& x) const {
  double total = constant;
  for (std::size_t v = 0; v < linear.size(); ++v) {
    for (std::size_t j = 0; j < linear[v].size(); ++j) total += linear[v][j] * x.at(v).at(j);
  }
  return total;
}

double BendersCut::value_at(const FactorGraph& graph, const Assignment& x) const {
  double total = linear_part(x);
  for (FactorId f = 0; f < graph.num_factors(); ++f) {
    if (!graph.is_singleton(f)) continue;
    const Factor& fac = graph.factor(f);
    total += fac.eval(graph.scope_values(fac, x));
  }
  return total;
}

struct MasterModel::Impl {
  struct Block {
    std::vector<std::size_t> members;
    bool exactly_one = true;
  };
  // sum coef * z <= rhs, or == rhs when `equality`.
  struct Row {
    std::vector<std::pair<std::size_t, double>> terms;
    bool equality = false;
    double rhs = 0.0;
  };
  struct ContVar {
    VarId var = 0;
    std::size_t offset = 0;
    std::size_t size = 0;
    const Domain* domain = nullptr;
    const Factor* singleton = nullptr;
  };
  struct DualPoint {
    double value = kInf;
    Eigen::VectorXd grad;
    Eigen::VectorXd x;
  };

  std::shared_ptr<const FactorGraph> graph;
  std::vector<std::size_t> offset;
  std::size_t n = 0;
  std::vector<VarId> bin_var;
  std::vector<std::size_t> bin_off;
  std::vector<std::size_t> bin_block;
  std::vector<Block> blocks;
  std::vector<ContVar> conts;
  Eigen::VectorXd s_lin;
  double s_const = 0.0;
  RowMatrix a;
  Eigen::VectorXd c;
  std::vector<Row> rows;

  explicit Impl(const MasterProblem& problem) : graph(problem.graph) {
    if (!graph) throw StructuralError("master problem without a graph");
    if (problem.cuts.empty()) throw UnboundedCutError("master problem has no cuts");
    const FactorGraph& g = *graph;
    offset.resize(g.num_variables());
    std::vector<std::size_t> bin_index(g.num_variables(), SIZE_MAX);
    for (VarId v = 0; v < g.num_variables(); ++v) {
      offset[v] = n;
      n += g.variable(v).domain.size();
      if (g.variable(v).domain.is_binary()) {
        bin_index[v] = bin_var.size();
        bin_var.push_back(v);
        bin_off.push_back(offset[v]);
      }
    }
    bin_block.assign(bin_var.size(), SIZE_MAX);
    for (const auto& block : g.one_hot_blocks()) {
      Block b;
      for (VarId v : block) {
        const std::size_t idx = bin_index[v];
        if (bin_block[idx] != SIZE_MAX) {
          throw StructuralError("binary " + g.variable(v).name + " in two one-hot rows");
        }
        bin_block[idx] = blocks.size();
        b.members.push_back(idx);
      }
      blocks.push_back(std::move(b));
    }
    for (std::size_t idx = 0; idx < bin_var.size(); ++idx) {
      if (bin_block[idx] != SIZE_MAX) continue;
      bin_block[idx] = blocks.size();
      blocks.push_back(Block{{idx}, false});
    }

    s_lin = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
    for (VarId v = 0; v < g.num_variables(); ++v) {
      const auto singles = g.singletons_of(v);
      const Domain& dom = g.variable(v).domain;
      if (dom.is_binary()) {
        double at0 = 0.0;
        double at1 = 0.0;
        const double zero = 0.0;
        const double one = 1.0;
        for (FactorId f : singles) {
          at0 += g.factor(f).eval({std::span<const double>(&zero, 1)});
          at1 += g.factor(f).eval({std::span<const double>(&one, 1)});
        }
        s_lin(static_cast<Eigen::Index>(offset[v])) = at1 - at0;
        s_const += at0;
        continue;
      }
      if (singles.size() > 1) {
        throw StructuralError("variable " + g.variable(v).name +
                              " has more than one singleton factor");
      }
      conts.push_back(ContVar{v, offset[v], dom.size(), &dom,
                              singles.empty() ? nullptr : &g.factor(singles.front())});
    }

    a.resize(static_cast<Eigen::Index>(problem.cuts.size()), static_cast<Eigen::Index>(n));
    a.setZero();
    c.resize(static_cast<Eigen::Index>(problem.cuts.size()));
    for (std::size_t j = 0; j < problem.cuts.size(); ++j) {
      const auto& cut = problem.cuts[j];
      c(static_cast<Eigen::Index>(j)) = cut.constant;
      for (std::size_t v = 0; v < cut.linear.size(); ++v) {
        for (std::size_t k = 0; k < cut.linear[v].size(); ++k) {
          a(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(offset[v] + k)) =
              cut.linear[v][k];
        }
      }
    }

    for (const auto& con : problem.constraints) {
      Row row;
      const double sign = con.sense == Sense::kGreaterEqual ? -1.0 : 1.0;
      row.equality = con.sense == Sense::kEqual;
      row.rhs = sign * con.rhs;
      for (const auto& t : con.terms) {
        if (t.var >= g.num_variables() || bin_index[t.var] == SIZE_MAX) {
          throw StructuralError("master rows may only involve binary variables");
        }
        row.terms.emplace_back(bin_index[t.var], sign * t.coef);
      }
      rows.push_back(std::move(row));
    }
  }

  std::size_t num_cuts() const { return static_cast<std::size_t>(a.rows()); }

  bool block_fixed(const Block& b, const std::vector<std::int8_t>& fixed) const {
    if (!b.exactly_one) return fixed[b.members.front()] >= 0;
    for (std::size_t m : b.members) {
      if (fixed[m] == 1) return true;
    }
    return false;
  }

  bool propagate(std::vector<std::int8_t>& fixed) const {
    auto fix = [&](std::size_t idx, std::int8_t val, bool& changed) {
      if (fixed[idx] == val) return true;
      if (fixed[idx] >= 0) return false;
      fixed[idx] = val;
      changed = true;
      return true;
    };
    constexpr double tol = 1e-9;
    bool changed = true;
    while (changed) {
      changed = false;
      for (const auto& b : blocks) {
        if (!b.exactly_one) continue;
        int ones = 0;
        int free_count = 0;
        std::size_t last_free = 0;
        for (std::size_t m : b.members) {
          if (fixed[m] == 1) ++ones;
          if (fixed[m] < 0) {
            ++free_count;
            last_free = m;
          }
        }
        if (ones > 1) return false;
        if (ones == 1) {
          for (std::size_t m : b.members) {
            if (fixed[m] < 0 && !fix(m, 0, changed)) return false;
          }
        } else if (free_count == 0) {
          return false;
        } else if (free_count == 1) {
          if (!fix(last_free, 1, changed)) return false;
        }
      }
      for (const auto& row : rows) {
        for (int pass = 0; pass < (row.equality ? 2 : 1); ++pass) {
          const double sign = pass == 0 ? 1.0 : -1.0;
          const double rhs = sign * row.rhs;
          double min_act = 0.0;
          for (const auto& [idx, coef] : row.terms) {
            const double a_i = sign * coef;
            if (fixed[idx] >= 0) {
              min_act += a_i * fixed[idx];
            } else {
              min_act += std::min(0.0, a_i);
            }
          }
          if (min_act > rhs + tol) return false;
          for (const auto& [idx, coef] : row.terms) {
            if (fixed[idx] >= 0) continue;
            const double a_i = sign * coef;
            if (a_i > 0.0 && min_act + a_i > rhs + tol) {
              if (!fix(idx, 0, changed)) return false;
            } else if (a_i < 0.0 && min_act - a_i > rhs + tol) {
              if (!fix(idx, 1, changed)) return false;
            }
          }
        }
      }
    }
    return true;
  }

  DualPoint eval(const Eigen::VectorXd& y, const std::vector<std::int8_t>& fixed) const {
    const Eigen::Index p = a.rows();
    DualPoint out;
    const Eigen::VectorXd lambda = y.head(p);
    Eigen::VectorXd g = a.transpose() * lambda + s_lin;
    double value = lambda.dot(c) + s_const;
    for (std::size_t r = 0; r < rows.size(); ++r) {
      const double rho = y(p + static_cast<Eigen::Index>(r));
      for (const auto& [idx, coef] : rows[r].terms) {
        g(static_cast<Eigen::Index>(bin_off[idx])) -= rho * coef;
      }
      value += rho * rows[r].rhs;
    }
    out.x = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
    for (const auto& b : blocks) {
      if (!b.exactly_one) {
        const std::size_t m = b.members.front();
        const auto off = static_cast<Eigen::Index>(bin_off[m]);
        const double z = fixed[m] >= 0 ? fixed[m] : (g(off) > 0.0 ? 1.0 : 0.0);
        out.x(off) = z;
        value += z * g(off);
        continue;
      }
      std::size_t pick = SIZE_MAX;
      for (std::size_t m : b.members) {
        if (fixed[m] == 1) {
          pick = m;
          break;
        }
        if (fixed[m] == 0) continue;
        if (pick == SIZE_MAX || g(static_cast<Eigen::Index>(bin_off[m])) >
                                    g(static_cast<Eigen::Index>(bin_off[pick]))) {
          pick = m;
        }
      }
      const auto off = static_cast<Eigen::Index>(bin_off[pick]);
      out.x(off) = 1.0;
      value += g(off);
    }
    for (const auto& cv : conts) {
      const auto off = static_cast<Eigen::Index>(cv.offset);
      std::span<const double> slice(g.data() + off, cv.size);
      std::optional<SupResult> sup;
      if (cv.singleton != nullptr) {
        sup = cv.singleton->linear_sup(slice, *cv.domain);
        if (!sup) {
          throw StructuralError("singleton factor " + cv.singleton->family() +
                                " has no closed-form linear supremum");
        }
      } else {
        sup = cv.domain->linear_sup(slice);
      }
      value += sup->value;
      for (std::size_t k = 0; k < cv.size; ++k) out.x(off + static_cast<Eigen::Index>(k)) = sup->argmax[k];
    }
    out.value = value;
    out.grad.resize(y.size());
    out.grad.head(p) = a * out.x + c;
    for (std::size_t r = 0; r < rows.size(); ++r) {
      double act = 0.0;
      for (const auto& [idx, coef] : rows[r].terms) act += coef * out.x(static_cast<Eigen::Index>(bin_off[idx]));
      out.grad(p + static_cast<Eigen::Index>(r)) = rows[r].rhs - act;
    }
    return out;
  }

  void project(Eigen::VectorXd& y) const {
    const Eigen::Index p = a.rows();
    ProjectSimplex(y.head(p));
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (!rows[r].equality) {
        auto& v = y(p + static_cast<Eigen::Index>(r));
        v = std::max(0.0, v);
      }
    }
  }

  bool rows_ok(const Eigen::VectorXd& x) const {
    for (const auto& row : rows) {
      double act = 0.0;
      for (const auto& [idx, coef] : row.terms) act += coef * x(static_cast<Eigen::Index>(bin_off[idx]));
      if (row.equality ? std::abs(act - row.rhs) > 1e-9 : act > row.rhs + 1e-9) return false;
    }
    return true;
  }

  double flat_objective(const Eigen::VectorXd& x) const {
    double total = s_const + s_lin.dot(x);
    for (const auto& cv : conts) {
      if (cv.singleton == nullptr) continue;
      std::span<const double> slice(x.data() + cv.offset, cv.size);
      total += cv.singleton->eval({slice});
    }
    return total + (a * x + c).minCoeff();
  }

  Assignment unflatten(const Eigen::VectorXd& x) const {
    const FactorGraph& g = *graph;
    Assignment out(g.num_variables());
    for (VarId v = 0; v < g.num_variables(); ++v) {
      const std::size_t sz = g.variable(v).domain.size();
      out[v].assign(x.data() + offset[v], x.data() + offset[v] + sz);
    }
    return out;
  }

  Eigen::VectorXd flatten(const Assignment& x) const {
    Eigen::VectorXd out(static_cast<Eigen::Index>(n));
    for (VarId v = 0; v < x.size(); ++v) {
      for (std::size_t k = 0; k < x[v].size(); ++k) out(static_cast<Eigen::Index>(offset[v] + k)) = x[v][k];
    }
    return out;
  }

  RelaxationResult relax(const BnBNode& node, const MasterConfig& config, double prune_at) const {
    const Eigen::Index p = a.rows();
    const Eigen::Index dim = p + static_cast<Eigen::Index>(rows.size());
    RelaxationResult out;
    Eigen::VectorXd y = Eigen::VectorXd::Zero(dim);
    y.head(p).setConstant(1.0 / static_cast<double>(p));
    DualPoint cur = eval(y, node.fixed);
    double best = cur.value;
    Eigen::VectorXd zsum = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(bin_var.size()));
    double weight = 0.0;
    auto absorb = [&](const DualPoint& pt) {
      for (std::size_t b = 0; b < bin_var.size(); ++b) {
        zsum(static_cast<Eigen::Index>(b)) += pt.x(static_cast<Eigen::Index>(bin_off[b]));
      }
      weight += 1.0;
      if (rows_ok(pt.x)) {
        const double v = flat_objective(pt.x);
        if (v > out.candidate_value) {
          out.candidate_value = v;
          out.candidate = unflatten(pt.x);
        }
      }
    };
    absorb(cur);
    auto reduced = [&](const Eigen::VectorXd& grad) {
      Eigen::VectorXd d = grad;
      if (p > 0) d.head(p).array() -= d.head(p).mean();
      return d;
    };
    double step = 1.0 / std::max(1e-12, reduced(cur.grad).norm());
    int stall = 0;
    int it = 0;
    for (; it < config.dual_iterations; ++it) {
      if (best <= prune_at) break;
      const double tol = 1e-9 * (1.0 + std::abs(best));
      if (best - out.candidate_value <= tol) break;
      bool accepted = false;
      DualPoint next;
      Eigen::VectorXd y_next;
      for (int tries = 0; tries < 40; ++tries) {
        y_next = y - step * cur.grad;
        project(y_next);
        const Eigen::VectorXd d = y_next - y;
        if (d.norm() <= 1e-15 * (1.0 + y.norm())) break;
        next = eval(y_next, node.fixed);
        if (next.value <= cur.value + cur.grad.dot(d) + d.squaredNorm() / (2.0 * step)) {
          accepted = true;
          step *= 1.5;
          break;
        }
        step *= 0.5;
      }
      if (!accepted) {
        const Eigen::VectorXd dir = reduced(cur.grad);
        const double norm = dir.norm();
        if (norm <= 0.0) break;
        y_next = y - (0.5 / std::sqrt(1.0 + it)) * dir / norm;
        project(y_next);
        if ((y_next - y).norm() <= 1e-15) break;
        next = eval(y_next, node.fixed);
        step = 1.0 / std::max(1e-12, norm);
      }
      y = y_next;
      cur = std::move(next);
      absorb(cur);
      if (cur.value < best - 1e-10 * (1.0 + std::abs(best))) {
        best = cur.value;
        stall = 0;
      } else if (++stall >= 30) {
        best = std::min(best, cur.value);
        break;
      }
    }
    out.iterations = it;
    out.bound = best;
    out.fractional.resize(bin_var.size());
    for (std::size_t b = 0; b < bin_var.size(); ++b) {
      out.fractional[b] = zsum(static_cast<Eigen::Index>(b)) / weight;
    }
    return out;
  }
};

MasterModel::MasterModel(const MasterProblem& problem)
    : impl_(std::make_unique<Impl>(problem)) {}

MasterModel::~MasterModel() = default;

std::size_t MasterModel::num_binaries() const { return impl_->bin_var.size(); }

VarId MasterModel::binary_var(std::size_t b) const { return impl_->bin_var.at(b); }

bool MasterModel::propagate(std::vector<std::int8_t>& fixed) const {
  return impl_->propagate(fixed);
}

std::optional<BnBNode> MasterModel::root(const MasterConfig& config) const {
  BnBNode node;
  node.fixed.assign(impl_->bin_var.size(), -1);
  if (config.anchor_labels) {
    for (const auto& b : impl_->blocks) {
      if (b.exactly_one && b.members.size() > 1) {
        node.fixed[b.members.front()] = 1;
        break;
      }
    }
  }
  if (!impl_->propagate(node.fixed)) return std::nullopt;
  return node;
}

RelaxationResult MasterModel::relax(const BnBNode& node, const MasterConfig& config,
                                    double prune_at) const {
  return impl_->relax(node, config, prune_at);
}

double MasterModel::objective(const Assignment& x) const {
  return impl_->flat_objective(impl_->flatten(x));
}

RelaxationResult ContinuousRelaxation(const BnBNode& node, const MasterProblem& problem,
                                      const MasterConfig& config) {
  MasterModel model(problem);
  return model.relax(node, config);
}

MasterResult SolveMaster(const MasterProblem& problem, const MasterConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  MasterModel model(problem);
  const auto& impl = *model.impl_;
  MasterResult result;

  struct Open {
    BnBNode node;
    std::size_t parent = 0;
    std::size_t branch_block = SIZE_MAX;
    std::vector<std::size_t> option_order;
    bool resolved = false;  // leaf whose candidate meets its bound
  };
  std::vector<Open> stack;
  auto by_bound = [](const Open& l, const Open& r) {
    if (l.node.bound != r.node.bound) return l.node.bound < r.node.bound;
    return l.node.id > r.node.id;
  };
  std::priority_queue<Open, std::vector<Open>, decltype(by_bound)> heap(by_bound);

  double incumbent = -kInf;
  double unresolved = -kInf;
  std::size_t next_id = 0;
  auto log = [&](const BnBNode& n, std::size_t parent, const char* status) {
    if (config.node_log == nullptr) return;
    std::size_t fixed_count = 0;
    for (auto f : n.fixed) fixed_count += f >= 0 ? 1 : 0;
    *config.node_log << n.id << "," << parent << "," << n.depth << "," << n.bound << ","
                     << fixed_count << "," << status << "\n";
  };

  auto tolerance = [&]() {
    return std::isfinite(incumbent) ? config.gap_tolerance * std::max(1.0, std::abs(incumbent))
                                    : 0.0;
  };

  // Relaxes a freshly fixed node and prepares its branching decision.
  auto make_open = [&](BnBNode node, std::size_t parent, double parent_bound) {
    RelaxationResult rel = model.relax(node, config, incumbent + tolerance());
    ++result.nodes;
    node.bound = std::min(rel.bound, parent_bound);
    if (rel.candidate && rel.candidate_value > incumbent) {
      incumbent = rel.candidate_value;
      result.point = std::move(rel.candidate);
      result.point_value = incumbent;
    }
    Open open;
    open.node = std::move(node);
    open.parent = parent;
    double best_score = -1.0;
    for (std::size_t bi = 0; bi < impl.blocks.size(); ++bi) {
      const auto& b = impl.blocks[bi];
      if (impl.block_fixed(b, open.node.fixed)) continue;
      double score;
      if (b.exactly_one) {
        double top = 0.0;
        for (std::size_t m : b.members) {
          if (open.node.fixed[m] != 0) top = std::max(top, rel.fractional[m]);
        }
        score = 1.0 - top;
      } else {
        const double f = rel.fractional[b.members.front()];
        score = std::min(f, 1.0 - f);
      }
      if (score > best_score) {
        best_score = score;
        open.branch_block = bi;
      }
    }
    if (open.branch_block == SIZE_MAX) {
      ++result.leaves;
      open.resolved = rel.candidate_value >= open.node.bound - tolerance();
    } else {
      const auto& b = impl.blocks[open.branch_block];
      if (b.exactly_one) {
        for (std::size_t m : b.members) {
          if (open.node.fixed[m] != 0) open.option_order.push_back(m);
        }
        std::stable_sort(open.option_order.begin(), open.option_order.end(),
                         [&](std::size_t l, std::size_t r) {
                           return rel.fractional[l] > rel.fractional[r];
                         });
      } else {
        const std::size_t m = b.members.front();
        // Encode the two children of a free binary as m (set 1) and m + size.
        const bool one_first = rel.fractional[m] >= 0.5;
        open.option_order = one_first ? std::vector<std::size_t>{m, m + impl.bin_var.size()}
                                      : std::vector<std::size_t>{m + impl.bin_var.size(), m};
      }
    }
    return open;
  };

  auto push = [&](Open open) {
    if (!result.point) {
      stack.push_back(std::move(open));
    } else {
      heap.push(std::move(open));
    }
  };

  std::optional<BnBNode> root = model.root(config);
  if (!root) {
    result.status = MasterStatus::kInfeasible;
    result.upper_bound = -kInf;
    result.seconds = Seconds(start);
    return result;
  }
  root->id = next_id++;
  push(make_open(std::move(*root), 0, kInf));

  bool limit_hit = false;
  while (!stack.empty() || !heap.empty()) {
    if (result.point && !stack.empty()) {
      for (auto& o : stack) heap.push(std::move(o));
      stack.clear();
    }
    if (result.nodes >= config.node_limit || Seconds(start) >= config.time_limit) {
      limit_hit = true;
      break;
    }
    Open open;
    if (!stack.empty()) {
      open = std::move(stack.back());
      stack.pop_back();
    } else {
      open = heap.top();
      heap.pop();
    }
    if (open.node.bound <= incumbent + tolerance()) {
      unresolved = std::max(unresolved, open.node.bound);
      log(open.node, open.parent, "pruned");
      continue;
    }
    if (open.branch_block == SIZE_MAX) {
      if (!open.resolved) unresolved = std::max(unresolved, open.node.bound);
      log(open.node, open.parent, open.resolved ? "leaf" : "leaf_unresolved");
      continue;
    }
    log(open.node, open.parent, "branched");
    const auto& b = impl.blocks[open.branch_block];
    std::vector<Open> children;
    for (std::size_t code : open.option_order) {
      BnBNode child;
      child.fixed = open.node.fixed;
      child.depth = open.node.depth + 1;
      if (b.exactly_one) {
        for (std::size_t m : b.members) child.fixed[m] = m == code ? 1 : 0;
      } else if (code < impl.bin_var.size()) {
        child.fixed[code] = 1;
      } else {
        child.fixed[code - impl.bin_var.size()] = 0;
      }
      child.id = next_id++;
      if (!impl.propagate(child.fixed)) {
        child.bound = -kInf;
        log(child, open.node.id, "infeasible");
        continue;
      }
      children.push_back(make_open(std::move(child), open.node.id, open.node.bound));
    }
    // Depth-first order pops the most promising child first.
    for (auto it = children.rbegin(); it != children.rend(); ++it) push(std::move(*it));
  }

  double open_max = -kInf;
  for (const auto& o : stack) open_max = std::max(open_max, o.node.bound);
  while (!heap.empty()) {
    open_max = std::max(open_max, heap.top().node.bound);
    heap.pop();
  }
  result.upper_bound = std::max({incumbent, unresolved, open_max});
  result.upper_bound = std::min(result.upper_bound, config.bound_hint);
  if (!result.point && !limit_hit && unresolved == -kInf) {
    result.status = MasterStatus::kInfeasible;
  } else if (!limit_hit && unresolved <= incumbent + tolerance()) {
    result.status = MasterStatus::kOptimal;
  } else {
    result.status = MasterStatus::kLimit;
  }
  result.seconds = Seconds(start);
  return result;
}

}  // namespace gbdmap
