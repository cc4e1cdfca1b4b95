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

#include "gbdmap/lda.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "gbdmap/closed_form.h"
#include "gbdmap/errors.h"
#include "gbdmap/factors.h"

namespace gbdmap {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Eigen::VectorXd SimplexMap(const std::vector<double>& coef, double floor) {
  const std::vector<double> zero(coef.size(), 0.0);
  return AsVector(MaxLogLinearOnSimplex(coef, zero, floor).argmax);
}

}  // namespace

std::size_t Corpus::num_tokens() const {
  std::size_t n = 0;
  for (const auto& d : docs) n += d.size();
  return n;
}

void Corpus::Validate() const {
  const int v = vocab_size();
  for (std::size_t d = 0; d < docs.size(); ++d) {
    for (int w : docs[d]) {
      if (w < 0 || w >= v) {
        throw DataError("token id " + std::to_string(w) + " in document " + std::to_string(d) +
                        " is outside a vocabulary of " + std::to_string(v));
      }
    }
  }
}

LdaPrior LdaPrior::Defaults(int k, int v) {
  LdaPrior p;
  p.alpha0 = Eigen::VectorXd::Constant(k, 1.0 / k);
  p.eta0 = Eigen::VectorXd::Constant(v, 0.1);
  return p;
}

void LdaPrior::Validate(int k, int v) const {
  if (alpha0.size() != k) throw StructuralError("alpha0 must have one entry per topic");
  if (eta0.size() != v) throw StructuralError("eta0 must have one entry per word");
  if ((alpha0.array() <= 0.0).any() || (eta0.array() <= 0.0).any()) {
    throw DomainError("LDA prior entries must be positive");
  }
}

void LdaLatent::Validate(const Corpus& corpus, int k) const {
  const int m = static_cast<int>(corpus.docs.size());
  if (z.size() != corpus.docs.size() || theta.rows() != m || theta.cols() != k ||
      beta.rows() != k || beta.cols() != corpus.vocab_size()) {
    throw StructuralError("LDA latent state does not match the corpus dimensions");
  }
  for (int d = 0; d < m; ++d) {
    if (z[d].size() != corpus.docs[d].size()) {
      throw StructuralError("topic count mismatch in document " + std::to_string(d));
    }
    for (int t : z[d]) {
      if (t < 0 || t >= k) throw DomainError("topic index out of range");
    }
  }
  auto check_rows = [](const Eigen::MatrixXd& p, const char* what) {
    for (Eigen::Index r = 0; r < p.rows(); ++r) {
      if ((p.row(r).array() < 0.0).any() || std::abs(p.row(r).sum() - 1.0) > 1e-9) {
        throw DomainError(std::string(what) + " row " + std::to_string(r) + " is not on the simplex");
      }
    }
  };
  check_rows(theta, "theta");
  check_rows(beta, "beta");
}

LdaModel::LdaModel(Corpus corpus, LdaPrior prior, int k, LdaDomainOptions options)
    : LdaModel(std::move(corpus), std::move(prior), k, options, std::nullopt) {}

LdaModel LdaModel::FoldIn(Corpus corpus, LdaPrior prior, const Eigen::MatrixXd& beta,
                          LdaDomainOptions options) {
  return LdaModel(std::move(corpus), std::move(prior), static_cast<int>(beta.rows()), options,
                  beta);
}

LdaModel::LdaModel(Corpus corpus, LdaPrior prior, int k, LdaDomainOptions options,
                   std::optional<Eigen::MatrixXd> fixed_beta)
    : corpus_(std::move(corpus)),
      prior_(std::move(prior)),
      k_(k),
      options_(options),
      fixed_beta_(std::move(fixed_beta)) {
  const int v = corpus_.vocab_size();
  if (k < 1 || v < 1 || corpus_.docs.empty()) {
    throw ConfigError("need K >= 1, V >= 1 and a nonempty corpus");
  }
  corpus_.Validate();
  prior_.Validate(k, v);
  const double floor = options_.simplex_floor;
  if (fixed_beta_ && (fixed_beta_->cols() != v || fixed_beta_->rows() != k)) {
    throw StructuralError("fixed topic matrix has the wrong shape");
  }

  graph_ = std::make_shared<FactorGraph>();
  if (!fixed_beta_) {
    std::vector<double> eta(v);
    for (int w = 0; w < v; ++w) eta[w] = prior_.eta0(w) - 1.0;
    for (int t = 0; t < k; ++t) {
      const VarId b = graph_->add_variable(
          {"beta[" + std::to_string(t) + "]", Domain::Simplex(v, std::min(floor, 1.0 / v)),
           VarRole::kParameter});
      graph_->add_factor(std::make_shared<SimplexLogPriorFactor>(b, eta, "topic_word_prior"));
      beta_.push_back(b);
    }
  }
  std::vector<double> alpha(k);
  for (int t = 0; t < k; ++t) alpha[t] = prior_.alpha0(t) - 1.0;
  const int m = static_cast<int>(corpus_.docs.size());
  std::size_t offset = 0;
  for (int d = 0; d < m; ++d) {
    const VarId th = graph_->add_variable(
        {"Theta[" + std::to_string(d) + "]", Domain::Simplex(k, std::min(floor, 1.0 / k)),
         VarRole::kParameter});
    graph_->add_factor(std::make_shared<SimplexLogPriorFactor>(th, alpha, "doc_topic_prior"));
    theta_.push_back(th);
    doc_offset_.push_back(offset);
    offset += corpus_.docs[d].size();
  }
  for (int d = 0; d < m; ++d) {
    for (std::size_t n = 0; n < corpus_.docs[d].size(); ++n) {
      const int w = corpus_.docs[d][n];
      std::vector<VarId> row;
      for (int t = 0; t < k; ++t) {
        const VarId z = graph_->add_variable(
            {"z[" + std::to_string(d) + "," + std::to_string(n) + "," + std::to_string(t) + "]",
             Domain::Binary(), VarRole::kAssignment});
        row.push_back(z);
        if (fixed_beta_) {
          graph_->add_factor(
              std::make_shared<BinaryLinearFactor>(z, std::log((*fixed_beta_)(t, w)), "token_word"));
        } else {
          graph_->add_factor(std::make_shared<BinaryLogCoordinateFactor>(z, beta_[t], w, "token_word"));
        }
        graph_->add_factor(std::make_shared<BinaryLogCoordinateFactor>(z, theta_[d], t, "token_topic"));
      }
      graph_->add_one_hot(row);
      z_.insert(z_.end(), row.begin(), row.end());
    }
  }
}

Assignment LdaModel::ToAssignment(const LdaLatent& latent) const {
  latent.Validate(corpus_, k_);
  Assignment x(graph_->num_variables());
  for (std::size_t t = 0; t < beta_.size(); ++t) {
    const Eigen::VectorXd row = latent.beta.row(static_cast<Eigen::Index>(t)).transpose();
    x[beta_[t]] = std::vector<double>(row.data(), row.data() + row.size());
  }
  for (std::size_t d = 0; d < theta_.size(); ++d) {
    const Eigen::VectorXd row = latent.theta.row(static_cast<Eigen::Index>(d)).transpose();
    x[theta_[d]] = std::vector<double>(row.data(), row.data() + row.size());
    for (std::size_t n = 0; n < latent.z[d].size(); ++n) {
      for (int t = 0; t < k_; ++t) {
        x[z_var(static_cast<int>(d), static_cast<int>(n), t)] = {latent.z[d][n] == t ? 1.0 : 0.0};
      }
    }
  }
  return x;
}

std::vector<std::vector<int>> LdaModel::Topics(const Assignment& x) const {
  std::vector<std::vector<int>> z(corpus_.docs.size());
  for (std::size_t d = 0; d < corpus_.docs.size(); ++d) {
    z[d].assign(corpus_.docs[d].size(), 0);
    for (std::size_t n = 0; n < corpus_.docs[d].size(); ++n) {
      double best = -kInf;
      for (int t = 0; t < k_; ++t) {
        const double v = x[z_var(static_cast<int>(d), static_cast<int>(n), t)][0];
        if (v > best) {
          best = v;
          z[d][n] = t;
        }
      }
    }
  }
  return z;
}

LdaLatent LdaModel::FromAssignment(const Assignment& x) const {
  LdaLatent out;
  out.z = Topics(x);
  out.theta.resize(static_cast<Eigen::Index>(theta_.size()), k_);
  for (std::size_t d = 0; d < theta_.size(); ++d) {
    out.theta.row(static_cast<Eigen::Index>(d)) = AsVector(x[theta_[d]]).transpose();
  }
  if (fixed_beta_) {
    out.beta = *fixed_beta_;
  } else {
    out.beta.resize(k_, corpus_.vocab_size());
    for (int t = 0; t < k_; ++t) out.beta.row(t) = AsVector(x[beta_[t]]).transpose();
  }
  return out;
}

LdaLatent LdaModel::ConditionalOptimum(const std::vector<std::vector<int>>& z) const {
  const int v = corpus_.vocab_size();
  const int m = static_cast<int>(corpus_.docs.size());
  if (z.size() != corpus_.docs.size()) throw StructuralError("topic list does not match corpus");
  Eigen::MatrixXd word_counts = Eigen::MatrixXd::Zero(k_, v);
  Eigen::MatrixXd doc_counts = Eigen::MatrixXd::Zero(m, k_);
  for (int d = 0; d < m; ++d) {
    if (z[d].size() != corpus_.docs[d].size()) throw StructuralError("topic count mismatch");
    for (std::size_t n = 0; n < z[d].size(); ++n) {
      word_counts(z[d][n], corpus_.docs[d][n]) += 1.0;
      doc_counts(d, z[d][n]) += 1.0;
    }
  }
  LdaLatent out;
  out.z = z;
  out.theta.resize(m, k_);
  for (int d = 0; d < m; ++d) {
    std::vector<double> c(k_);
    for (int t = 0; t < k_; ++t) c[t] = doc_counts(d, t) + prior_.alpha0(t) - 1.0;
    out.theta.row(d) = SimplexMap(c, graph_->variable(theta_[d]).domain.floor()).transpose();
  }
  if (fixed_beta_) {
    out.beta = *fixed_beta_;
  } else {
    out.beta.resize(k_, v);
    for (int t = 0; t < k_; ++t) {
      std::vector<double> c(v);
      for (int w = 0; w < v; ++w) c[w] = word_counts(t, w) + prior_.eta0(w) - 1.0;
      out.beta.row(t) = SimplexMap(c, graph_->variable(beta_[t]).domain.floor()).transpose();
    }
  }
  return out;
}

Assignment LdaModel::Polish(const Assignment& x) const {
  return ToAssignment(ConditionalOptimum(Topics(x)));
}

std::shared_ptr<const FactorGraph> BuildLdaGraph(const Corpus& corpus, const LdaPrior& prior,
                                                 int k) {
  return LdaModel(corpus, prior, k).graph();
}

double LogMapLda(const Corpus& corpus, const LdaPrior& prior, const LdaLatent& latent) {
  const int k = static_cast<int>(latent.beta.rows());
  latent.Validate(corpus, k);
  prior.Validate(k, corpus.vocab_size());
  // Direct evaluation; building the graph would allocate a variable per
  // token-topic pair.
  double total = 0.0;
  auto add = [&](double coef, double p) {
    if (coef == 0.0) return;
    total += p > 0.0 ? coef * std::log(p) : (coef > 0.0 ? -kInf : kInf);
  };
  for (int t = 0; t < k; ++t) {
    for (int w = 0; w < corpus.vocab_size(); ++w) add(prior.eta0(w) - 1.0, latent.beta(t, w));
  }
  for (std::size_t d = 0; d < corpus.docs.size(); ++d) {
    const auto di = static_cast<Eigen::Index>(d);
    for (int t = 0; t < k; ++t) add(prior.alpha0(t) - 1.0, latent.theta(di, t));
    for (std::size_t n = 0; n < corpus.docs[d].size(); ++n) {
      const int t = latent.z[d][n];
      add(1.0, latent.beta(t, corpus.docs[d][n]));
      add(1.0, latent.theta(di, t));
    }
  }
  return total;
}

HeldOutScore HeldOutLogLik(const Eigen::MatrixXd& beta, const Eigen::MatrixXd& theta,
                           const std::vector<std::vector<int>>& docs) {
  if (theta.rows() != static_cast<Eigen::Index>(docs.size()) || theta.cols() != beta.rows()) {
    throw StructuralError("held-out mixtures do not match the documents or topics");
  }
  HeldOutScore s;
  for (std::size_t d = 0; d < docs.size(); ++d) {
    for (int w : docs[d]) {
      if (w < 0 || w >= beta.cols()) throw DataError("held-out token outside the vocabulary");
      const double p = theta.row(static_cast<Eigen::Index>(d)).dot(beta.col(w));
      s.loglik += p > 0.0 ? std::log(p) : -kInf;
      ++s.tokens;
    }
  }
  s.perplexity = s.tokens == 0 ? 1.0 : std::exp(-s.loglik / static_cast<double>(s.tokens));
  return s;
}

std::vector<std::vector<int>> TopWords(const Eigen::MatrixXd& beta, int count) {
  std::vector<std::vector<int>> out;
  for (Eigen::Index t = 0; t < beta.rows(); ++t) {
    std::vector<int> ids(static_cast<std::size_t>(beta.cols()));
    std::iota(ids.begin(), ids.end(), 0);
    std::stable_sort(ids.begin(), ids.end(),
                     [&](int a, int b) { return beta(t, a) > beta(t, b); });
    ids.resize(std::min<std::size_t>(ids.size(), static_cast<std::size_t>(std::max(count, 0))));
    out.push_back(std::move(ids));
  }
  return out;
}

NonconcavityWitness LdaNonconcavityWitness(const Corpus& corpus, const LdaLatent& point, int d,
                                           int n, int k) {
  if (d < 0 || d >= static_cast<int>(corpus.docs.size()) || n < 0 ||
      n >= static_cast<int>(corpus.docs[d].size()) || k < 0 || k >= point.theta.cols()) {
    throw DomainError("witness index out of range");
  }
  const double th = point.theta(d, k);
  if (!(th > 0.0)) {
    throw BoundaryError("Theta[" + std::to_string(d) + "]", "document mixture is on the boundary");
  }
  const double z = point.z.at(d).at(n) == k ? 1.0 : 0.0;
  return Symmetric2x2Witness(-z / (th * th), 1.0 / th, 0.0,
                             "token_topic[" + std::to_string(d) + "," + std::to_string(n) + "," +
                                 std::to_string(k) + "]");
}

}  // namespace gbdmap
