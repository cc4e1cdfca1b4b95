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

#include "gbdmap/gibbs.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <sstream>

#include "gbdmap/errors.h"

namespace gbdmap {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Eigen::MatrixXd Sym(const Eigen::MatrixXd& m) { return 0.5 * (m + m.transpose()); }

Eigen::MatrixXd ClampEigenvalues(const Eigen::MatrixXd& m, double floor) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Sym(m));
  const Eigen::VectorXd ev = es.eigenvalues().cwiseMax(floor);
  return Sym(es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose());
}

// Mixes the normalized vector with the floor so that every entry stays at or
// above it after renormalization.
Eigen::VectorXd FloorAndNormalize(Eigen::VectorXd p, double floor) {
  p = p.cwiseMax(0.0);
  const double total = p.sum();
  const double n = static_cast<double>(p.size());
  if (!(total > 0.0)) return Eigen::VectorXd::Constant(p.size(), 1.0 / n);
  return (p / total * (1.0 - n * floor)).array() + floor;
}

void TraceRow(std::ostringstream& os, int iteration, const std::string& name, double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", value);
  os << iteration << ',' << name << ',' << buf << '\n';
}

int Majority(const std::vector<int>& votes) {
  return static_cast<int>(std::max_element(votes.begin(), votes.end()) - votes.begin());
}

// k-means++ seeding followed by nearest-center assignment.
std::vector<int> SeededLabels(const Eigen::MatrixXd& data, int k, Rng& rng) {
  const Eigen::Index n = data.rows();
  std::vector<Eigen::Index> centers = {
      std::uniform_int_distribution<Eigen::Index>(0, n - 1)(rng)};
  std::vector<double> dist(n, kInf);
  while (static_cast<int>(centers.size()) < k) {
    double total = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      dist[i] = std::min(dist[i], (data.row(i) - data.row(centers.back())).squaredNorm());
      total += dist[i];
    }
    Eigen::Index next = 0;
    if (total > 0.0) {
      double u = std::uniform_real_distribution<double>(0.0, total)(rng);
      for (next = 0; next + 1 < n && u >= dist[next]; ++next) u -= dist[next];
    } else {
      next = std::uniform_int_distribution<Eigen::Index>(0, n - 1)(rng);
    }
    centers.push_back(next);
  }
  std::vector<int> labels(n, 0);
  for (Eigen::Index i = 0; i < n; ++i) {
    double best = kInf;
    for (int c = 0; c < k; ++c) {
      const double d = (data.row(i) - data.row(centers[c])).squaredNorm();
      if (d < best) {
        best = d;
        labels[i] = c;
      }
    }
  }
  return labels;
}

}  // namespace

void ChainConfig::Validate() const {
  if (iterations < 1) throw ConfigError("chain needs at least one iteration");
  if (burn_in < 0 || burn_in >= iterations) throw ConfigError("burn-in must be below iterations");
  if (thin < 1) throw ConfigError("thin must be at least 1");
}

double SampleGamma(Rng& rng, double shape) {
  return std::gamma_distribution<double>(shape, 1.0)(rng);
}

Eigen::VectorXd SampleDirichlet(Rng& rng, const Eigen::VectorXd& alpha) {
  Eigen::VectorXd g(alpha.size());
  for (Eigen::Index j = 0; j < alpha.size(); ++j) g(j) = SampleGamma(rng, alpha(j));
  const double s = g.sum();
  if (!(s > 0.0)) {
    // Every gamma draw underflowed; fall back to the largest parameter.
    g.setZero();
    Eigen::Index arg = 0;
    alpha.maxCoeff(&arg);
    g(arg) = 1.0;
    return g;
  }
  return g / s;
}

Eigen::MatrixXd SampleWishart(Rng& rng, const Eigen::MatrixXd& scale, double dof) {
  const Eigen::Index d = scale.rows();
  const Eigen::MatrixXd l = Eigen::LLT<Eigen::MatrixXd>(Sym(scale)).matrixL();
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    a(i, i) = std::sqrt(2.0 * SampleGamma(rng, 0.5 * (dof - static_cast<double>(i))));
    for (Eigen::Index j = 0; j < i; ++j) a(i, j) = normal(rng);
  }
  const Eigen::MatrixXd la = l * a;
  return Sym(la * la.transpose());
}

int SampleCategorical(Rng& rng, const std::vector<double>& log_weight) {
  const double top = *std::max_element(log_weight.begin(), log_weight.end());
  std::vector<double> w(log_weight.size());
  double total = 0.0;
  for (std::size_t j = 0; j < w.size(); ++j) total += (w[j] = std::exp(log_weight[j] - top));
  double u = std::uniform_real_distribution<double>(0.0, total)(rng);
  for (std::size_t j = 0; j < w.size(); ++j) {
    if (u < w[j]) return static_cast<int>(j);
    u -= w[j];
  }
  for (std::size_t j = w.size(); j-- > 0;) {
    if (w[j] > 0.0) return static_cast<int>(j);
  }
  return 0;
}

NormalWishart NormalWishartPosterior(const Eigen::MatrixXd& data, const std::vector<int>& labels,
                                     int k, const BgmmPrior& prior) {
  const Eigen::Index d = data.cols();
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(d);
  int n = 0;
  for (Eigen::Index i = 0; i < data.rows(); ++i) {
    if (labels[i] != k) continue;
    sum += data.row(i).transpose();
    ++n;
  }
  NormalWishart nw;
  nw.beta = prior.beta0 + n;
  nw.dof = prior.nu0 + n;
  Eigen::MatrixXd inv = Sym(prior.w0).inverse();
  if (n > 0) {
    const Eigen::VectorXd mean = sum / n;
    for (Eigen::Index i = 0; i < data.rows(); ++i) {
      if (labels[i] != k) continue;
      const Eigen::VectorXd r = data.row(i).transpose() - mean;
      inv += r * r.transpose();
    }
    const Eigen::VectorXd diff = mean - prior.mu0;
    inv += (prior.beta0 * n / nw.beta) * diff * diff.transpose();
    nw.mean = (prior.beta0 * prior.mu0 + sum) / nw.beta;
  } else {
    nw.mean = prior.mu0;
  }
  nw.scale = Sym(inv).inverse();
  return nw;
}

void SampleNormalWishart(Rng& rng, const NormalWishart& nw, Eigen::VectorXd& mu,
                         Eigen::MatrixXd& lambda) {
  lambda = SampleWishart(rng, nw.scale, nw.dof);
  const Eigen::MatrixXd l = Eigen::LLT<Eigen::MatrixXd>(lambda).matrixL();
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd e(nw.mean.size());
  for (Eigen::Index j = 0; j < e.size(); ++j) e(j) = normal(rng);
  mu = nw.mean + l.transpose().triangularView<Eigen::Upper>().solve(e) / std::sqrt(nw.beta);
}

std::vector<double> BgmmLabelLogWeights(const Eigen::VectorXd& y, const Eigen::VectorXd& pi,
                                        const std::vector<Eigen::VectorXd>& mu,
                                        const std::vector<Eigen::MatrixXd>& lambda) {
  std::vector<double> w(mu.size());
  for (std::size_t k = 0; k < mu.size(); ++k) {
    const Eigen::LLT<Eigen::MatrixXd> llt(lambda[k]);
    const Eigen::MatrixXd l = llt.matrixL();
    const double logdet = 2.0 * l.diagonal().array().log().sum();
    const Eigen::VectorXd r = y - mu[k];
    w[k] = std::log(pi(static_cast<Eigen::Index>(k))) + 0.5 * logdet -
           0.5 * r.dot(lambda[k] * r);
  }
  return w;
}

std::vector<int> BestLabelPermutation(const std::vector<int>& from, const std::vector<int>& to,
                                      int k) {
  if (from.size() != to.size()) throw StructuralError("label vectors differ in length");
  // Minimize cost = -overlap with the potential-based Hungarian method.
  std::vector<std::vector<double>> cost(k + 1, std::vector<double>(k + 1, 0.0));
  for (std::size_t i = 0; i < from.size(); ++i) cost[from[i] + 1][to[i] + 1] -= 1.0;
  std::vector<double> u(k + 1, 0.0), v(k + 1, 0.0);
  std::vector<int> p(k + 1, 0), way(k + 1, 0);
  for (int i = 1; i <= k; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(k + 1, kInf);
    std::vector<bool> used(k + 1, false);
    do {
      used[j0] = true;
      const int i0 = p[j0];
      double delta = kInf;
      int j1 = 0;
      for (int j = 1; j <= k; ++j) {
        if (used[j]) continue;
        const double cur = cost[i0][j] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= k; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> perm(k, 0);
  for (int j = 1; j <= k; ++j) perm[p[j] - 1] = j - 1;
  return perm;
}

double QuantizedMode(const std::vector<double>& values, int scale) {
  if (values.empty()) throw DomainError("mode of an empty sample");
  if (scale < 1) throw ConfigError("quantization scale must be at least 1");
  std::map<long long, int> counts;
  for (double v : values) ++counts[std::llround(v * scale)];
  long long best = counts.begin()->first;
  int best_count = 0;
  for (const auto& [bin, c] : counts) {
    if (c > best_count) {
      best = bin;
      best_count = c;
    }
  }
  return static_cast<double>(best) / scale;
}

BgmmChainResult GibbsBgmm(const Eigen::MatrixXd& data, const BgmmPrior& prior, int k,
                          const ChainConfig& chain, const ModeExtraction& mode,
                          const std::vector<int>& init, double weight_floor) {
  chain.Validate();
  const int n = static_cast<int>(data.rows());
  const int d = static_cast<int>(data.cols());
  if (k < 1 || k > n) throw ConfigError("need 1 <= K <= N");
  prior.Validate(k, d);
  Rng rng(chain.seed);

  std::vector<int> labels(n);
  if (!init.empty()) {
    if (static_cast<int>(init.size()) != n) throw StructuralError("initial labels mismatch");
    labels = init;
  } else {
    labels = SeededLabels(data, k, rng);
  }

  Eigen::VectorXd pi(k);
  std::vector<Eigen::VectorXd> mu(k);
  std::vector<Eigen::MatrixXd> lambda(k);
  auto sample_parameters = [&]() {
    Eigen::VectorXd a = prior.alpha0;
    for (int l : labels) a(l) += 1.0;
    pi = SampleDirichlet(rng, a);
    for (int c = 0; c < k; ++c) {
      SampleNormalWishart(rng, NormalWishartPosterior(data, labels, c, prior), mu[c], lambda[c]);
    }
  };
  sample_parameters();

  BgmmChainResult out;
  std::ostringstream trace;
  trace << "iteration,parameter,value\n";
  std::vector<std::vector<int>> kept_labels;
  for (int it = 1; it <= chain.iterations; ++it) {
    for (int i = 0; i < n; ++i) {
      labels[i] = SampleCategorical(rng, BgmmLabelLogWeights(data.row(i).transpose(), pi, mu, lambda));
    }
    sample_parameters();
    for (int c = 0; c < k; ++c) {
      TraceRow(trace, it, "pi[" + std::to_string(c) + "]", pi(c));
      for (int j = 0; j < d; ++j) {
        TraceRow(trace, it, "mu[" + std::to_string(c) + "][" + std::to_string(j) + "]", mu[c](j));
      }
    }
    if (it > chain.burn_in && (it - chain.burn_in) % chain.thin == 0) {
      BgmmLatent s;
      s.pi = pi;
      s.mu = mu;
      s.lambda = lambda;
      s.z = BgmmLatent::OneHot(labels, k);
      out.samples.push_back(std::move(s));
      kept_labels.push_back(labels);
    }
  }
  out.trace_csv = trace.str();
  out.final_labels = labels;

  // Align every kept draw to the final sweep.
  std::vector<std::vector<int>> votes(n, std::vector<int>(k, 0));
  for (std::size_t s = 0; s < out.samples.size(); ++s) {
    const std::vector<int> perm = BestLabelPermutation(kept_labels[s], labels, k);
    BgmmLatent& draw = out.samples[s];
    BgmmLatent aligned = draw;
    std::vector<int> relabeled(n);
    for (int i = 0; i < n; ++i) relabeled[i] = perm[kept_labels[s][i]];
    for (int c = 0; c < k; ++c) {
      aligned.pi(perm[c]) = draw.pi(c);
      aligned.mu[perm[c]] = draw.mu[c];
      aligned.lambda[perm[c]] = draw.lambda[c];
    }
    aligned.z = BgmmLatent::OneHot(relabeled, k);
    draw = std::move(aligned);
    for (int i = 0; i < n; ++i) ++votes[i][relabeled[i]];
  }

  BgmmLatent m;
  std::vector<int> mode_labels(n);
  for (int i = 0; i < n; ++i) mode_labels[i] = Majority(votes[i]);
  m.z = BgmmLatent::OneHot(mode_labels, k);
  m.pi.resize(k);
  std::vector<double> buf(out.samples.size());
  auto mode_of = [&](auto&& get) {
    for (std::size_t s = 0; s < out.samples.size(); ++s) buf[s] = get(out.samples[s]);
    return QuantizedMode(buf, mode.scale);
  };
  for (int c = 0; c < k; ++c) {
    m.pi(c) = mode_of([&](const BgmmLatent& s) { return s.pi(c); });
    Eigen::VectorXd mc(d);
    Eigen::MatrixXd lc(d, d);
    for (int a = 0; a < d; ++a) {
      mc(a) = mode_of([&](const BgmmLatent& s) { return s.mu[c](a); });
      for (int b = a; b < d; ++b) {
        lc(a, b) = lc(b, a) = mode_of([&](const BgmmLatent& s) { return s.lambda[c](a, b); });
      }
    }
    m.mu.push_back(mc);
    m.lambda.push_back(ClampEigenvalues(lc, 1e-8));
  }
  m.pi = FloorAndNormalize(m.pi, weight_floor);
  out.mode = std::move(m);
  return out;
}

std::vector<double> LdaTopicLogWeights(const std::vector<double>& doc_topic,
                                       const Eigen::MatrixXd& topic_word,
                                       const std::vector<double>& topic_total, int word,
                                       const LdaPrior& prior) {
  const double eta_sum = prior.eta0.sum();
  std::vector<double> w(doc_topic.size());
  for (std::size_t t = 0; t < w.size(); ++t) {
    const auto ti = static_cast<Eigen::Index>(t);
    w[t] = std::log(doc_topic[t] + prior.alpha0(ti)) +
           std::log(topic_word(ti, word) + prior.eta0(word)) - std::log(topic_total[t] + eta_sum);
  }
  return w;
}

LdaChainResult GibbsLda(const Corpus& corpus, const LdaPrior& prior, int k,
                        const ChainConfig& chain, const ModeExtraction& mode,
                        double simplex_floor) {
  chain.Validate();
  corpus.Validate();
  const int v = corpus.vocab_size();
  const int m = static_cast<int>(corpus.docs.size());
  prior.Validate(k, v);
  Rng rng(chain.seed);
  std::uniform_int_distribution<int> pick(0, k - 1);

  std::vector<std::vector<int>> z(m);
  std::vector<std::vector<double>> doc_topic(m, std::vector<double>(k, 0.0));
  Eigen::MatrixXd topic_word = Eigen::MatrixXd::Zero(k, v);
  std::vector<double> topic_total(k, 0.0);
  for (int d = 0; d < m; ++d) {
    for (int w : corpus.docs[d]) {
      const int t = pick(rng);
      z[d].push_back(t);
      doc_topic[d][t] += 1.0;
      topic_word(t, w) += 1.0;
      topic_total[t] += 1.0;
    }
  }
  const double eta_sum = prior.eta0.sum();
  const double alpha_sum = prior.alpha0.sum();
  auto smoothed = [&](Eigen::MatrixXd& beta, Eigen::MatrixXd& theta) {
    beta.resize(k, v);
    theta.resize(m, k);
    for (int t = 0; t < k; ++t) {
      for (int w = 0; w < v; ++w) {
        beta(t, w) = (topic_word(t, w) + prior.eta0(w)) / (topic_total[t] + eta_sum);
      }
    }
    for (int d = 0; d < m; ++d) {
      const double len = static_cast<double>(corpus.docs[d].size());
      for (int t = 0; t < k; ++t) theta(d, t) = (doc_topic[d][t] + prior.alpha0(t)) / (len + alpha_sum);
    }
  };

  std::ostringstream trace;
  trace << "iteration,parameter,value\n";
  std::vector<std::vector<int>> kept_z;
  std::vector<Eigen::MatrixXd> kept_beta, kept_theta;
  const int traced_words = std::min(v, 5);
  for (int it = 1; it <= chain.iterations; ++it) {
    for (int d = 0; d < m; ++d) {
      for (std::size_t n = 0; n < corpus.docs[d].size(); ++n) {
        const int w = corpus.docs[d][n];
        int t = z[d][n];
        doc_topic[d][t] -= 1.0;
        topic_word(t, w) -= 1.0;
        topic_total[t] -= 1.0;
        t = SampleCategorical(rng, LdaTopicLogWeights(doc_topic[d], topic_word, topic_total, w, prior));
        z[d][n] = t;
        doc_topic[d][t] += 1.0;
        topic_word(t, w) += 1.0;
        topic_total[t] += 1.0;
      }
    }
    Eigen::MatrixXd beta, theta;
    smoothed(beta, theta);
    for (int t = 0; t < k; ++t) {
      TraceRow(trace, it, "theta[0][" + std::to_string(t) + "]", theta(0, t));
      for (int w = 0; w < traced_words; ++w) {
        TraceRow(trace, it, "beta[" + std::to_string(t) + "][" + std::to_string(w) + "]", beta(t, w));
      }
    }
    if (it > chain.burn_in && (it - chain.burn_in) % chain.thin == 0) {
      std::vector<int> flat;
      for (const auto& doc : z) flat.insert(flat.end(), doc.begin(), doc.end());
      kept_z.push_back(std::move(flat));
      kept_beta.push_back(std::move(beta));
      kept_theta.push_back(std::move(theta));
    }
  }

  std::vector<int> final_flat;
  for (const auto& doc : z) final_flat.insert(final_flat.end(), doc.begin(), doc.end());
  const std::size_t tokens = final_flat.size();
  std::vector<std::vector<int>> votes(tokens, std::vector<int>(k, 0));
  Eigen::MatrixXd beta_sum = Eigen::MatrixXd::Zero(k, v);
  Eigen::MatrixXd theta_sum = Eigen::MatrixXd::Zero(m, k);
  for (std::size_t s = 0; s < kept_z.size(); ++s) {
    const std::vector<int> perm = BestLabelPermutation(kept_z[s], final_flat, k);
    Eigen::MatrixXd b(k, v), th(m, k);
    for (int t = 0; t < k; ++t) {
      b.row(perm[t]) = kept_beta[s].row(t);
      th.col(perm[t]) = kept_theta[s].col(t);
    }
    kept_beta[s] = b;
    kept_theta[s] = th;
    beta_sum += b;
    theta_sum += th;
    for (std::size_t i = 0; i < tokens; ++i) ++votes[i][perm[kept_z[s][i]]];
  }
  const double kept = static_cast<double>(kept_z.size());

  std::vector<std::vector<int>> majority(m);
  std::size_t flat = 0;
  for (int d = 0; d < m; ++d) {
    for (std::size_t n = 0; n < corpus.docs[d].size(); ++n) majority[d].push_back(Majority(votes[flat++]));
  }

  LdaChainResult out;
  out.trace_csv = trace.str();
  out.mean.z = majority;
  out.mean.beta = beta_sum / kept;
  out.mean.theta = theta_sum / kept;
  for (int t = 0; t < k; ++t) out.mean.beta.row(t) /= out.mean.beta.row(t).sum();
  for (int d = 0; d < m; ++d) out.mean.theta.row(d) /= out.mean.theta.row(d).sum();

  out.mode.z = majority;
  out.mode.beta.resize(k, v);
  out.mode.theta.resize(m, k);
  std::vector<double> buf(kept_z.size());
  for (int t = 0; t < k; ++t) {
    for (int w = 0; w < v; ++w) {
      for (std::size_t s = 0; s < buf.size(); ++s) buf[s] = kept_beta[s](t, w);
      out.mode.beta(t, w) = QuantizedMode(buf, mode.scale);
    }
    out.mode.beta.row(t) =
        FloorAndNormalize(out.mode.beta.row(t).transpose(), std::min(simplex_floor, 1.0 / v)).transpose();
  }
  for (int d = 0; d < m; ++d) {
    for (int t = 0; t < k; ++t) {
      for (std::size_t s = 0; s < buf.size(); ++s) buf[s] = kept_theta[s](d, t);
      out.mode.theta(d, t) = QuantizedMode(buf, mode.scale);
    }
    out.mode.theta.row(d) =
        FloorAndNormalize(out.mode.theta.row(d).transpose(), std::min(simplex_floor, 1.0 / k)).transpose();
  }
  return out;
}

Eigen::MatrixXd GibbsLdaFoldIn(const std::vector<std::vector<int>>& docs,
                               const Eigen::MatrixXd& beta, const Eigen::VectorXd& alpha,
                               const ChainConfig& chain) {
  chain.Validate();
  const int k = static_cast<int>(beta.rows());
  const int m = static_cast<int>(docs.size());
  if (alpha.size() != k) throw StructuralError("alpha does not match the topic count");
  Rng rng(chain.seed);
  std::uniform_int_distribution<int> pick(0, k - 1);
  const Eigen::MatrixXd log_beta = beta.array().log().matrix();
  std::vector<std::vector<int>> z(m);
  std::vector<std::vector<double>> doc_topic(m, std::vector<double>(k, 0.0));
  for (int d = 0; d < m; ++d) {
    for (int w : docs[d]) {
      if (w < 0 || w >= beta.cols()) throw DataError("token outside the vocabulary");
      const int t = pick(rng);
      z[d].push_back(t);
      doc_topic[d][t] += 1.0;
    }
  }
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(m, k);
  int kept = 0;
  std::vector<double> w(k);
  for (int it = 1; it <= chain.iterations; ++it) {
    for (int d = 0; d < m; ++d) {
      for (std::size_t n = 0; n < docs[d].size(); ++n) {
        doc_topic[d][z[d][n]] -= 1.0;
        for (int t = 0; t < k; ++t) w[t] = std::log(doc_topic[d][t] + alpha(t)) + log_beta(t, docs[d][n]);
        z[d][n] = SampleCategorical(rng, w);
        doc_topic[d][z[d][n]] += 1.0;
      }
    }
    if (it > chain.burn_in && (it - chain.burn_in) % chain.thin == 0) {
      for (int d = 0; d < m; ++d) {
        const double len = static_cast<double>(docs[d].size());
        for (int t = 0; t < k; ++t) sum(d, t) += (doc_topic[d][t] + alpha(t)) / (len + alpha.sum());
      }
      ++kept;
    }
  }
  return sum / kept;
}

}  // namespace gbdmap
