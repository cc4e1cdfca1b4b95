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

#include "gbdmap/pipeline.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>

#include "gbdmap/data.h"
#include "gbdmap/errors.h"
#include "gbdmap/gibbs.h"
#include "gbdmap/metrics.h"

namespace gbdmap {
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

std::string ReadText(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void WriteText(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

std::string Optional(const std::optional<double>& v) { return v ? FormatFull(*v) : ""; }

// Nonempty, non-comment lines split on whitespace.
std::vector<std::vector<std::string>> Records(const std::string& text) {
  std::vector<std::vector<std::string>> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream fields(line);
    std::vector<std::string> rec;
    std::string f;
    while (fields >> f) rec.push_back(f);
    if (!rec.empty()) out.push_back(std::move(rec));
  }
  return out;
}

double ParseDouble(const std::string& s) {
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || s.empty()) throw DataError("'" + s + "' is not a number");
  return v;
}

int ParseInt(const std::string& s) {
  const double v = ParseDouble(s);
  if (v != std::floor(v)) throw DataError("'" + s + "' is not an integer");
  return static_cast<int>(v);
}

std::string Provenance(const RunReport& r) {
  return "# config_sha256 " + r.config_hash + "\n# dataset_sha256 " + r.dataset_hash + "\n";
}

std::string TraceCsv(const GbdResult& result, const std::string& provenance) {
  std::string out = provenance + "iteration,lbd,ubd,gap,seconds\n";
  for (const auto& row : result.trace) {
    out += std::to_string(row.iteration) + "," + FormatFull(row.lbd) + "," + FormatFull(row.ubd) + "," +
           FormatFull(row.ubd - row.lbd) + "," + FormatFull(row.seconds) + "\n";
  }
  return out;
}

std::string CertificateText(const Certificate& c, const std::string& provenance) {
  std::ostringstream os;
  os << provenance << "status = " << ToString(c.status) << "\ngap = " << FormatFull(c.gap)
     << "\nepsilon = " << FormatFull(c.epsilon) << "\niterations = " << c.iterations
     << "\nlocal = " << (c.local ? "true" : "false")
     << "\ncertified_bounds = " << (c.certified_bounds ? "true" : "false") << "\n";
  return os.str();
}

GbdOptions SolverOptions(const RunConfig& config, std::ostream* log) {
  GbdOptions o;
  o.epsilon = config.solver.epsilon;
  o.max_iterations = config.solver.max_iterations;
  o.time_limit = config.solver.time_limit;
  o.master.node_limit = config.solver.node_limit;
  o.master.time_limit = config.solver.master_time_limit;
  o.master.dual_iterations = config.solver.dual_iterations;
  o.master.anchor_labels = config.solver.anchor_labels;
  o.log = log;
  return o;
}

ChainConfig WarmChain(const RunConfig& config) {
  ChainConfig chain;
  chain.iterations = config.solver.warm_start_sweeps;
  chain.burn_in = config.solver.warm_start_sweeps / 10;
  chain.seed = config.seed;
  return chain;
}

DatasetSpec ResolvedSpec(const RunConfig& config) {
  DatasetSpec spec = config.dataset;
  if (!spec.source.empty() && spec.source.find("://") == std::string::npos) {
    spec.source = config.Resolve(spec.source).string();
  }
  spec.synthetic.seed = config.data_seed;
  return spec;
}

BgmmPrior MakeBgmmPrior(const RunConfig& config, const Eigen::MatrixXd& x) {
  BgmmPrior prior = BgmmPrior::Defaults(x, config.k);
  const auto d = x.cols();
  if (config.prior.alpha) prior.alpha0 = Eigen::VectorXd::Constant(config.k, *config.prior.alpha);
  prior.beta0 = config.prior.beta0;
  if (config.prior.mu0) {
    if (static_cast<Eigen::Index>(config.prior.mu0->size()) != d) {
      throw ConfigError("prior.mu0 has " + std::to_string(config.prior.mu0->size()) + " entries, data has " +
                        std::to_string(d) + " columns");
    }
    prior.mu0 = Eigen::Map<const Eigen::VectorXd>(config.prior.mu0->data(), d);
  }
  prior.w0 = config.prior.w0_scale * Eigen::MatrixXd::Identity(d, d);
  if (config.prior.nu0) prior.nu0 = *config.prior.nu0;
  try {
    prior.Validate(config.k, static_cast<int>(d));
  } catch (const DomainError& e) {
    throw ConfigError(std::string("prior: ") + e.what());
  }
  return prior;
}

LdaPrior MakeLdaPrior(const RunConfig& config, int v) {
  LdaPrior prior = LdaPrior::Defaults(config.k, v);
  if (config.prior.alpha) prior.alpha0.setConstant(*config.prior.alpha);
  prior.eta0.setConstant(config.prior.eta);
  return prior;
}

Assignment BgmmWarmStart(const RunConfig& config, const BgmmModel& model, std::ostream* log) {
  const int k = model.k();
  BgmmLatent latent;
  std::vector<int> labels;
  if (config.solver.warm_start == "gibbs-mode") {
    latent = GibbsBgmm(model.data(), model.prior(), k, WarmChain(config), config.mode, {},
                       model.options().weight_floor)
                 .mode;
    labels = latent.Labels();
  } else if (config.solver.warm_start == "file") {
    latent = ParseBgmmLatent(ReadText(config.Resolve(config.solver.warm_start_file)));
    latent.Validate(model.n(), k, model.d());
    labels = latent.Labels();
  } else {
    labels.resize(static_cast<std::size_t>(model.n()));
    for (int i = 0; i < model.n(); ++i) labels[i] = i % k;
    latent = model.ConditionalOptimum(labels);
  }
  if (!LabelsSatisfy(labels, k, config.pairs, config.min_cluster_size)) {
    labels = RepairLabels(labels, k, config.pairs, config.min_cluster_size);
    latent = model.ConditionalOptimum(labels);
    if (log) *log << "warm start repaired to satisfy the constraints\n";
  }
  latent.z = BgmmLatent::OneHot(labels, k);
  return model.ToFeasibleAssignment(latent);
}

std::string LabelsCsv(const std::vector<int>& labels, const std::string& provenance) {
  std::string out = provenance + "index,label\n";
  for (std::size_t i = 0; i < labels.size(); ++i) {
    out += std::to_string(i + 1) + "," + std::to_string(labels[i] + 1) + "\n";
  }
  return out;
}

std::vector<int> ReadLabelsCsv(const fs::path& path) {
  std::vector<int> labels;
  std::istringstream in(ReadText(path));
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#' || line.rfind("index", 0) == 0) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw DataError("bad label row '" + line + "'");
    labels.push_back(ParseInt(line.substr(comma + 1)));
  }
  return labels;
}

void RunBgmm(const RunConfig& config, RunReport& report, const fs::path& out, std::ostream* log) {
  const TabularData data = LoadTabular(ResolvedSpec(config));
  report.dataset_hash = data.content_hash;
  const std::string prov = Provenance(report);
  const int n = static_cast<int>(data.x.rows());
  for (const auto& p : config.pairs) {
    if (p.i >= n || p.j >= n) {
      throw ConfigError("constraint pair " + std::to_string(p.i + 1) + "-" + std::to_string(p.j + 1) +
                        " exceeds the " + std::to_string(n) + " data points");
    }
  }
  const BgmmPrior prior = MakeBgmmPrior(config, data.x);
  const BgmmModel model(data.x, prior, config.k);
  // Contradictory constraint systems are rejected here, before any solving.
  const std::vector<LinearConstraint> rows = model.Constraints(config.pairs, config.min_cluster_size);

  BgmmLatent latent;
  if (config.method == "gbd") {
    const Assignment init = BgmmWarmStart(config, model, log);
    GbdOptions options = SolverOptions(config, log);
    options.polish = [&](const Assignment& x) { return model.Polish(x); };
    GbdResult result = RunGbd({model.graph(), rows}, init, options);
    latent = model.FromAssignment(result.incumbent);
    report.log_map = LogMapBgmm(data.x, prior, latent);
    report.upper_bound = result.certificate.ubd;
    report.certificate = ToString(result.certificate.status);
    report.gap = result.certificate.gap;
    WriteText(out / "trace.csv", TraceCsv(result, prov));
    WriteText(out / "certificate.txt", CertificateText(result.certificate, prov));
    report.gbd = std::move(result);
  } else if (config.method == "gibbs") {
    BgmmChainResult chain = GibbsBgmm(data.x, prior, config.k, config.gibbs, config.mode, {},
                                      model.options().weight_floor);
    latent = chain.mode;
    report.log_map = LogMapBgmm(data.x, prior, latent);
    WriteText(out / "gibbs_trace.csv", prov + chain.trace_csv);
  } else {
    latent = ParseBgmmLatent(ReadText(config.Resolve(config.latent_file)));
    latent.Validate(n, config.k, static_cast<int>(data.x.cols()));
    report.log_map = LogMapBgmm(data.x, prior, latent);
  }
  report.labels = latent.Labels();
  if (!LabelsSatisfy(report.labels, config.k, config.pairs, config.min_cluster_size)) {
    if (config.method != "eval-only") throw Error("returned labels violate the constraints");
    if (log) *log << "supplied labels violate the constraints\n";
  }
  WriteText(out / "latent.txt", prov + BgmmLatentText(latent));
  WriteText(out / "labels.csv", LabelsCsv(report.labels, prov));
  if (!data.labels.empty()) {
    std::vector<int> truth(data.labels.size());
    for (std::size_t i = 0; i < truth.size(); ++i) truth[i] = data.labels[i] - 1;
    WriteText(out / "true_labels.csv", LabelsCsv(truth, prov));
  }
}

std::string TopWordsCsv(const LdaLatent& latent, const std::vector<std::string>& vocab,
                        const std::string& provenance) {
  const int k = static_cast<int>(latent.beta.rows());
  const int count = std::min<int>(10, static_cast<int>(latent.beta.cols()));
  std::vector<long> prevalence(static_cast<std::size_t>(k), 0);
  for (const auto& doc : latent.z) {
    for (int t : doc) ++prevalence[t];
  }
  const auto top = TopWords(latent.beta, count);
  std::string out = provenance + "topic,prevalence";
  for (int r = 1; r <= count; ++r) out += ",word_" + std::to_string(r);
  out += "\n";
  for (int t = 0; t < k; ++t) {
    out += std::to_string(t + 1) + "," + std::to_string(prevalence[t]);
    for (int w : top[t]) out += "," + vocab[w];
    out += "\n";
  }
  return out;
}

void RunLda(const RunConfig& config, RunReport& report, const fs::path& out, std::ostream* log) {
  const DatasetSpec spec = ResolvedSpec(config);
  std::vector<std::string> warnings;
  const auto raw = LoadRawDocuments(spec, &warnings);
  CorpusBuild build = BuildCorpus(raw, config.corpus.n_docs, config.corpus.vocab_size, config.data_seed);
  for (const auto& w : build.warnings) warnings.push_back(w);
  report.dataset_hash = Sha256Hex(CorpusDocsText(build.corpus) + "\n" + CorpusVocabText(build.corpus));
  const std::string prov = Provenance(report);

  std::optional<HeldOutSplit> split;
  if (config.corpus.train_frac > 0.0) {
    split = SplitHeldOut(build.corpus, config.corpus.train_frac, config.data_seed);
    for (const auto& w : split->warnings) warnings.push_back(w);
  }
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
  const Corpus& train = split ? split->train : build.corpus;
  train.Validate();
  WriteText(out / "corpus.txt", CorpusDocsText(train));
  WriteText(out / "vocab.txt", CorpusVocabText(train));

  const LdaPrior prior = MakeLdaPrior(config, train.vocab_size());
  try {
    prior.Validate(config.k, train.vocab_size());
  } catch (const Error& e) {
    throw ConfigError(std::string("prior: ") + e.what());
  }
  LdaLatent latent;
  Eigen::MatrixXd eval_beta;
  if (config.method == "gbd") {
    const LdaModel model(train, prior, config.k);
    LdaLatent warm;
    if (config.solver.warm_start == "gibbs-mode") {
      warm = GibbsLda(train, prior, config.k, WarmChain(config), config.mode).mode;
    } else if (config.solver.warm_start == "file") {
      warm = ParseLdaLatent(ReadText(config.Resolve(config.solver.warm_start_file)));
      warm.Validate(train, config.k);
    } else {
      std::vector<std::vector<int>> z(train.docs.size());
      for (std::size_t d = 0; d < z.size(); ++d) {
        for (std::size_t n = 0; n < train.docs[d].size(); ++n) z[d].push_back(static_cast<int>((d + n) % config.k));
      }
      warm = model.ConditionalOptimum(z);
    }
    GbdOptions options = SolverOptions(config, log);
    options.polish = [&](const Assignment& x) { return model.Polish(x); };
    GbdResult result = RunGbd({model.graph(), {}}, model.ToAssignment(warm), options);
    latent = model.FromAssignment(result.incumbent);
    report.upper_bound = result.certificate.ubd;
    report.certificate = ToString(result.certificate.status);
    report.gap = result.certificate.gap;
    WriteText(out / "trace.csv", TraceCsv(result, prov));
    WriteText(out / "certificate.txt", CertificateText(result.certificate, prov));
    report.gbd = std::move(result);
    eval_beta = latent.beta;
  } else if (config.method == "gibbs") {
    LdaChainResult chain = GibbsLda(train, prior, config.k, config.gibbs, config.mode);
    latent = chain.mode;
    eval_beta = chain.mean.beta;
    WriteText(out / "gibbs_trace.csv", prov + chain.trace_csv);
  } else {
    latent = ParseLdaLatent(ReadText(config.Resolve(config.latent_file)));
    latent.Validate(train, config.k);
    eval_beta = latent.beta;
  }
  report.log_map = LogMapLda(train, prior, latent);
  WriteText(out / "latent.txt", prov + LdaLatentText(latent));
  WriteText(out / "top_words.csv", TopWordsCsv(latent, train.vocab, prov));

  if (split) {
    Eigen::MatrixXd theta;
    if (config.method == "gibbs") {
      theta = GibbsLdaFoldIn(split->fold_in, eval_beta, prior.alpha0, config.gibbs);
    } else {
      theta = MapFoldIn(split->fold_in, eval_beta, prior.alpha0);
    }
    report.heldout = HeldOutLogLik(eval_beta, theta, split->evaluate);
    std::ostringstream os;
    os << prov << "loglik = " << FormatFull(report.heldout->loglik)
       << "\nperplexity = " << FormatFull(report.heldout->perplexity) << "\ntokens = " << report.heldout->tokens
       << "\ntest_documents = " << split->evaluate.size() << "\n";
    WriteText(out / "heldout.txt", os.str());
  }
}

std::string SummaryText(const RunConfig& config, const RunReport& r) {
  std::ostringstream os;
  os << "config_hash = " << r.config_hash << "\ndataset_hash = " << r.dataset_hash << "\ndataset = " << config.dataset.name
     << "\nmodel = " << config.model << "\nmethod = " << config.method << "\nk = " << config.k
     << "\nseed = " << config.seed << "\nlog_map = " << FormatFull(r.log_map)
     << "\nupper_bound = " << Optional(r.upper_bound) << "\ncertificate = " << r.certificate
     << "\ngap = " << Optional(r.gap) << "\nepsilon = " << FormatFull(config.solver.epsilon);
  if (r.gbd) {
    os << "\niterations = " << r.gbd->certificate.iterations
       << "\nlocal = " << (r.gbd->certificate.local ? "true" : "false");
  }
  os << "\nconstraints = " << config.pairs.size() << "\nmin_size = " << config.min_cluster_size;
  if (r.heldout) {
    os << "\nheldout_loglik = " << FormatFull(r.heldout->loglik)
       << "\nperplexity = " << FormatFull(r.heldout->perplexity) << "\nheldout_tokens = " << r.heldout->tokens;
  }
  os << "\nruntime_seconds = " << FormatFull(r.seconds) << "\n";
  return os.str();
}

std::string DisplayName(const std::string& method) {
  if (method == "gbd") return "GBD";
  if (method == "gibbs") return "Gibbs";
  return "Eval";
}

std::optional<double> OptionalValue(const std::map<std::string, std::string>& s, const std::string& key) {
  const auto it = s.find(key);
  if (it == s.end() || it->second.empty()) return std::nullopt;
  return ParseDouble(it->second);
}

const std::string& Required(const std::map<std::string, std::string>& s, const std::string& key,
                            const fs::path& dir) {
  const auto it = s.find(key);
  if (it == s.end()) throw DataError(dir.string() + ": summary has no " + key);
  return it->second;
}

struct TopicWords {
  long prevalence = 0;
  std::vector<std::string> words;
};

std::vector<TopicWords> ReadTopWords(const fs::path& path) {
  std::vector<TopicWords> out;
  std::istringstream in(ReadText(path));
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#' || line.rfind("topic", 0) == 0) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string c;
    while (std::getline(ss, c, ',')) cells.push_back(c);
    if (cells.size() < 2) throw DataError("bad top-words row '" + line + "'");
    TopicWords t;
    t.prevalence = std::stol(cells[1]);
    t.words.assign(cells.begin() + 2, cells.end());
    out.push_back(std::move(t));
  }
  return out;
}

void Emit(std::ostream& out, const fs::path& csv_dir, const std::string& title, const std::string& file,
          const std::vector<RunSummary>& runs, Table (*make)(const std::vector<RunSummary>&, bool)) {
  out << title << "\n" << make(runs, false).ToText() << "\n";
  if (!csv_dir.empty()) WriteText(csv_dir / file, make(runs, true).ToCsv());
}

}  // namespace

int ExitCodeFor(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e)) return kExitConfig;
  if (dynamic_cast<const InfeasibleError*>(&e)) return kExitInfeasible;
  if (dynamic_cast<const CompareError*>(&e)) return kExitCompareRefused;
  if (dynamic_cast<const AcquisitionError*>(&e) || dynamic_cast<const CacheCorruptionError*>(&e)) {
    return kExitAcquisition;
  }
  return kExitError;
}

std::string BgmmLatentText(const BgmmLatent& latent) {
  std::ostringstream os;
  const auto k = latent.pi.size();
  const auto d = latent.mu.empty() ? 0 : latent.mu[0].size();
  os << "model bgmm\nk " << k << "\nd " << d << "\nn " << latent.z.rows() << "\npi";
  for (Eigen::Index c = 0; c < k; ++c) os << ' ' << FormatFull(latent.pi(c));
  os << "\n";
  for (Eigen::Index c = 0; c < k; ++c) {
    os << "mu " << c + 1;
    for (Eigen::Index j = 0; j < d; ++j) os << ' ' << FormatFull(latent.mu[c](j));
    os << "\nlambda " << c + 1;
    for (Eigen::Index a = 0; a < d; ++a) {
      for (Eigen::Index b = 0; b < d; ++b) os << ' ' << FormatFull(latent.lambda[c](a, b));
    }
    os << "\n";
  }
  os << "labels";
  for (int l : latent.Labels()) os << ' ' << l + 1;
  os << "\n";
  return os.str();
}

BgmmLatent ParseBgmmLatent(const std::string& text) {
  int k = -1, d = -1, n = -1;
  BgmmLatent latent;
  std::vector<int> labels;
  for (const auto& rec : Records(text)) {
    const std::string& key = rec[0];
    if (key == "model") {
      if (rec.size() != 2 || rec[1] != "bgmm") throw DataError("latent file is not a bgmm latent");
    } else if (key == "k" || key == "d" || key == "n") {
      if (rec.size() != 2) throw DataError("bad '" + key + "' record");
      (key == "k" ? k : key == "d" ? d : n) = ParseInt(rec[1]);
      if (k > 0 && d > 0 && latent.mu.empty()) {
        latent.mu.assign(k, Eigen::VectorXd::Zero(d));
        latent.lambda.assign(k, Eigen::MatrixXd::Identity(d, d));
      }
    } else if (key == "pi") {
      if (k < 1 || static_cast<int>(rec.size()) != k + 1) throw DataError("bad pi record");
      latent.pi.resize(k);
      for (int c = 0; c < k; ++c) latent.pi(c) = ParseDouble(rec[c + 1]);
    } else if (key == "mu" || key == "lambda") {
      if (k < 1 || d < 1) throw DataError("k and d must precede " + key);
      const int c = ParseInt(rec.size() > 1 ? rec[1] : "0") - 1;
      const int size = key == "mu" ? d : d * d;
      if (c < 0 || c >= k || static_cast<int>(rec.size()) != size + 2) throw DataError("bad " + key + " record");
      for (int j = 0; j < size; ++j) {
        const double v = ParseDouble(rec[j + 2]);
        if (key == "mu") {
          latent.mu[c](j) = v;
        } else {
          latent.lambda[c](j / d, j % d) = v;
        }
      }
    } else if (key == "labels") {
      for (std::size_t j = 1; j < rec.size(); ++j) labels.push_back(ParseInt(rec[j]) - 1);
    } else {
      throw DataError("unknown latent record '" + key + "'");
    }
  }
  if (k < 1 || d < 1 || latent.pi.size() != k) throw DataError("latent file is incomplete");
  if (n >= 0 && static_cast<int>(labels.size()) != n) throw DataError("latent file has the wrong number of labels");
  for (int l : labels) {
    if (l < 0 || l >= k) throw DataError("label out of range in latent file");
  }
  latent.z = BgmmLatent::OneHot(labels, k);
  return latent;
}

std::string LdaLatentText(const LdaLatent& latent) {
  std::ostringstream os;
  os << "model lda\nk " << latent.beta.rows() << "\nv " << latent.beta.cols() << "\nm " << latent.theta.rows()
     << "\n";
  for (Eigen::Index t = 0; t < latent.beta.rows(); ++t) {
    os << "beta " << t + 1;
    for (Eigen::Index w = 0; w < latent.beta.cols(); ++w) os << ' ' << FormatFull(latent.beta(t, w));
    os << "\n";
  }
  for (Eigen::Index d = 0; d < latent.theta.rows(); ++d) {
    os << "theta " << d + 1;
    for (Eigen::Index t = 0; t < latent.theta.cols(); ++t) os << ' ' << FormatFull(latent.theta(d, t));
    os << "\n";
  }
  for (std::size_t d = 0; d < latent.z.size(); ++d) {
    os << "z " << d + 1;
    for (int t : latent.z[d]) os << ' ' << t + 1;
    os << "\n";
  }
  return os.str();
}

LdaLatent ParseLdaLatent(const std::string& text) {
  int k = -1, v = -1, m = -1;
  LdaLatent latent;
  for (const auto& rec : Records(text)) {
    const std::string& key = rec[0];
    if (key == "model") {
      if (rec.size() != 2 || rec[1] != "lda") throw DataError("latent file is not an lda latent");
    } else if (key == "k" || key == "v" || key == "m") {
      if (rec.size() != 2) throw DataError("bad '" + key + "' record");
      (key == "k" ? k : key == "v" ? v : m) = ParseInt(rec[1]);
      if (k > 0 && v > 0 && m >= 0 && latent.beta.size() == 0) {
        latent.beta = Eigen::MatrixXd::Zero(k, v);
        latent.theta = Eigen::MatrixXd::Zero(m, k);
        latent.z.assign(static_cast<std::size_t>(m), {});
      }
    } else if (key == "beta" || key == "theta" || key == "z") {
      if (latent.beta.size() == 0) throw DataError("k, v and m must precede " + key);
      const int row = ParseInt(rec.size() > 1 ? rec[1] : "0") - 1;
      if (key == "beta") {
        if (row < 0 || row >= k || static_cast<int>(rec.size()) != v + 2) throw DataError("bad beta record");
        for (int w = 0; w < v; ++w) latent.beta(row, w) = ParseDouble(rec[w + 2]);
      } else if (key == "theta") {
        if (row < 0 || row >= m || static_cast<int>(rec.size()) != k + 2) throw DataError("bad theta record");
        for (int t = 0; t < k; ++t) latent.theta(row, t) = ParseDouble(rec[t + 2]);
      } else {
        if (row < 0 || row >= m) throw DataError("bad z record");
        for (std::size_t j = 2; j < rec.size(); ++j) {
          const int t = ParseInt(rec[j]) - 1;
          if (t < 0 || t >= k) throw DataError("topic out of range in latent file");
          latent.z[row].push_back(t);
        }
      }
    } else {
      throw DataError("unknown latent record '" + key + "'");
    }
  }
  if (latent.beta.size() == 0) throw DataError("latent file is incomplete");
  return latent;
}

Eigen::MatrixXd MapFoldIn(const std::vector<std::vector<int>>& docs, const Eigen::MatrixXd& beta,
                          const Eigen::VectorXd& alpha, int max_sweeps) {
  const int k = static_cast<int>(beta.rows());
  const int v = static_cast<int>(beta.cols());
  Corpus corpus;
  corpus.docs = docs;
  corpus.vocab.resize(static_cast<std::size_t>(v));
  for (int w = 0; w < v; ++w) corpus.vocab[w] = std::to_string(w);
  LdaPrior prior = LdaPrior::Defaults(k, v);
  prior.alpha0 = alpha;
  const LdaModel model = LdaModel::FoldIn(corpus, prior, beta);
  const Eigen::MatrixXd log_beta = beta.array().log();

  auto assign = [&](const Eigen::MatrixXd& log_theta) {
    std::vector<std::vector<int>> z(docs.size());
    for (std::size_t d = 0; d < docs.size(); ++d) {
      for (int w : docs[d]) {
        int best = 0;
        for (int t = 1; t < k; ++t) {
          if (log_beta(t, w) + log_theta(d, t) > log_beta(best, w) + log_theta(d, best)) best = t;
        }
        z[d].push_back(best);
      }
    }
    return z;
  };
  std::vector<std::vector<int>> z = assign(Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(docs.size()), k));
  LdaLatent latent = model.ConditionalOptimum(z);
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    auto next = assign(latent.theta.array().log().matrix());
    if (next == z) break;
    z = std::move(next);
    latent = model.ConditionalOptimum(z);
  }
  return latent.theta;
}

RunReport RunExperiment(const RunConfig& config, std::ostream* log) {
  config.Validate();
  if (config.output_dir.empty()) throw ConfigError("no output directory given");
  const auto start = Clock::now();
  RunReport report;
  report.config_hash = config.Hash();
  fs::create_directories(config.output_dir);
  WriteText(config.output_dir / "resolved_config.ini", config.Resolved());
  if (config.model == "bgmm") {
    RunBgmm(config, report, config.output_dir, log);
  } else {
    RunLda(config, report, config.output_dir, log);
  }
  report.seconds = std::chrono::duration<double>(Clock::now() - start).count();
  WriteText(config.output_dir / "summary.txt", Provenance(report) + SummaryText(config, report));
  return report;
}

std::map<std::string, std::string> ReadSummary(const fs::path& run_dir) {
  std::map<std::string, std::string> out;
  std::istringstream in(ReadText(run_dir / "summary.txt"));
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find(" = ");
    if (eq == std::string::npos) continue;
    out[line.substr(0, eq)] = line.substr(eq + 3);
  }
  return out;
}

void CompareRuns(const std::vector<fs::path>& run_dirs, std::ostream& out, const fs::path& csv_dir) {
  if (run_dirs.size() < 2) throw ConfigError("compare needs at least two run directories");
  std::vector<std::map<std::string, std::string>> summaries;
  for (const auto& dir : run_dirs) summaries.push_back(ReadSummary(dir));
  const std::string& hash = Required(summaries[0], "dataset_hash", run_dirs[0]);
  for (std::size_t r = 1; r < summaries.size(); ++r) {
    if (Required(summaries[r], "dataset_hash", run_dirs[r]) != hash) {
      throw CompareError("runs " + run_dirs[0].string() + " and " + run_dirs[r].string() +
                         " use different datasets");
    }
  }
  std::vector<std::string> names;
  for (std::size_t r = 0; r < summaries.size(); ++r) names.push_back(DisplayName(Required(summaries[r], "method", run_dirs[r])));
  const std::vector<std::string> bases = names;
  for (std::size_t r = 0; r < names.size(); ++r) {
    if (std::count(bases.begin(), bases.end(), bases[r]) > 1) {
      names[r] = bases[r] + " [" + run_dirs[r].filename().string() + "]";
    }
  }

  std::vector<RunSummary> runs;
  bool all_labels = true;
  bool any_heldout = false;
  for (std::size_t r = 0; r < summaries.size(); ++r) {
    const auto& s = summaries[r];
    RunSummary run;
    run.method = names[r];
    run.log_map = ParseDouble(Required(s, "log_map", run_dirs[r]));
    run.upper_bound = OptionalValue(s, "upper_bound");
    run.seconds = OptionalValue(s, "runtime_seconds").value_or(0.0);
    run.certificate = Required(s, "certificate", run_dirs[r]);
    run.gap = OptionalValue(s, "gap");
    run.heldout_loglik = OptionalValue(s, "heldout_loglik");
    run.perplexity = OptionalValue(s, "perplexity");
    any_heldout = any_heldout || run.perplexity.has_value();
    if (fs::exists(run_dirs[r] / "labels.csv")) {
      run.labels = ReadLabelsCsv(run_dirs[r] / "labels.csv");
    } else {
      all_labels = false;
    }
    runs.push_back(std::move(run));
  }
  if (!csv_dir.empty()) fs::create_directories(csv_dir);

  if (all_labels) Emit(out, csv_dir, "Variation of information", "voi.csv", runs, VoiTable);
  Emit(out, csv_dir, "Log MAP (upper bound)", "log_map.csv", runs, LogMapTable);
  Emit(out, csv_dir, "Runtime and certificate", "runtime.csv", runs, RuntimeTable);
  if (any_heldout) Emit(out, csv_dir, "Held-out log-likelihood and perplexity", "perplexity.csv", runs, PerplexityTable);

  bool all_topics = true;
  for (const auto& dir : run_dirs) all_topics = all_topics && fs::exists(dir / "top_words.csv");
  if (all_topics) {
    Table table;
    table.header.push_back("rank");
    std::vector<std::vector<std::string>> columns;
    for (std::size_t r = 0; r < run_dirs.size(); ++r) {
      auto topics = ReadTopWords(run_dirs[r] / "top_words.csv");
      std::vector<std::size_t> order(topics.size());
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t a, std::size_t b) { return topics[a].prevalence > topics[b].prevalence; });
      for (std::size_t slot = 0; slot < std::min<std::size_t>(2, order.size()); ++slot) {
        table.header.push_back(names[r] + " topic " + std::to_string(slot + 1));
        columns.push_back(topics[order[slot]].words);
      }
    }
    std::size_t depth = 0;
    for (const auto& c : columns) depth = std::max(depth, c.size());
    for (std::size_t i = 0; i < depth; ++i) {
      std::vector<std::string> row = {std::to_string(i + 1)};
      for (const auto& c : columns) row.push_back(i < c.size() ? c[i] : "");
      table.rows.push_back(std::move(row));
    }
    out << "Top words of the two most prevalent topics\n" << table.ToText() << "\n";
    if (!csv_dir.empty()) WriteText(csv_dir / "top_words.csv", table.ToCsv());
  }
}

}  // namespace gbdmap
