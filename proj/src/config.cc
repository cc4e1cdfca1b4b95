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

#include "gbdmap/config.h"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "gbdmap/errors.h"

namespace gbdmap {
namespace {
namespace pt = boost::property_tree;

const std::map<std::string, std::set<std::string>>& Schema() {
  static const std::map<std::string, std::set<std::string>> schema = {
      {"run", {"seed", "output_dir"}},
      {"dataset", {"name", "source", "sha256", "transform", "cache_dir", "seed", "n", "k", "d", "separation"}},
      {"model", {"type", "k"}},
      {"method", {"name", "latent_file"}},
      {"prior", {"alpha", "beta0", "mu0", "w0_scale", "nu0", "eta"}},
      {"constraints", {"must_link", "cannot_link", "file", "min_size"}},
      {"solver",
       {"epsilon", "max_iterations", "time_limit", "master_time_limit", "node_limit", "dual_iterations",
        "warm_start", "warm_start_file", "warm_start_sweeps", "anchor_labels"}},
      {"gibbs", {"iterations", "burn_in", "thin", "mode_scale"}},
      {"lda", {"n_docs", "vocab_size", "train_frac"}},
  };
  return schema;
}

std::string Trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  return s.substr(b, s.find_last_not_of(" \t") - b + 1);
}

double ToDouble(const std::string& key, const std::string& raw) {
  const std::string s = Trim(raw);
  if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size() || std::isnan(v)) {
    throw ConfigError(key + ": '" + raw + "' is not a number");
  }
  return v;
}

long long ToInteger(const std::string& key, const std::string& raw) {
  const std::string s = Trim(raw);
  long long v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw ConfigError(key + ": '" + raw + "' is not an integer");
  }
  return v;
}

bool ToBool(const std::string& key, const std::string& raw) {
  const std::string s = Trim(raw);
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw ConfigError(key + ": '" + raw + "' is not a boolean");
}

std::vector<std::string> SplitList(const std::string& raw) {
  std::vector<std::string> out;
  std::stringstream in(raw);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = Trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<PairConstraint> ParsePairList(const std::string& key, const std::string& raw, PairKind kind) {
  std::vector<PairConstraint> out;
  for (const auto& item : SplitList(raw)) {
    const auto dash = item.find('-');
    if (dash == std::string::npos) throw ConfigError(key + ": expected i-j pairs, got '" + item + "'");
    const long long i = ToInteger(key, item.substr(0, dash));
    const long long j = ToInteger(key, item.substr(dash + 1));
    if (i < 1 || j < 1) throw ConfigError(key + ": indices are one-based");
    out.push_back({kind, static_cast<int>(i - 1), static_cast<int>(j - 1)});
  }
  return out;
}

std::string Num(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string PairList(const std::vector<PairConstraint>& pairs, PairKind kind) {
  std::string out;
  for (const auto& p : pairs) {
    if (p.kind != kind) continue;
    if (!out.empty()) out += ", ";
    out += std::to_string(p.i + 1) + "-" + std::to_string(p.j + 1);
  }
  return out;
}

std::string ReadText(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace

std::vector<PairConstraint> ParsePairCsv(const std::string& text) {
  std::vector<PairConstraint> out;
  std::istringstream in(text);
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (Trim(line).empty()) continue;
    const auto cells = SplitList(line);
    if (cells.size() != 3) throw ConfigError("constraint row '" + line + "' needs kind,i,j");
    const bool header = first && cells[0] == "kind";
    first = false;
    if (header) continue;
    PairKind kind;
    if (cells[0] == "must_link" || cells[0] == "must") {
      kind = PairKind::kMustLink;
    } else if (cells[0] == "cannot_link" || cells[0] == "cannot") {
      kind = PairKind::kCannotLink;
    } else {
      throw ConfigError("unknown constraint kind '" + cells[0] + "'");
    }
    const long long i = ToInteger("constraint", cells[1]);
    const long long j = ToInteger("constraint", cells[2]);
    if (i < 1 || j < 1) throw ConfigError("constraint indices are one-based");
    out.push_back({kind, static_cast<int>(i - 1), static_cast<int>(j - 1)});
  }
  return out;
}

RunConfig RunConfig::Parse(const std::string& text, const std::filesystem::path& base_dir) {
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config syntax: ") + e.what());
  }
  // read_ini drops sections without keys.
  std::istringstream lines(text);
  for (std::string line; std::getline(lines, line);) {
    line = Trim(line);
    if (line.size() > 1 && line.front() == '[' && line.back() == ']' &&
        !Schema().count(Trim(line.substr(1, line.size() - 2)))) {
      throw ConfigError("unknown section " + line);
    }
  }
  for (const auto& [section, body] : tree) {
    const auto it = Schema().find(section);
    if (it == Schema().end()) throw ConfigError("unknown section [" + section + "]");
    if (body.empty() && !body.data().empty()) throw ConfigError("key '" + section + "' outside a section");
    for (const auto& [key, value] : body) {
      if (!it->second.count(key)) throw ConfigError("unknown key " + section + "." + key);
    }
  }

  RunConfig c;
  c.base_dir = base_dir;
  auto get = [&](const std::string& path) -> std::optional<std::string> {
    if (auto v = tree.get_optional<std::string>(pt::ptree::path_type(path, '.'))) return Trim(*v);
    return std::nullopt;
  };
  auto integer = [&](const std::string& path, auto& field) {
    if (auto v = get(path)) field = static_cast<std::remove_reference_t<decltype(field)>>(ToInteger(path, *v));
  };
  auto real = [&](const std::string& path, double& field) {
    if (auto v = get(path)) field = ToDouble(path, *v);
  };
  auto text_field = [&](const std::string& path, std::string& field) {
    if (auto v = get(path)) field = *v;
  };

  if (auto v = get("run.seed")) {
    const long long s = ToInteger("run.seed", *v);
    if (s < 0) throw ConfigError("run.seed must be nonnegative");
    c.seed = static_cast<std::uint64_t>(s);
  }
  if (auto v = get("run.output_dir"); v && !v->empty()) c.output_dir = c.Resolve(*v);

  text_field("dataset.name", c.dataset.name);
  text_field("dataset.source", c.dataset.source);
  text_field("dataset.sha256", c.dataset.sha256);
  text_field("dataset.transform", c.dataset.transform);
  if (auto v = get("dataset.cache_dir"); v && !v->empty()) c.dataset.cache_dir = *v;
  if (auto v = get("dataset.seed")) {
    const long long s = ToInteger("dataset.seed", *v);
    if (s < 0) throw ConfigError("dataset.seed must be nonnegative");
    c.data_seed = static_cast<std::uint64_t>(s);
  }
  integer("dataset.n", c.dataset.synthetic.n);
  integer("dataset.k", c.dataset.synthetic.k);
  integer("dataset.d", c.dataset.synthetic.d);
  real("dataset.separation", c.dataset.synthetic.separation);
  c.dataset.synthetic.seed = c.data_seed;

  text_field("model.type", c.model);
  integer("model.k", c.k);
  text_field("method.name", c.method);
  text_field("method.latent_file", c.latent_file);

  if (auto v = get("prior.alpha")) c.prior.alpha = ToDouble("prior.alpha", *v);
  real("prior.beta0", c.prior.beta0);
  if (auto v = get("prior.mu0"); v && *v != "mean") {
    std::vector<double> mu;
    for (const auto& item : SplitList(*v)) mu.push_back(ToDouble("prior.mu0", item));
    c.prior.mu0 = mu;
  }
  real("prior.w0_scale", c.prior.w0_scale);
  if (auto v = get("prior.nu0"); v && *v != "auto") c.prior.nu0 = ToDouble("prior.nu0", *v);
  real("prior.eta", c.prior.eta);

  if (auto v = get("constraints.must_link")) {
    for (const auto& p : ParsePairList("constraints.must_link", *v, PairKind::kMustLink)) c.pairs.push_back(p);
  }
  if (auto v = get("constraints.cannot_link")) {
    for (const auto& p : ParsePairList("constraints.cannot_link", *v, PairKind::kCannotLink)) c.pairs.push_back(p);
  }
  if (auto v = get("constraints.file"); v && !v->empty()) {
    for (const auto& p : ParsePairCsv(ReadText(c.Resolve(*v)))) c.pairs.push_back(p);
  }
  integer("constraints.min_size", c.min_cluster_size);

  real("solver.epsilon", c.solver.epsilon);
  integer("solver.max_iterations", c.solver.max_iterations);
  real("solver.time_limit", c.solver.time_limit);
  real("solver.master_time_limit", c.solver.master_time_limit);
  if (auto v = get("solver.node_limit")) {
    const long long n = ToInteger("solver.node_limit", *v);
    if (n < 1) throw ConfigError("solver.node_limit must be positive");
    c.solver.node_limit = static_cast<std::size_t>(n);
  }
  integer("solver.dual_iterations", c.solver.dual_iterations);
  text_field("solver.warm_start", c.solver.warm_start);
  text_field("solver.warm_start_file", c.solver.warm_start_file);
  integer("solver.warm_start_sweeps", c.solver.warm_start_sweeps);
  if (auto v = get("solver.anchor_labels")) c.solver.anchor_labels = ToBool("solver.anchor_labels", *v);

  integer("gibbs.iterations", c.gibbs.iterations);
  integer("gibbs.burn_in", c.gibbs.burn_in);
  integer("gibbs.thin", c.gibbs.thin);
  integer("gibbs.mode_scale", c.mode.scale);

  integer("lda.n_docs", c.corpus.n_docs);
  integer("lda.vocab_size", c.corpus.vocab_size);
  real("lda.train_frac", c.corpus.train_frac);

  c.Validate();
  return c;
}

RunConfig RunConfig::Load(const std::filesystem::path& path) {
  return Parse(ReadText(path), path.parent_path());
}

std::filesystem::path RunConfig::Resolve(const std::string& path) const {
  const std::filesystem::path p(path);
  if (p.is_absolute() || base_dir.empty()) return p;
  return base_dir / p;
}

void RunConfig::Validate() const {
  static const std::set<std::string> tabular = {"iris", "wine", "brca", "synthetic"};
  if (model != "bgmm" && model != "lda") throw ConfigError("model.type must be bgmm or lda");
  if (k < 1) throw ConfigError("model.k must be positive");
  if (model == "bgmm" && !tabular.count(dataset.name)) {
    throw ConfigError("dataset.name '" + dataset.name + "' is not a tabular dataset");
  }
  if (model == "lda" && dataset.name != "news20") throw ConfigError("lda runs need dataset.name = news20");
  if (tabular.count(dataset.name) && dataset.name != "synthetic" && dataset.source.empty()) {
    throw ConfigError("dataset.source is required for " + dataset.name);
  }
  if (dataset.name == "synthetic") {
    const auto& s = dataset.synthetic;
    if (s.n < 1 || s.k < 1 || s.d < 1) throw ConfigError("dataset n, k and d must be positive");
    if (!(s.separation >= 0.0) || std::isinf(s.separation)) throw ConfigError("dataset.separation must be finite");
  }
  if (method != "gbd" && method != "gibbs" && method != "eval-only") {
    throw ConfigError("method.name must be gbd, gibbs or eval-only");
  }
  if (method == "eval-only" && latent_file.empty()) throw ConfigError("eval-only needs method.latent_file");
  if (prior.alpha && !(*prior.alpha > 0.0 && std::isfinite(*prior.alpha))) {
    throw ConfigError("prior.alpha must be positive");
  }
  if (!(prior.beta0 > 0.0 && std::isfinite(prior.beta0))) throw ConfigError("prior.beta0 must be positive");
  if (!(prior.w0_scale > 0.0 && std::isfinite(prior.w0_scale))) throw ConfigError("prior.w0_scale must be positive");
  if (prior.nu0 && !std::isfinite(*prior.nu0)) throw ConfigError("prior.nu0 must be finite");
  if (!(prior.eta > 0.0 && std::isfinite(prior.eta))) throw ConfigError("prior.eta must be positive");
  if (!pairs.empty() || min_cluster_size != 0) {
    if (model != "bgmm") throw ConfigError("constraints apply to bgmm runs only");
    if (method == "gibbs") throw ConfigError("the gibbs method does not support constraints");
  }
  if (min_cluster_size < 0) throw ConfigError("constraints.min_size must be nonnegative");
  if (!(solver.epsilon >= 0.0)) throw ConfigError("solver.epsilon must be nonnegative");
  if (solver.max_iterations < 1) throw ConfigError("solver.max_iterations must be positive");
  if (!(solver.time_limit > 0.0)) throw ConfigError("solver.time_limit must be positive");
  if (!(solver.master_time_limit > 0.0)) throw ConfigError("solver.master_time_limit must be positive");
  if (solver.dual_iterations < 1) throw ConfigError("solver.dual_iterations must be positive");
  if (solver.warm_start != "gibbs-mode" && solver.warm_start != "file" && solver.warm_start != "none") {
    throw ConfigError("solver.warm_start must be gibbs-mode, file or none");
  }
  if (solver.warm_start == "file" && solver.warm_start_file.empty()) {
    throw ConfigError("solver.warm_start = file needs solver.warm_start_file");
  }
  if (solver.warm_start_sweeps < 2) throw ConfigError("solver.warm_start_sweeps must be at least 2");
  try {
    gibbs.Validate();
  } catch (const Error& e) {
    throw ConfigError(std::string("gibbs: ") + e.what());
  }
  if (mode.scale < 1) throw ConfigError("gibbs.mode_scale must be positive");
  if (corpus.n_docs < 1) throw ConfigError("lda.n_docs must be positive");
  if (corpus.vocab_size < 1) throw ConfigError("lda.vocab_size must be positive");
  if (!(corpus.train_frac >= 0.0 && corpus.train_frac < 1.0)) throw ConfigError("lda.train_frac must lie in [0, 1)");
}

std::string RunConfig::Resolved() const {
  std::ostringstream os;
  os << "[run]\nseed = " << seed << "\n\n";
  os << "[dataset]\nname = " << dataset.name << "\nsource = " << dataset.source << "\nsha256 = " << dataset.sha256
     << "\ntransform = " << dataset.Recipe() << "\ncache_dir = " << dataset.cache_dir.string()
     << "\nseed = " << data_seed;
  if (dataset.name == "synthetic") {
    os << "\nn = " << dataset.synthetic.n << "\nk = " << dataset.synthetic.k << "\nd = " << dataset.synthetic.d
       << "\nseparation = " << Num(dataset.synthetic.separation);
  }
  os << "\n\n[model]\ntype = " << model << "\nk = " << k << "\n\n";
  os << "[method]\nname = " << method << "\nlatent_file = " << latent_file << "\n\n";
  os << "[prior]\n";
  if (model == "bgmm") {
    os << "alpha = " << Num(prior.alpha.value_or(1.0)) << "\nbeta0 = " << Num(prior.beta0) << "\nmu0 = ";
    if (prior.mu0) {
      for (std::size_t j = 0; j < prior.mu0->size(); ++j) os << (j ? ", " : "") << Num((*prior.mu0)[j]);
    } else {
      os << "mean";
    }
    os << "\nw0_scale = " << Num(prior.w0_scale) << "\nnu0 = " << (prior.nu0 ? Num(*prior.nu0) : "auto") << "\n\n";
    os << "[constraints]\nmust_link = " << PairList(pairs, PairKind::kMustLink)
       << "\ncannot_link = " << PairList(pairs, PairKind::kCannotLink) << "\nmin_size = " << min_cluster_size
       << "\n\n";
  } else {
    os << "alpha = " << Num(prior.alpha.value_or(1.0 / k)) << "\neta = " << Num(prior.eta) << "\n\n";
  }
  os << "[solver]\nepsilon = " << Num(solver.epsilon) << "\nmax_iterations = " << solver.max_iterations
     << "\ntime_limit = " << Num(solver.time_limit) << "\nmaster_time_limit = " << Num(solver.master_time_limit)
     << "\nnode_limit = " << solver.node_limit << "\ndual_iterations = " << solver.dual_iterations
     << "\nwarm_start = " << solver.warm_start << "\nwarm_start_file = " << solver.warm_start_file
     << "\nwarm_start_sweeps = " << solver.warm_start_sweeps
     << "\nanchor_labels = " << (solver.anchor_labels ? "true" : "false") << "\n\n";
  os << "[gibbs]\niterations = " << gibbs.iterations << "\nburn_in = " << gibbs.burn_in << "\nthin = " << gibbs.thin
     << "\nmode_scale = " << mode.scale << "\n";
  if (model == "lda") {
    os << "\n[lda]\nn_docs = " << corpus.n_docs << "\nvocab_size = " << corpus.vocab_size
       << "\ntrain_frac = " << Num(corpus.train_frac) << "\n";
  }
  return os.str();
}

std::string RunConfig::Hash() const { return Sha256Hex(Resolved()); }

}  // namespace gbdmap
