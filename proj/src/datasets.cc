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

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <random>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "gbdmap/data.h"
#include "gbdmap/errors.h"

namespace gbdmap {
namespace {

std::string Trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::vector<std::string> SplitFields(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(Trim(std::string_view(line).substr(start, comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

bool ParseNumber(const std::string& s, double& value) {
  if (s.empty()) return false;
  char* end = nullptr;
  value = std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size();
}

std::string NormalizeName(std::string s) {
  for (char& c : s) c = (c == ' ' || c == '-') ? '_' : static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

std::uint64_t BoundedDraw(std::mt19937_64& rng, std::uint64_t range) {
  const std::uint64_t limit = std::mt19937_64::max() - std::mt19937_64::max() % range;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % range;
}

const std::vector<std::vector<std::string>>& NewsThemes() {
  static const std::vector<std::vector<std::string>> themes = {
      {"space", "orbit", "nasa", "launch", "shuttle", "moon", "satellite", "rocket", "mission", "earth",
       "planet", "solar", "lunar", "station", "astronaut", "spacecraft", "telescope", "mars", "payload",
       "gravity", "jupiter", "probe", "altitude", "comet", "propulsion", "thrust"},
      {"hockey", "game", "team", "season", "player", "playoff", "goal", "league", "puck", "ice", "coach",
       "score", "fans", "period", "rink", "penalty", "draft", "wings", "leafs", "bruins", "rangers",
       "skate", "goalie", "overtime", "series", "stanley"},
      {"windows", "file", "drive", "disk", "program", "software", "card", "memory", "driver", "monitor",
       "video", "graphics", "version", "code", "image", "server", "display", "keyboard", "mouse",
       "modem", "unix", "printer", "bios", "scsi", "controller", "machine"},
      {"god", "jesus", "church", "bible", "christian", "faith", "belief", "truth", "religion", "heaven",
       "moral", "scripture", "christ", "prayer", "spirit", "atheist", "argument", "soul", "doctrine",
       "lord", "sin", "worship", "gospel", "prophet", "holy", "divine"},
      {"car", "engine", "speed", "dealer", "brake", "wheel", "mile", "ford", "tire", "oil", "gear",
       "transmission", "fuel", "price", "insurance", "road", "vehicle", "honda", "toyota", "clutch",
       "battery", "highway", "auto", "seat", "warranty", "mechanic"},
      {"doctor", "patient", "disease", "medical", "treatment", "health", "drug", "pain", "study",
       "cancer", "diet", "food", "symptom", "clinic", "infection", "therapy", "blood", "vitamin",
       "research", "hospital", "diagnosis", "physician", "surgery", "chronic", "dose", "virus"},
      {"government", "law", "president", "state", "gun", "country", "federal", "crime", "policy",
       "court", "police", "weapon", "tax", "congress", "vote", "bill", "clinton", "rights", "citizen",
       "administration", "election", "liberty", "constitution", "military", "war", "senate"},
      {"key", "encryption", "clipper", "security", "privacy", "algorithm", "escrow", "secret", "cipher",
       "bit", "message", "crypto", "nsa", "chip", "wiretap", "password", "protocol", "signature",
       "des", "rsa", "agency", "scheme", "attack", "hash", "trust", "keys"},
  };
  return themes;
}

const std::vector<std::string>& NewsFiller() {
  static const std::vector<std::string> filler = {
      "time", "people", "work", "thing", "year", "way", "day", "question", "problem", "point",
      "number", "place", "information", "reason", "idea", "part", "case", "fact", "week", "group",
      "article", "post", "list", "mail", "news", "reply", "address", "opinion"};
  return filler;
}

const std::vector<std::string>& FillerStopwords() {
  static const std::vector<std::string> words = {"the", "of", "and", "to", "a", "in", "is", "that",
                                                 "it", "for", "on", "with", "as", "this", "be", "I",
                                                 "are", "you", "not", "have"};
  return words;
}

}  // namespace

std::string DatasetSpec::Recipe() const {
  if (!transform.empty()) return transform;
  if (name == "iris") return "pca3";
  if (name == "wine") return "pca6";
  if (name == "brca") return "brca3";
  return "raw";
}

CsvTable ParseCsv(const std::string& text) {
  CsvTable table;
  std::vector<std::vector<double>> rows;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  std::size_t width = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (Trim(line).empty()) continue;
    const auto fields = SplitFields(line);
    std::vector<double> row(fields.size());
    bool numeric = true;
    for (std::size_t j = 0; j < fields.size(); ++j) numeric = ParseNumber(fields[j], row[j]) && numeric;
    if (width == 0) width = fields.size();
    if (fields.size() != width) {
      throw DataError("line " + std::to_string(line_no) + " has " + std::to_string(fields.size()) +
                      " fields, expected " + std::to_string(width));
    }
    if (!numeric) {
      if (rows.empty() && table.header.empty()) {
        table.header = fields;
        continue;
      }
      throw DataError("line " + std::to_string(line_no) + " has a non-numeric field");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw DataError("CSV has no data rows");
  table.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(width));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < width; ++j) table.values(i, j) = rows[i][j];
  }
  return table;
}

Eigen::MatrixXd Pca::Project(const Eigen::MatrixXd& x) const {
  return (x.rowwise() - mean.transpose()) * components;
}

Pca FitPca(const Eigen::MatrixXd& x, int components) {
  if (components < 1 || components > x.cols()) {
    throw DataError("cannot take " + std::to_string(components) + " components of " +
                    std::to_string(x.cols()) + " columns");
  }
  if (x.rows() < 2) throw DataError("PCA needs at least two rows");
  Pca pca;
  pca.mean = x.colwise().mean().transpose();
  const Eigen::MatrixXd centered = x.rowwise() - pca.mean.transpose();
  const Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(x.rows() - 1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  const Eigen::Index d = x.cols();
  pca.components.resize(d, components);
  pca.variances.resize(components);
  for (int c = 0; c < components; ++c) {
    Eigen::VectorXd v = eig.eigenvectors().col(d - 1 - c);
    Eigen::Index lead = 0;
    for (Eigen::Index j = 1; j < d; ++j) {
      if (std::abs(v(j)) > std::abs(v(lead)) + 1e-12) lead = j;
    }
    if (v(lead) < 0) v = -v;
    pca.components.col(c) = v;
    pca.variances(c) = eig.eigenvalues()(d - 1 - c);
  }
  return pca;
}

Eigen::MatrixXd Standardize(const Eigen::MatrixXd& x) {
  Eigen::MatrixXd out = x;
  const double n = static_cast<double>(x.rows());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const double mean = x.col(j).sum() / n;
    out.col(j).array() -= mean;
    const double var = out.col(j).squaredNorm() / n;
    if (!(var > 0.0)) throw DataError("column " + std::to_string(j) + " is constant");
    out.col(j) /= std::sqrt(var);
  }
  return out;
}

std::string TabularToCsv(const TabularData& data) {
  std::string out;
  for (std::size_t j = 0; j < data.columns.size(); ++j) out += (j ? "," : "") + data.columns[j];
  if (!data.labels.empty()) out += data.columns.empty() ? "label" : ",label";
  out += '\n';
  char buf[40];
  for (Eigen::Index i = 0; i < data.x.rows(); ++i) {
    for (Eigen::Index j = 0; j < data.x.cols(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", data.x(i, j));
      if (j) out += ',';
      out += buf;
    }
    if (!data.labels.empty()) out += "," + std::to_string(data.labels[static_cast<std::size_t>(i)]);
    out += '\n';
  }
  return out;
}

TabularData ApplyRecipe(const CsvTable& table, const std::string& recipe) {
  std::vector<std::string> names = table.header;
  if (names.empty()) {
    for (Eigen::Index j = 0; j < table.values.cols(); ++j) names.push_back("x" + std::to_string(j + 1));
  }
  for (auto& n : names) n = NormalizeName(n);
  TabularData out;
  std::vector<Eigen::Index> feature_cols;
  for (Eigen::Index j = 0; j < table.values.cols(); ++j) {
    if (names[j] == "label") {
      out.labels.resize(static_cast<std::size_t>(table.values.rows()));
      for (Eigen::Index i = 0; i < table.values.rows(); ++i) {
        out.labels[i] = static_cast<int>(std::lround(table.values(i, j)));
      }
    } else {
      feature_cols.push_back(j);
    }
  }
  Eigen::MatrixXd features(table.values.rows(), static_cast<Eigen::Index>(feature_cols.size()));
  for (std::size_t c = 0; c < feature_cols.size(); ++c) features.col(c) = table.values.col(feature_cols[c]);

  if (recipe == "raw") {
    out.x = features;
    for (Eigen::Index c : feature_cols) out.columns.push_back(names[c]);
  } else if (recipe == "pca3" || recipe == "pca6") {
    const int r = recipe == "pca3" ? 3 : 6;
    out.x = FitPca(features, r).Project(features);
    for (int c = 0; c < r; ++c) out.columns.push_back("pc" + std::to_string(c + 1));
  } else if (recipe == "brca3") {
    const std::vector<std::string> wanted = {"worst_area", "worst_smoothness", "mean_texture"};
    Eigen::MatrixXd picked(table.values.rows(), 3);
    for (int c = 0; c < 3; ++c) {
      const auto it = std::find(names.begin(), names.end(), wanted[c]);
      if (it == names.end()) throw DataError("column " + wanted[c] + " not found");
      picked.col(c) = table.values.col(it - names.begin());
    }
    out.x = Standardize(picked);
    out.columns = wanted;
  } else {
    throw ConfigError("unknown transform '" + recipe + "'");
  }
  out.content_hash = Sha256Hex(TabularToCsv(out));
  return out;
}

TabularData GeneratePlantedMixture(const SyntheticSpec& spec) {
  if (spec.n < 1 || spec.k < 1 || spec.d < 1) throw ConfigError("synthetic n, k and d must be positive");
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  TabularData out;
  out.x.resize(spec.n, spec.d);
  out.labels.resize(static_cast<std::size_t>(spec.n));
  for (int i = 0; i < spec.n; ++i) {
    const int label = i % spec.k;
    out.labels[i] = label + 1;
    for (int j = 0; j < spec.d; ++j) {
      const double center = (j == label % spec.d) ? spec.separation * (1 + label / spec.d) : 0.0;
      out.x(i, j) = center + noise(rng);
    }
  }
  for (int j = 0; j < spec.d; ++j) out.columns.push_back("x" + std::to_string(j + 1));
  out.content_hash = Sha256Hex(TabularToCsv(out));
  return out;
}

TabularData LoadTabular(const DatasetSpec& spec) {
  if (spec.name == "synthetic") {
    TabularData data = GeneratePlantedMixture(spec.synthetic);
    if (spec.Recipe() == "raw") return data;
    CsvTable table;
    table.header = data.columns;
    table.header.push_back("label");
    table.values.resize(data.x.rows(), data.x.cols() + 1);
    table.values.leftCols(data.x.cols()) = data.x;
    for (Eigen::Index i = 0; i < data.x.rows(); ++i) table.values(i, data.x.cols()) = data.labels[i];
    return ApplyRecipe(table, spec.Recipe());
  }
  return ApplyRecipe(ParseCsv(ReadSource(spec)), spec.Recipe());
}

bool IsStopword(std::string_view word) {
  static const std::unordered_set<std::string_view> stop = {
      "a", "about", "above", "after", "again", "against", "all", "am", "an", "and", "any", "are",
      "as", "at", "be", "because", "been", "before", "being", "below", "between", "both", "but",
      "by", "can", "could", "did", "do", "does", "doing", "don", "down", "during", "each", "few",
      "for", "from", "further", "had", "has", "have", "having", "he", "her", "here", "hers",
      "herself", "him", "himself", "his", "how", "if", "in", "into", "is", "it", "its", "itself",
      "just", "me", "might", "more", "most", "must", "my", "myself", "no", "nor", "not", "now", "of",
      "off", "on", "once", "only", "or", "other", "our", "ours", "ourselves", "out", "over", "own",
      "re", "same", "she", "should", "so", "some", "such", "than", "that", "the", "their", "theirs",
      "them", "themselves", "then", "there", "these", "they", "this", "those", "through", "to",
      "too", "under", "until", "up", "ve", "very", "was", "we", "were", "what", "when", "where",
      "which", "while", "who", "whom", "why", "will", "with", "would", "you", "your", "yours",
      "yourself", "yourselves", "also", "one", "get", "like", "know", "think", "use", "said", "may",
      "much", "many", "well", "even", "make", "see", "say", "going", "want", "way", "anyone",
      "something", "anything", "really", "does", "let", "ll", "got"};
  return stop.count(word) > 0;
}

std::vector<std::string> Tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string word;
  auto flush = [&] {
    if (word.size() >= 2 && !IsStopword(word)) out.push_back(word);
    word.clear();
  };
  for (char c : text) {
    const auto u = static_cast<unsigned char>(c);
    if (u < 128 && std::isalpha(u)) {
      word += static_cast<char>(std::tolower(u));
    } else {
      flush();
    }
  }
  flush();
  return out;
}

std::vector<std::string> SplitLines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!Trim(line).empty()) out.push_back(line);
  }
  return out;
}

void SeededShuffle(std::vector<std::size_t>& items, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  for (std::size_t i = items.size(); i > 1; --i) {
    std::swap(items[i - 1], items[BoundedDraw(rng, i)]);
  }
}

CorpusBuild BuildCorpus(const std::vector<std::string>& raw_docs, int n_docs, int vocab_size,
                        std::uint64_t seed) {
  if (n_docs < 1) throw ConfigError("n_docs must be positive");
  if (vocab_size < 1) throw ConfigError("vocab_size must be positive");
  CorpusBuild build;
  std::vector<std::vector<std::string>> tokens(raw_docs.size());
  std::vector<std::size_t> candidates;
  for (std::size_t d = 0; d < raw_docs.size(); ++d) {
    tokens[d] = Tokenize(raw_docs[d]);
    if (!tokens[d].empty()) candidates.push_back(d);
  }
  if (candidates.size() < static_cast<std::size_t>(n_docs)) {
    build.warnings.push_back("requested " + std::to_string(n_docs) + " documents but only " +
                             std::to_string(candidates.size()) + " are nonempty");
  }
  SeededShuffle(candidates, seed);
  candidates.resize(std::min(candidates.size(), static_cast<std::size_t>(n_docs)));
  std::sort(candidates.begin(), candidates.end());

  std::map<std::string, long> counts;
  for (std::size_t d : candidates) {
    for (const auto& w : tokens[d]) ++counts[w];
  }
  std::vector<std::pair<std::string, long>> ranked(counts.begin(), counts.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  ranked.resize(std::min(ranked.size(), static_cast<std::size_t>(vocab_size)));
  std::unordered_map<std::string, int> index;
  for (const auto& [w, c] : ranked) {
    index.emplace(w, static_cast<int>(build.corpus.vocab.size()));
    build.corpus.vocab.push_back(w);
  }
  for (std::size_t d : candidates) {
    std::vector<int> doc;
    for (const auto& w : tokens[d]) {
      if (auto it = index.find(w); it != index.end()) doc.push_back(it->second);
    }
    if (doc.empty()) {
      build.warnings.push_back("document " + std::to_string(d) + " is empty after vocabulary filtering; dropped");
      continue;
    }
    build.corpus.docs.push_back(std::move(doc));
    build.source_docs.push_back(d);
  }
  return build;
}

std::vector<std::string> GenerateNewsSurrogate(int n_docs, std::uint64_t seed) {
  const auto& themes = NewsThemes();
  const auto& filler = NewsFiller();
  const auto& stop = FillerStopwords();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto zipf = [&](const std::vector<std::string>& words) -> const std::string& {
    double total = 0.0;
    for (std::size_t r = 0; r < words.size(); ++r) total += 1.0 / (r + 1.0);
    double u = unit(rng) * total;
    for (std::size_t r = 0; r < words.size(); ++r) {
      u -= 1.0 / (r + 1.0);
      if (u <= 0.0) return words[r];
    }
    return words.back();
  };
  std::vector<std::string> docs;
  docs.reserve(static_cast<std::size_t>(n_docs));
  for (int d = 0; d < n_docs; ++d) {
    const std::size_t primary = BoundedDraw(rng, themes.size());
    const std::size_t secondary = BoundedDraw(rng, themes.size());
    const int length = 30 + static_cast<int>(BoundedDraw(rng, 91));
    std::string text;
    bool sentence_start = true;
    for (int t = 0; t < length; ++t) {
      std::string word;
      const double u = unit(rng);
      if (u < 0.3) {
        word = stop[BoundedDraw(rng, stop.size())];
      } else if (u < 0.8) {
        word = zipf(themes[primary]);
      } else if (u < 0.92) {
        word = zipf(themes[secondary]);
      } else {
        word = filler[BoundedDraw(rng, filler.size())];
      }
      if (sentence_start) word[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(word[0])));
      text += word;
      sentence_start = unit(rng) < 0.08;
      text += sentence_start ? ". " : " ";
    }
    docs.push_back(Trim(text));
  }
  return docs;
}

std::vector<std::string> LoadRawDocuments(const DatasetSpec& spec, std::vector<std::string>* warnings) {
  if (spec.source.empty()) {
    if (warnings) warnings->push_back("no corpus source configured; using the generated newsgroup surrogate");
    return GenerateNewsSurrogate(2000, spec.synthetic.seed);
  }
  return SplitLines(ReadSource(spec));
}

Corpus GeneratePlantedCorpus(int n_docs, int doc_length, int vocab_size, std::uint64_t seed,
                             std::vector<int>* doc_topic) {
  if (n_docs < 1 || doc_length < 1 || vocab_size < 2) throw ConfigError("bad planted corpus shape");
  std::mt19937_64 rng(seed);
  Corpus corpus;
  char buf[16];
  for (int w = 0; w < vocab_size; ++w) {
    std::snprintf(buf, sizeof(buf), "w%03d", w);
    corpus.vocab.push_back(buf);
  }
  const int half = vocab_size / 2;
  if (doc_topic) doc_topic->clear();
  for (int d = 0; d < n_docs; ++d) {
    const int topic = d % 2;
    const int lo = topic == 0 ? 0 : half;
    const int width = topic == 0 ? half : vocab_size - half;
    std::vector<int> doc(static_cast<std::size_t>(doc_length));
    for (int& w : doc) w = lo + static_cast<int>(BoundedDraw(rng, static_cast<std::uint64_t>(width)));
    corpus.docs.push_back(std::move(doc));
    if (doc_topic) doc_topic->push_back(topic);
  }
  return corpus;
}

std::string CorpusDocsText(const Corpus& corpus) {
  std::string out;
  for (const auto& doc : corpus.docs) {
    for (std::size_t n = 0; n < doc.size(); ++n) {
      if (n) out += ' ';
      out += corpus.vocab[static_cast<std::size_t>(doc[n])];
    }
    out += '\n';
  }
  return out;
}

std::string CorpusVocabText(const Corpus& corpus) {
  std::string out;
  for (const auto& w : corpus.vocab) out += w + '\n';
  return out;
}

Corpus ParseCorpus(const std::string& docs_text, const std::string& vocab_text) {
  Corpus corpus;
  std::unordered_map<std::string, int> index;
  for (const auto& line : SplitLines(vocab_text)) {
    const std::string w = Trim(line);
    if (!index.emplace(w, static_cast<int>(corpus.vocab.size())).second) {
      throw DataError("duplicate vocabulary word '" + w + "'");
    }
    corpus.vocab.push_back(w);
  }
  for (const auto& line : SplitLines(docs_text)) {
    std::istringstream in(line);
    std::vector<int> doc;
    std::string w;
    while (in >> w) {
      const auto it = index.find(w);
      if (it == index.end()) throw DataError("word '" + w + "' is not in the vocabulary");
      doc.push_back(it->second);
    }
    corpus.docs.push_back(std::move(doc));
  }
  return corpus;
}

HeldOutSplit SplitHeldOut(const Corpus& corpus, double train_frac, std::uint64_t seed) {
  if (!(train_frac > 0.0 && train_frac < 1.0)) throw ConfigError("train_frac must lie in (0, 1)");
  const std::size_t m = corpus.docs.size();
  std::vector<std::size_t> order(m);
  for (std::size_t d = 0; d < m; ++d) order[d] = d;
  SeededShuffle(order, seed);
  const auto n_train = static_cast<std::size_t>(std::llround(train_frac * static_cast<double>(m)));
  std::vector<std::size_t> train(order.begin(), order.begin() + std::min(n_train, m));
  std::vector<std::size_t> test(order.begin() + std::min(n_train, m), order.end());
  std::sort(train.begin(), train.end());
  std::sort(test.begin(), test.end());

  HeldOutSplit split;
  split.train.vocab = corpus.vocab;
  for (std::size_t d : train) split.train.docs.push_back(corpus.docs[d]);
  for (std::size_t d : test) {
    const auto& doc = corpus.docs[d];
    if (doc.size() < 2) {
      split.warnings.push_back("test document " + std::to_string(d) + " has fewer than 2 tokens; dropped");
      continue;
    }
    const std::size_t half = (doc.size() + 1) / 2;
    split.fold_in.emplace_back(doc.begin(), doc.begin() + static_cast<std::ptrdiff_t>(half));
    split.evaluate.emplace_back(doc.begin() + static_cast<std::ptrdiff_t>(half), doc.end());
    split.test_docs.push_back(d);
  }
  return split;
}

}  // namespace gbdmap
