// Copyright 2026 The fever-pipeline Authors.
//
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

#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace fever::oracle {

namespace {

constexpr char32_t kLowerEAcute = 0xE9;
constexpr char32_t kUpperEAcute = 0xC9;
constexpr char32_t kLowerUUml = 0xFC;
constexpr char32_t kUpperUUml = 0xDC;

bool IsWordChar(char32_t c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
         c == kLowerEAcute || c == kUpperEAcute || c == kLowerUUml || c == kUpperUUml;
}

char32_t Lower(char32_t c) {
  if (c >= 'A' && c <= 'Z') return c - 'A' + 'a';
  if (c == kUpperEAcute) return kLowerEAcute;
  if (c == kUpperUUml) return kLowerUUml;
  return c;
}

char32_t Fold(char32_t c) {
  switch (c) {
    case kLowerEAcute:
      return 'e';
    case kUpperEAcute:
      return 'E';
    case kLowerUUml:
      return 'u';
    case kUpperUUml:
      return 'U';
    default:
      return c;
  }
}

std::string Encode(const std::u32string& s) {
  std::string out;
  for (char32_t c : s) {
    if (c < 0x80) {
      out.push_back(static_cast<char>(c));
    } else {
      out.push_back(static_cast<char>(0xC0 | (c >> 6)));
      out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
    }
  }
  return out;
}

double TfWeight(int tf, bool sublinear) { return sublinear ? 1.0 + std::log(tf) : tf; }

}  // namespace

std::u32string DecodeUtf8(const std::string& s) {
  std::u32string out;
  for (std::size_t i = 0; i < s.size();) {
    const auto b = static_cast<unsigned char>(s[i]);
    int len = b < 0x80 ? 1 : b < 0xE0 ? 2 : b < 0xF0 ? 3 : 4;
    char32_t c = len == 1 ? b : b & (0xFF >> (len + 1));
    for (int j = 1; j < len; ++j) c = (c << 6) | (static_cast<unsigned char>(s[i + j]) & 0x3F);
    out.push_back(c);
    i += len;
  }
  return out;
}

int Levenshtein(const std::u32string& a, const std::u32string& b) {
  std::vector<std::vector<int>> d(a.size() + 1, std::vector<int>(b.size() + 1));
  for (std::size_t i = 0; i <= a.size(); ++i) d[i][0] = static_cast<int>(i);
  for (std::size_t j = 0; j <= b.size(); ++j) d[0][j] = static_cast<int>(j);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1,
                          d[i - 1][j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
    }
  }
  return d[a.size()][b.size()];
}

DenseTfIdf::DenseTfIdf(const std::vector<std::string>& docs, const TfIdfConfig& config)
    : config_(config) {
  std::vector<std::map<std::string, int>> counts(docs.size());
  std::map<std::string, int> df;
  for (std::size_t d = 0; d < docs.size(); ++d) {
    for (const auto& t : Analyze(docs[d])) ++counts[d][t];
    for (const auto& [t, c] : counts[d]) ++df[t];
  }
  int col = 0;
  for (const auto& [t, n] : df) vocab_[t] = col++;
  idf_.resize(vocab_.size());
  const double n_docs = static_cast<double>(docs.size());
  for (const auto& [t, c] : vocab_) idf_[c] = std::log((1.0 + n_docs) / (1.0 + df[t])) + 1.0;
  weights_ = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(docs.size()), col);
  for (std::size_t d = 0; d < docs.size(); ++d) {
    for (const auto& [t, c] : counts[d]) {
      const int j = vocab_.at(t);
      weights_(static_cast<Eigen::Index>(d), j) = TfWeight(c, config.sublinear_tf) * idf_[j];
    }
    if (config.norm == TfIdfNorm::kL2) {
      double sq = 0.0;
      for (Eigen::Index j = 0; j < weights_.cols(); ++j) {
        sq += weights_(static_cast<Eigen::Index>(d), j) * weights_(static_cast<Eigen::Index>(d), j);
      }
      if (sq > 0.0) weights_.row(static_cast<Eigen::Index>(d)) /= std::sqrt(sq);
    }
  }
}

std::vector<std::string> DenseTfIdf::Analyze(const std::string& text) const {
  std::u32string chars = DecodeUtf8(text);
  if (config_.force_lowercase) {
    for (auto& c : chars) c = Lower(c);
  }
  if (config_.force_ascii) {
    for (auto& c : chars) c = Fold(c);
  }
  std::vector<std::string> tokens;
  std::u32string current;
  for (char32_t c : chars) {
    if (IsWordChar(c)) {
      current.push_back(c);
    } else if (!current.empty()) {
      tokens.push_back(Encode(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(Encode(current));
  std::vector<std::string> terms;
  for (int n = 1; n <= config_.max_ngram; ++n) {
    for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
      std::string gram = tokens[i];
      for (int j = 1; j < n; ++j) gram += " " + tokens[i + j];
      terms.push_back(gram);
    }
  }
  return terms;
}

std::vector<double> DenseTfIdf::Scores(const std::string& query) const {
  std::map<int, int> tf;
  for (const auto& t : Analyze(query)) {
    const auto it = vocab_.find(t);
    if (it != vocab_.end()) ++tf[it->second];
  }
  Eigen::VectorXd q = Eigen::VectorXd::Zero(weights_.cols());
  for (const auto& [j, c] : tf) q(j) = TfWeight(c, config_.sublinear_tf) * idf_[j];
  double sq = 0.0;
  for (Eigen::Index j = 0; j < q.size(); ++j) sq += q(j) * q(j);
  if (sq > 0.0) q /= std::sqrt(sq);
  std::vector<double> scores(static_cast<std::size_t>(weights_.rows()), 0.0);
  for (Eigen::Index d = 0; d < weights_.rows(); ++d) {
    double s = 0.0;
    for (Eigen::Index j = 0; j < q.size(); ++j) s += q(j) * weights_(d, j);
    scores[static_cast<std::size_t>(d)] = s;
  }
  return scores;
}

std::vector<std::pair<int, double>> DenseTfIdf::Ranking(const std::string& query,
                                                        int k) const {
  const auto scores = Scores(query);
  std::vector<std::pair<int, double>> ranked;
  for (std::size_t d = 0; d < scores.size(); ++d) {
    if (scores[d] > 0.0) ranked.emplace_back(static_cast<int>(d), scores[d]);
  }
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  if (ranked.size() > static_cast<std::size_t>(k)) ranked.resize(static_cast<std::size_t>(k));
  return ranked;
}

std::string RandomText(std::mt19937_64& rng, int max_tokens) {
  static const std::vector<std::string> kWords = {
      "alpha", "Alpha", "beta", "gamma", "Gamma", "delta", "omega", "river", "stone",
      "café",  "Café",  "CAFÉ", "über",  "Über",  "naive", "x1",    "42",    "1984",
      "paris", "Paris", "zeta", "theta", "kappa", "lambda", "sigma", "tau"};
  static const std::vector<std::string> kSeparators = {" ", " ", " ", ", ", ". ", "-", " (", ") "};
  std::uniform_int_distribution<int> n_tokens(0, max_tokens);
  std::uniform_int_distribution<std::size_t> word(0, kWords.size() - 1);
  std::uniform_int_distribution<std::size_t> sep(0, kSeparators.size() - 1);
  std::string out;
  const int n = n_tokens(rng);
  for (int i = 0; i < n; ++i) {
    if (i > 0) out += kSeparators[sep(rng)];
    out += kWords[word(rng)];
  }
  return out;
}

std::vector<Split> AllSplits(const Eigen::MatrixXd& x, const Eigen::VectorXd& residuals,
                             const std::vector<int>& samples) {
  auto sse = [&](const std::vector<int>& rows) {
    if (rows.empty()) return 0.0;
    double mean = 0.0;
    for (int i : rows) mean += residuals(i);
    mean /= static_cast<double>(rows.size());
    double s = 0.0;
    for (int i : rows) s += (residuals(i) - mean) * (residuals(i) - mean);
    return s;
  };
  const double parent = sse(samples);
  std::vector<Split> out;
  for (int f = 0; f < x.cols(); ++f) {
    std::set<double> values;
    for (int i : samples) values.insert(x(i, f));
    const std::vector<double> v(values.begin(), values.end());
    for (std::size_t j = 0; j + 1 < v.size(); ++j) {
      const double t = (v[j] + v[j + 1]) / 2.0;
      std::vector<int> left, right;
      for (int i : samples) (x(i, f) <= t ? left : right).push_back(i);
      out.push_back({f, t, parent - sse(left) - sse(right)});
    }
  }
  return out;
}

std::vector<std::string> CompareTreeWithOracle(const RegressionTree& tree,
                                               const Eigen::MatrixXd& x,
                                               const Eigen::VectorXd& residuals,
                                               int max_depth, double tolerance) {
  std::vector<std::string> problems;
  const auto& nodes = tree.nodes();
  struct Visit {
    int node;
    int depth;
    std::vector<int> samples;
  };
  std::vector<int> all(static_cast<std::size_t>(x.rows()));
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
  std::vector<Visit> stack = {{0, 0, all}};
  while (!stack.empty()) {
    Visit v = std::move(stack.back());
    stack.pop_back();
    const auto& node = nodes[static_cast<std::size_t>(v.node)];
    const auto splits = AllSplits(x, residuals, v.samples);
    double best = 0.0;
    for (const auto& s : splits) best = std::max(best, s.gain);
    std::ostringstream where;
    where << "node " << v.node << " (depth " << v.depth << ", " << v.samples.size()
          << " samples): ";
    if (node.is_leaf()) {
      if (v.depth < max_depth && v.samples.size() >= 2 && best > tolerance) {
        where << "leaf but the oracle finds gain " << best;
        problems.push_back(where.str());
      }
      continue;
    }
    if (std::abs(node.gain - best) > tolerance) {
      where << "gain " << node.gain << " vs oracle best " << best;
      problems.push_back(where.str());
    }
    std::vector<int> left, right;
    for (int i : v.samples) (x(i, node.feature) <= node.threshold ? left : right).push_back(i);
    // The chosen partition must be one of the optimal ones.
    bool matched = false;
    for (const auto& s : splits) {
      if (s.gain < best - tolerance) continue;
      std::vector<int> l;
      for (int i : v.samples) {
        if (x(i, s.feature) <= s.threshold) l.push_back(i);
      }
      if (l == left) matched = true;
    }
    if (!matched) {
      where << "split on feature " << node.feature << " at " << node.threshold
            << " is not an optimal partition";
      problems.push_back(where.str());
    }
    stack.push_back({node.right, v.depth + 1, std::move(right)});
    stack.push_back({node.left, v.depth + 1, std::move(left)});
  }
  return problems;
}

MicroSet MetricsMicroSet() {
  MicroSet m;
  auto group = [](std::vector<SentenceRef> refs) { return EvidenceGroup{std::move(refs)}; };
  // Right label, complete group.
  m.gold.push_back({1, "c1", Label::kSupports, {group({{"A", 0}})}});
  m.predictions.push_back({1, Label::kSupports, {{"A", 0}, {"X", 3}}, AggregationMethod::kMixed});
  // NEI, right label.
  m.gold.push_back({2, "c2", Label::kNotEnoughInfo, {}});
  m.predictions.push_back({2, Label::kNotEnoughInfo, {{"Y", 1}}, AggregationMethod::kMixed});
  // Right label, only half of the two-sentence group.
  m.gold.push_back({3, "c3", Label::kSupports, {group({{"P", 0}, {"P", 2}})}});
  m.predictions.push_back({3, Label::kSupports, {{"P", 0}, {"Q", 1}}, AggregationMethod::kMixed});
  // Wrong label, complete group.
  m.gold.push_back({4, "c4", Label::kRefutes, {group({{"D", 1}})}});
  m.predictions.push_back({4, Label::kSupports, {{"D", 1}}, AggregationMethod::kMixed});
  return m;
}

MicroSet RandomPredictionSet(std::mt19937_64& rng, int n_claims) {
  std::uniform_int_distribution<int> label(0, 2), page(0, 3), line(0, 2), count(0, 8);
  auto ref = [&] { return SentenceRef{"P" + std::to_string(page(rng)), line(rng)}; };
  MicroSet m;
  for (int c = 0; c < n_claims; ++c) {
    const auto gold_label = static_cast<Label>(label(rng));
    ClaimRecord g{c, "claim " + std::to_string(c), gold_label, {}};
    if (gold_label != Label::kNotEnoughInfo) {
      for (int k = 1 + static_cast<int>(rng() % 2); k > 0; --k) {
        EvidenceGroup group;
        for (int s = 1 + static_cast<int>(rng() % 2); s > 0; --s) group.members.push_back(ref());
        g.gold_evidence.push_back(group);
      }
    }
    ClaimVerdict p{c, static_cast<Label>(label(rng)), {}, AggregationMethod::kMixed};
    for (int e = count(rng); e > 0; --e) p.evidence.push_back(ref());
    m.gold.push_back(std::move(g));
    m.predictions.push_back(std::move(p));
  }
  return m;
}

}  // namespace fever::oracle
