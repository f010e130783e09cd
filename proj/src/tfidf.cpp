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

#include "fever/tfidf.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_set>

#include "fever/binary_io.hpp"
#include "fever/evaluation.hpp"
#include "fever/parallel.hpp"
#include "fever/text.hpp"

namespace fever {

namespace {

constexpr char kIndexMagic[8] = {'F', 'V', 'T', 'F', 'I', 'D', 'F', '1'};
constexpr std::uint32_t kIndexVersion = 1;

char Flag(bool b) { return b ? 'T' : 'F'; }

// Term counts for one document, ordered by term so iteration is stable.
using TermCounts = std::map<std::string, int>;

TermCounts CountTerms(std::string_view text, const TfIdfConfig& config) {
  TermCounts counts;
  for (auto& term : AnalyzeText(text, config)) ++counts[std::move(term)];
  return counts;
}

}  // namespace

std::string TfIdfConfig::ToString() const {
  std::ostringstream os;
  os << "lowercase=" << Flag(force_lowercase) << " ascii=" << Flag(force_ascii)
     << " norm=" << (norm == TfIdfNorm::kL2 ? "L2" : "None")
     << " sublinear=" << Flag(sublinear_tf) << " ngram=" << max_ngram;
  return os.str();
}

TfIdfConfig DefaultTitleTfIdfConfig() {
  return {.force_lowercase = true,
          .force_ascii = true,
          .norm = TfIdfNorm::kL2,
          .sublinear_tf = true,
          .max_ngram = 2};
}

TfIdfConfig DefaultBodyTfIdfConfig() {
  return {.force_lowercase = false,
          .force_ascii = true,
          .norm = TfIdfNorm::kNone,
          .sublinear_tf = true,
          .max_ngram = 2};
}

TfIdfConfig DefaultConcatenatedTfIdfConfig() {
  return {.force_lowercase = true,
          .force_ascii = true,
          .norm = TfIdfNorm::kNone,
          .sublinear_tf = true,
          .max_ngram = 2};
}

std::vector<TfIdfConfig> TfIdfGrid() {
  std::vector<TfIdfConfig> grid;
  for (bool lower : {true, false})
    for (bool ascii : {true, false})
      for (TfIdfNorm norm : {TfIdfNorm::kL2, TfIdfNorm::kNone})
        for (bool sublinear : {true, false})
          for (int ngram : {1, 2})
            grid.push_back({lower, ascii, norm, sublinear, ngram});
  return grid;
}

std::vector<std::string> AnalyzeText(std::string_view text,
                                     const TfIdfConfig& config) {
  std::string prepared(text);
  if (config.force_lowercase) prepared = text::ToLower(prepared);
  if (config.force_ascii) prepared = text::FoldAscii(prepared);
  const std::vector<std::string> tokens = text::Tokenize(prepared);
  std::vector<std::string> terms;
  terms.reserve(tokens.size() * static_cast<std::size_t>(config.max_ngram));
  for (int n = 1; n <= config.max_ngram; ++n) {
    for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
      std::string gram = tokens[i];
      for (int j = 1; j < n; ++j) {
        gram.push_back(' ');
        gram += tokens[i + j];
      }
      terms.push_back(std::move(gram));
    }
  }
  return terms;
}

TfIdfIndex TfIdfIndex::Build(
    std::span<const std::pair<std::string, std::string>> texts,
    const TfIdfConfig& config, int threads) {
  if (texts.empty()) throw DataError("cannot build a TF-IDF index over no texts");
  if (config.max_ngram < 1) throw DataError("max_ngram must be >= 1");

  TfIdfIndex index;
  index.config_ = config;
  index.row_keys_.reserve(texts.size());
  {
    std::unordered_set<std::string> keys;
    for (const auto& [key, text] : texts) {
      if (!keys.insert(key).second) {
        throw DataError("duplicate index key '" + key + "'");
      }
      index.row_keys_.push_back(key);
    }
  }

  std::vector<TermCounts> counts(texts.size());
  ParallelFor(texts.size(), threads,
              [&](std::size_t i) { counts[i] = CountTerms(texts[i].second, config); });

  std::map<std::string, int> df;
  for (const auto& doc : counts)
    for (const auto& [term, tf] : doc) ++df[term];

  const auto n_terms = static_cast<int>(df.size());
  index.terms_.reserve(df.size());
  index.doc_freq_.resize(n_terms);
  index.idf_.resize(n_terms);
  const auto n_docs = static_cast<std::int64_t>(texts.size());
  for (const auto& [term, f] : df) {
    const int col = static_cast<int>(index.terms_.size());
    index.doc_freq_(col) = f;
    index.idf_(col) = SmoothedIdf(n_docs, f);
    index.term_to_column_.emplace(term, col);
    index.terms_.push_back(term);
  }

  std::vector<Eigen::Triplet<double, int>> triplets;
  for (std::size_t row = 0; row < counts.size(); ++row) {
    const std::size_t first = triplets.size();
    double sq = 0.0;
    for (const auto& [term, tf] : counts[row]) {
      const int col = index.term_to_column_.at(term);
      const double w =
          TermFrequencyWeight(tf, config.sublinear_tf) * index.idf_(col);
      triplets.emplace_back(static_cast<int>(row), col, w);
      sq += w * w;
    }
    if (config.norm == TfIdfNorm::kL2 && sq > 0.0) {
      const double norm = std::sqrt(sq);
      for (std::size_t t = first; t < triplets.size(); ++t) {
        auto& tr = triplets[t];
        tr = Eigen::Triplet<double, int>(tr.row(), tr.col(), tr.value() / norm);
      }
    }
  }
  index.rows_.resize(static_cast<int>(texts.size()), n_terms);
  index.rows_.setFromTriplets(triplets.begin(), triplets.end());
  index.Finalize();
  return index;
}

void TfIdfIndex::Finalize() {
  rows_.makeCompressed();
  postings_ = rows_;
  postings_.makeCompressed();
}

std::optional<int> TfIdfIndex::TermColumn(std::string_view term) const {
  const auto it = term_to_column_.find(std::string(term));
  if (it == term_to_column_.end()) return std::nullopt;
  return it->second;
}

TfIdfIndex::QueryVector TfIdfIndex::Vectorize(std::string_view query) const {
  std::map<int, int> tf;
  for (const auto& term : AnalyzeText(query, config_)) {
    if (const auto col = TermColumn(term)) ++tf[*col];
  }
  QueryVector q(static_cast<int>(terms_.size()));
  q.reserve(static_cast<int>(tf.size()));
  for (const auto& [col, count] : tf) {
    q.insertBack(col) = TermFrequencyWeight(count, config_.sublinear_tf) * idf_(col);
  }
  const double norm = q.norm();
  if (norm > 0.0) q /= norm;
  return q;
}

std::vector<RetrievalHit> TfIdfIndex::TopK(std::string_view query, int k) const {
  if (k < 1) throw DataError("top_k requires k >= 1");
  const QueryVector q = Vectorize(query);
  if (q.nonZeros() == 0) return {};

  // Columns are visited in ascending order, so each row accumulates its
  // dot product in column order.
  std::unordered_map<int, double> scores;
  for (QueryVector::InnerIterator qit(q); qit; ++qit) {
    for (ColMatrix::InnerIterator it(postings_, qit.index()); it; ++it) {
      scores[it.row()] += qit.value() * it.value();
    }
  }
  std::vector<std::pair<double, int>> ranked;
  ranked.reserve(scores.size());
  for (const auto& [row, score] : scores) {
    if (score > 0.0) ranked.emplace_back(score, row);
  }
  auto better = [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first > b.first : a.second < b.second;
  };
  const std::size_t take = std::min<std::size_t>(ranked.size(), k);
  std::partial_sort(ranked.begin(), ranked.begin() + take, ranked.end(), better);
  std::vector<RetrievalHit> hits;
  hits.reserve(take);
  for (std::size_t i = 0; i < take; ++i) {
    hits.push_back({row_keys_[ranked[i].second], ranked[i].first, ranked[i].second});
  }
  return hits;
}

std::string TfIdfIndex::Serialize() const {
  binary::Writer w;
  w.PutBytes(std::string_view(kIndexMagic, sizeof(kIndexMagic)));
  w.Put<std::uint32_t>(kIndexVersion);
  w.Put<std::uint8_t>(config_.force_lowercase);
  w.Put<std::uint8_t>(config_.force_ascii);
  w.Put<std::uint8_t>(config_.norm == TfIdfNorm::kL2);
  w.Put<std::uint8_t>(config_.sublinear_tf);
  w.Put<std::int32_t>(config_.max_ngram);
  w.Put<std::uint64_t>(row_keys_.size());
  for (const auto& key : row_keys_) w.PutString(key);
  w.Put<std::uint64_t>(terms_.size());
  for (std::size_t j = 0; j < terms_.size(); ++j) {
    w.PutString(terms_[j]);
    w.Put<std::int32_t>(doc_freq_(static_cast<int>(j)));
  }
  w.Put<std::uint64_t>(rows_.nonZeros());
  for (int r = 0; r <= rows_.outerSize(); ++r) {
    w.Put<std::int64_t>(rows_.outerIndexPtr()[r]);
  }
  for (Eigen::Index i = 0; i < rows_.nonZeros(); ++i) {
    w.Put<std::int32_t>(rows_.innerIndexPtr()[i]);
    w.Put<double>(rows_.valuePtr()[i]);
  }
  return w.bytes();
}

TfIdfIndex TfIdfIndex::Deserialize(std::string bytes) {
  binary::Reader r(std::move(bytes));
  if (r.GetBytes(sizeof(kIndexMagic)) !=
      std::string_view(kIndexMagic, sizeof(kIndexMagic))) {
    throw DataError("not a TF-IDF index file");
  }
  if (const auto v = r.Get<std::uint32_t>(); v != kIndexVersion) {
    throw DataError("unsupported TF-IDF index version " + std::to_string(v));
  }
  TfIdfIndex index;
  index.config_.force_lowercase = r.Get<std::uint8_t>() != 0;
  index.config_.force_ascii = r.Get<std::uint8_t>() != 0;
  index.config_.norm = r.Get<std::uint8_t>() ? TfIdfNorm::kL2 : TfIdfNorm::kNone;
  index.config_.sublinear_tf = r.Get<std::uint8_t>() != 0;
  index.config_.max_ngram = r.Get<std::int32_t>();
  index.row_keys_.resize(r.Get<std::uint64_t>());
  for (auto& key : index.row_keys_) key = r.GetString();
  const auto n_terms = r.Get<std::uint64_t>();
  const auto n_docs = static_cast<std::int64_t>(index.row_keys_.size());
  index.terms_.resize(n_terms);
  index.doc_freq_.resize(static_cast<int>(n_terms));
  index.idf_.resize(static_cast<int>(n_terms));
  for (std::size_t j = 0; j < n_terms; ++j) {
    index.terms_[j] = r.GetString();
    const int col = static_cast<int>(j);
    index.doc_freq_(col) = r.Get<std::int32_t>();
    index.idf_(col) = SmoothedIdf(n_docs, index.doc_freq_(col));
    index.term_to_column_.emplace(index.terms_[j], col);
  }
  const auto nnz = r.Get<std::uint64_t>();
  std::vector<std::int64_t> outer(index.row_keys_.size() + 1);
  for (auto& o : outer) o = r.Get<std::int64_t>();
  std::vector<Eigen::Triplet<double, int>> triplets;
  triplets.reserve(nnz);
  for (std::size_t row = 0; row < index.row_keys_.size(); ++row) {
    for (auto i = outer[row]; i < outer[row + 1]; ++i) {
      const auto col = r.Get<std::int32_t>();
      const auto value = r.Get<double>();
      if (col < 0 || static_cast<std::uint64_t>(col) >= n_terms) {
        throw DataError("TF-IDF index column out of range");
      }
      triplets.emplace_back(static_cast<int>(row), col, value);
    }
  }
  index.rows_.resize(static_cast<int>(index.row_keys_.size()),
                     static_cast<int>(n_terms));
  index.rows_.setFromTriplets(triplets.begin(), triplets.end());
  index.Finalize();
  return index;
}

void TfIdfIndex::Save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write index: " + path.string());
  const std::string bytes = Serialize();
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

TfIdfIndex TfIdfIndex::Load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open index: " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());
  return Deserialize(std::move(bytes));
}

std::string_view IndexFieldName(IndexField field) {
  switch (field) {
    case IndexField::kTitle:
      return "title";
    case IndexField::kBody:
      return "body";
    case IndexField::kConcatenated:
      return "concatenated";
  }
  return "unknown";
}

std::vector<std::pair<std::string, std::string>> FieldTexts(
    const Corpus& corpus, IndexField field) {
  std::vector<std::pair<std::string, std::string>> texts;
  texts.reserve(corpus.size());
  for (const auto& doc : corpus.documents()) {
    switch (field) {
      case IndexField::kTitle:
        texts.emplace_back(doc.page_id, doc.title_display);
        break;
      case IndexField::kBody:
        texts.emplace_back(doc.page_id, doc.BodyText());
        break;
      case IndexField::kConcatenated:
        texts.emplace_back(doc.page_id, doc.title_display + " " + doc.BodyText());
        break;
    }
  }
  return texts;
}

std::string TfIdfGridReport::ToCsv() const {
  std::ostringstream os;
  os << "lowercase,ascii,norm,sublinear,ngram,recall_at_k,best\n";
  os.precision(6);
  os << std::fixed;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& c = rows[i].config;
    os << Flag(c.force_lowercase) << ',' << Flag(c.force_ascii) << ','
       << (c.norm == TfIdfNorm::kL2 ? "L2" : "None") << ','
       << Flag(c.sublinear_tf) << ',' << c.max_ngram << ',' << rows[i].recall
       << ',' << (i == best ? 1 : 0) << '\n';
  }
  return os.str();
}

TfIdfGridReport GridSearchTfIdf(const Corpus& corpus,
                                std::span<const ClaimRecord> claims,
                                std::span<const TfIdfConfig> grid,
                                IndexField field, int k, int threads) {
  if (grid.empty()) throw DataError("TF-IDF grid search needs a non-empty grid");
  std::vector<const ClaimRecord*> evaluated;
  for (const auto& c : claims) {
    if (!c.gold_evidence.empty()) evaluated.push_back(&c);
  }
  const auto texts = FieldTexts(corpus, field);

  TfIdfGridReport report;
  report.claims_evaluated = evaluated.size();
  report.rows.resize(grid.size());
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const TfIdfIndex index = TfIdfIndex::Build(texts, grid[g], threads);
    std::vector<char> hit(evaluated.size(), 0);
    ParallelFor(evaluated.size(), threads, [&](std::size_t i) {
      std::unordered_set<std::string> pages;
      for (auto& h : index.TopK(evaluated[i]->text, k)) pages.insert(h.page_id);
      hit[i] = PagesCoverSomeGroup(evaluated[i]->gold_evidence, pages);
    });
    const auto hits = std::count(hit.begin(), hit.end(), 1);
    report.rows[g] = {grid[g], evaluated.empty()
                                   ? 0.0
                                   : static_cast<double>(hits) / evaluated.size()};
    if (report.rows[g].recall > report.rows[report.best].recall) report.best = g;
  }
  return report;
}

}  // namespace fever
