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

// Sparse TF-IDF retrieval over word n-grams.
//
// Weighting, with N documents and df(t) the number containing term t:
//
//   tf'(t, d) = tf             (sublinear_tf = false)
//             = 1 + ln(tf)     (sublinear_tf = true, tf > 0)
//   idf(t)    = ln((1 + N) / (1 + df(t))) + 1
//   w(t, d)   = tf' * idf
//
// Rows are L2 normalized when norm = kL2 and left raw when norm = kNone.
// Query vectors are always L2 normalized, so with kNone the score is a
// plain dot product and longer documents rank higher.

#ifndef FEVER_TFIDF_HPP_
#define FEVER_TFIDF_HPP_

#include <Eigen/SparseCore>

#include <cmath>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "fever/corpus.hpp"
#include "fever/types.hpp"

namespace fever {

enum class TfIdfNorm { kL2, kNone };

struct TfIdfConfig {
  bool force_lowercase = true;
  bool force_ascii = true;
  TfIdfNorm norm = TfIdfNorm::kL2;
  bool sublinear_tf = true;
  int max_ngram = 2;

  friend bool operator==(const TfIdfConfig&, const TfIdfConfig&) = default;

  // "lowercase=T ascii=T norm=L2 sublinear=T ngram=2"
  std::string ToString() const;
};

// Tuned defaults for the separated title and document indices and for the
// single concatenated index used in ablations.
TfIdfConfig DefaultTitleTfIdfConfig();
TfIdfConfig DefaultBodyTfIdfConfig();
TfIdfConfig DefaultConcatenatedTfIdfConfig();

// All 32 combinations of lowercase x ascii x norm x sublinear x ngram, in
// that nesting order with True / L2 / 1 first.
std::vector<TfIdfConfig> TfIdfGrid();

// Preprocess, tokenize and emit every n-gram for n in [1, max_ngram].
// N-grams are joined with a single space.
std::vector<std::string> AnalyzeText(std::string_view text,
                                     const TfIdfConfig& config);

// Smoothed idf for a term with document frequency df in a corpus of n docs.
inline double SmoothedIdf(std::int64_t n_docs, std::int64_t df) {
  return std::log((1.0 + static_cast<double>(n_docs)) /
                  (1.0 + static_cast<double>(df))) +
         1.0;
}

inline double TermFrequencyWeight(double tf, bool sublinear) {
  if (!sublinear) return tf;
  return tf > 0 ? 1.0 + std::log(tf) : 0.0;
}

struct RetrievalHit {
  std::string page_id;
  double score = 0.0;
  int row = 0;
};

class TfIdfIndex {
 public:
  using RowMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor, int>;
  using ColMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;
  using QueryVector = Eigen::SparseVector<double, Eigen::ColMajor, int>;

  TfIdfIndex() = default;

  // Throws DataError on an empty text list or duplicate keys. Empty texts
  // give all-zero rows. `threads` only affects tokenization.
  static TfIdfIndex Build(
      std::span<const std::pair<std::string, std::string>> texts,
      const TfIdfConfig& config, int threads = 1);

  // Top k rows by score, descending, ties by ascending row. Rows scoring
  // zero are never returned; an all-OOV query yields an empty list.
  std::vector<RetrievalHit> TopK(std::string_view query, int k) const;

  // L2-normalized query vector; out-of-vocabulary terms are dropped.
  QueryVector Vectorize(std::string_view query) const;

  std::optional<int> TermColumn(std::string_view term) const;

  const TfIdfConfig& config() const { return config_; }
  const RowMatrix& matrix() const { return rows_; }
  const std::vector<std::string>& row_keys() const { return row_keys_; }
  const std::vector<std::string>& terms() const { return terms_; }
  const Eigen::VectorXi& doc_freq() const { return doc_freq_; }
  const Eigen::VectorXd& idf() const { return idf_; }
  std::size_t num_rows() const { return row_keys_.size(); }

  std::string Serialize() const;
  static TfIdfIndex Deserialize(std::string bytes);
  void Save(const std::filesystem::path& path) const;
  static TfIdfIndex Load(const std::filesystem::path& path);

 private:
  void Finalize();

  TfIdfConfig config_;
  std::vector<std::string> row_keys_;
  std::vector<std::string> terms_;  // sorted; column j holds terms_[j]
  std::unordered_map<std::string, int> term_to_column_;
  Eigen::VectorXi doc_freq_;
  Eigen::VectorXd idf_;
  RowMatrix rows_;
  ColMatrix postings_;  // same weights, column-major for query scoring
};

enum class IndexField { kTitle, kBody, kConcatenated };

std::string_view IndexFieldName(IndexField field);

// (page_id, text) pairs for one field, in corpus order.
std::vector<std::pair<std::string, std::string>> FieldTexts(
    const Corpus& corpus, IndexField field);

struct TfIdfGridRow {
  TfIdfConfig config;
  double recall = 0.0;
};

struct TfIdfGridReport {
  std::size_t best = 0;
  std::size_t claims_evaluated = 0;
  std::vector<TfIdfGridRow> rows;

  const TfIdfConfig& best_config() const { return rows.at(best).config; }
  // Header plus one line per grid point.
  std::string ToCsv() const;
};

// Document-level recall@k per grid point. A claim counts as a hit when the
// pages of at least one of its gold groups are all in the top k. Claims
// without gold evidence are skipped. Ties go to the earlier grid point.
TfIdfGridReport GridSearchTfIdf(const Corpus& corpus,
                                std::span<const ClaimRecord> claims,
                                std::span<const TfIdfConfig> grid,
                                IndexField field, int k = 5, int threads = 1);

}  // namespace fever

#endif  // FEVER_TFIDF_HPP_
