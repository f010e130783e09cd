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

// Point-wise sentence selection.
//
// Every sentence of every candidate document is scored against the claim on
// its own. Relevance is p(RELEVANT) for binary scorers and 1 - p(NEI) for
// ternary ones. Sentences from re-retrieved (hyperlinked) documents are
// scaled by the relevance of the sentence whose link fetched them, so they
// rarely push initial evidence out of the top 5.

#ifndef FEVER_SELECTION_HPP_
#define FEVER_SELECTION_HPP_

#include <Eigen/Core>

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "fever/corpus.hpp"
#include "fever/retrieval.hpp"
#include "fever/types.hpp"

namespace fever {

enum class ScoreMode { kBinary, kTernary };

std::string_view ScoreModeName(ScoreMode mode);
std::optional<ScoreMode> ParseScoreMode(std::string_view name);
inline int ScoreWidth(ScoreMode mode) { return mode == ScoreMode::kBinary ? 2 : 3; }

// What a batch is scored for. kSentence uses the scorer's selection mode;
// the claim kinds are always ternary. kClaimConcat gets the evidence
// sentences and returns one row for the whole concatenation.
enum class ScoreKind { kSentence, kClaim, kClaimConcat };

std::string_view ScoreKindName(ScoreKind kind);

// Binary rows are [p_irrelevant, p_relevant]; ternary rows are
// [p_refutes, p_nei, p_supports].
class Scorer {
 public:
  virtual ~Scorer() = default;
  virtual ScoreMode mode() const = 0;
  // Must be safe to call from several threads at once.
  virtual std::vector<Eigen::VectorXd> ScoreBatch(
      ScoreKind kind, std::string_view claim,
      std::span<const std::string> sentences) = 0;
};

// Throws DataError unless there are `rows` vectors of `width` entries, each
// in [0, 1] and summing to 1 within `tolerance`.
void ValidateProbabilityRows(std::span<const Eigen::VectorXd> probs, std::size_t rows,
                             int width, double tolerance = 1e-6);

double RelevanceFromProbs(const Eigen::VectorXd& probs, ScoreMode mode);

// Deterministic stand-in for a neural scorer. With c the cosine between
// unigram TF-IDF vectors of claim and sentence (idf from the corpus,
// clamped to [0, 1]):
//   ternary: [c / 2, 1 - c, c / 2]
//   binary:  [1 - c, c]
class LexicalScorer : public Scorer {
 public:
  explicit LexicalScorer(const Corpus& corpus, ScoreMode mode = ScoreMode::kTernary);

  ScoreMode mode() const override { return mode_; }
  std::vector<Eigen::VectorXd> ScoreBatch(ScoreKind kind, std::string_view claim,
                                          std::span<const std::string> sentences) override;

  double Similarity(std::string_view a, std::string_view b) const;

 private:
  std::map<std::string, double> Vectorize(std::string_view text) const;

  ScoreMode mode_;
  std::int64_t n_docs_ = 0;
  std::unordered_map<std::string, int> doc_freq_;
};

// All non-empty sentences of the candidate documents, ranked by
// RanksBefore. Pages missing from the corpus are skipped.
std::vector<EvidenceCandidate> RankSentences(std::string_view claim,
                                             const DocCandidateSet& docs,
                                             Scorer& scorer, const Corpus& corpus);

struct ReretrievedSentence {
  SentenceRef ref;
  double own_score = 0.0;
  SentenceRef parent;
  Eigen::VectorXd probs;
};

// Scores every sentence of the re-retrieved documents.
std::vector<ReretrievedSentence> ScoreReretrieved(
    std::string_view claim, std::span<const ReretrievedDocument> docs, Scorer& scorer,
    const Corpus& corpus);

// Sets each re-retrieved relevance to parent relevance * own score, then
// merges and re-sorts. Initial scores are untouched. Throws DataError if a
// parent is not among `initial`.
std::vector<EvidenceCandidate> ApplyReretrievalScaling(
    std::span<const EvidenceCandidate> initial,
    std::span<const ReretrievedSentence> reretrieved);

std::vector<EvidenceCandidate> SelectTop5(std::span<const EvidenceCandidate> merged);

struct SelectionOptions {
  bool reretrieval = true;
  // Initial candidates whose hyperlinks are followed.
  std::size_t reretrieval_pool = 5;
};

struct SelectionResult {
  std::vector<EvidenceCandidate> top;  // at most 5
  std::vector<ReretrievedDocument> reretrieved_documents;
};

SelectionResult SelectEvidence(const ClaimRecord& claim, const DocCandidateSet& docs,
                               Scorer& scorer, const Corpus& corpus,
                               const SelectionOptions& options);

inline constexpr int kNegativeSampleGrid[] = {5, 10, 20, 40};

struct SelectionTrainingExample {
  std::int64_t claim_id = 0;
  std::string claim;
  std::string sentence;
  std::string label;
};

struct TrainingExportReport {
  std::size_t claims = 0;
  std::size_t positives = 0;
  std::size_t negatives = 0;
  std::vector<std::int64_t> short_of_negatives;  // claims with < n negatives
  std::size_t unresolved_gold = 0;
};

// Per labeled claim: every gold evidence sentence as a positive (RELEVANT,
// or the claim's label when ternary) plus n_negatives non-gold sentences
// sampled without replacement from its retrieved documents (IRRELEVANT /
// NOT ENOUGH INFO). Sampling is seeded per claim, so output depends only
// on the inputs and `seed`.
std::vector<SelectionTrainingExample> ExportTrainingData(
    std::span<const ClaimRecord> claims, const Corpus& corpus,
    const std::map<std::int64_t, DocCandidateSet>& docs, int n_negatives, ScoreMode mode,
    std::uint64_t seed, TrainingExportReport* report = nullptr);

// {"claim", "sentence", "label"} per line.
void WriteTrainingJsonl(std::span<const SelectionTrainingExample> examples,
                        std::ostream& out);

}  // namespace fever

#endif  // FEVER_SELECTION_HPP_
