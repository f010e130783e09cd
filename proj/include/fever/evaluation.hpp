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

// FEVER metrics with the official group-complete evidence semantics: a gold
// evidence group is matched only when every one of its sentences appears in
// the (deduplicated, truncated to 5) predicted evidence.
//
// Every metric matches predictions to gold claims by id and throws
// DataError when an id is missing on either side, duplicated, or when the
// prediction set is empty.

#ifndef FEVER_EVALUATION_HPP_
#define FEVER_EVALUATION_HPP_

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "fever/types.hpp"

namespace fever {

inline constexpr std::size_t kMaxScoredEvidence = 5;

bool PagesCoverSomeGroup(std::span<const EvidenceGroup> groups,
                         const std::unordered_set<std::string>& pages);
bool RefsCoverSomeGroup(std::span<const EvidenceGroup> groups,
                        std::span<const SentenceRef> refs);

// Order-preserving deduplication, then the first k.
std::vector<SentenceRef> DedupAndTruncate(std::span<const SentenceRef> refs,
                                          std::size_t k);

double FeverScore(std::span<const ClaimVerdict> predictions,
                  std::span<const ClaimRecord> gold);
double LabelAccuracy(std::span<const ClaimVerdict> predictions,
                     std::span<const ClaimRecord> gold);
// Over claims with a non-NEI gold label and gold evidence. With no such
// claims the recall is vacuously 1.
double RecallAtK(std::span<const ClaimVerdict> predictions,
                 std::span<const ClaimRecord> gold, std::size_t k = 5);

using RetrievedDocuments = std::map<std::int64_t, std::vector<std::string>>;

// Oracle score given retrieved pages: NEI claims always count; others
// count when some gold group's pages were all retrieved.
double Ofever(const RetrievedDocuments& retrieved,
              std::span<const ClaimRecord> gold);

struct ClaimOutcome {
  std::int64_t claim_id = 0;
  Label gold = Label::kNotEnoughInfo;
  Label predicted = Label::kNotEnoughInfo;
  bool label_correct = false;
  bool evidence_covered = false;  // meaningless for NEI gold
  bool fever_correct = false;
};

struct MetricReport {
  double label_accuracy = 0.0;
  double fever_score = 0.0;
  double recall_at_5 = 0.0;
  std::optional<double> ofever;
  std::size_t n_claims = 0;
  std::size_t n_evidence_claims = 0;
  // confusion[gold][predicted] in Label index order.
  std::array<std::array<std::size_t, kNumLabels>, kNumLabels> confusion{};
  std::vector<ClaimOutcome> claims;

  std::string ToJson() const;
  std::string ToTable() const;
};

MetricReport Evaluate(std::span<const ClaimVerdict> predictions,
                      std::span<const ClaimRecord> gold,
                      const RetrievedDocuments* retrieved = nullptr);

}  // namespace fever

#endif  // FEVER_EVALUATION_HPP_
