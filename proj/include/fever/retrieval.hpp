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

// Per-claim document candidates: fuzzy title hits, then k/2 title TF-IDF
// hits, then k/2 body TF-IDF hits, de-duplicated with the first source
// winning. Also hyperlink re-retrieval from initial evidence.

#ifndef FEVER_RETRIEVAL_HPP_
#define FEVER_RETRIEVAL_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "fever/corpus.hpp"
#include "fever/fuzzy.hpp"
#include "fever/tfidf.hpp"
#include "fever/types.hpp"

namespace fever {

enum class CandidateSource {
  kFuzzy,
  kTitleTfIdf,
  kBodyTfIdf,
  kConcatenatedTfIdf,
  kReretrieved,
};

std::string_view CandidateSourceName(CandidateSource source);
std::optional<CandidateSource> ParseCandidateSource(std::string_view name);

struct DocCandidate {
  std::string page_id;
  CandidateSource source = CandidateSource::kTitleTfIdf;
  double score = 0.0;
  // Every source that produced this page, in order; front() == source.
  std::vector<CandidateSource> sources;
};

struct DocCandidateSet {
  std::int64_t claim_id = 0;
  std::vector<DocCandidate> candidates;

  std::vector<std::string> PageIds() const;
  bool Contains(std::string_view page_id) const;
};

struct RetrievalOptions {
  int k = 10;  // even; split half title, half body
  bool use_fuzzy = true;
  int max_distance = kDefaultMaxEditDistance;
};

// FUZZY candidates score 1 - distance / (max_distance + 1).
double FuzzyScore(int distance, int max_distance);

// Terms come from `terms_override` when given, otherwise from
// ExtractQueryTerms. Throws DataError unless k is even and positive.
DocCandidateSet RetrieveDocuments(const ClaimRecord& claim,
                                  const TfIdfIndex& title_index,
                                  const TfIdfIndex& body_index,
                                  const TitleDictionary& titles,
                                  const RetrievalOptions& options,
                                  const std::vector<std::string>* terms_override = nullptr);

// Single concatenated title+body index taking all k slots; the ablation
// baseline.
DocCandidateSet RetrieveDocumentsConcatenated(
    const ClaimRecord& claim, const TfIdfIndex& index, const TitleDictionary& titles,
    const RetrievalOptions& options,
    const std::vector<std::string>* terms_override = nullptr);

struct ReretrievedDocument {
  std::string page_id;
  SentenceRef parent;
  double parent_relevance = 0.0;
};

// Hyperlink targets of the initial evidence, each tagged with the
// highest-ranked sentence linking to it. Targets in `exclude` or absent
// from the corpus are skipped. One hop only.
std::vector<ReretrievedDocument> ReretrieveDocuments(
    std::span<const EvidenceCandidate> initial, const Corpus& corpus,
    const std::unordered_set<std::string>& exclude);

}  // namespace fever

#endif  // FEVER_RETRIEVAL_HPP_
