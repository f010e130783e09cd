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

#include "fever/retrieval.hpp"

#include <algorithm>
#include <unordered_map>

namespace fever {

namespace {

class CandidateBuilder {
 public:
  void Add(const std::string& page_id, CandidateSource source, double score) {
    const auto [it, inserted] = position_.try_emplace(page_id, set_.candidates.size());
    if (inserted) {
      set_.candidates.push_back({page_id, source, score, {source}});
    } else {
      auto& sources = set_.candidates[it->second].sources;
      if (std::find(sources.begin(), sources.end(), source) == sources.end()) {
        sources.push_back(source);
      }
    }
  }

  DocCandidateSet Finish(std::int64_t claim_id) {
    set_.claim_id = claim_id;
    return std::move(set_);
  }

 private:
  DocCandidateSet set_;
  std::unordered_map<std::string, std::size_t> position_;
};

void AddFuzzyCandidates(const ClaimRecord& claim, const TitleDictionary& titles,
                        const RetrievalOptions& options,
                        const std::vector<std::string>* terms_override,
                        CandidateBuilder& builder) {
  if (!options.use_fuzzy) return;
  const std::vector<std::string> terms =
      terms_override ? *terms_override : ExtractQueryTerms(claim.text);
  std::vector<FuzzyHit> hits;
  for (const auto& term : terms) {
    auto found = titles.Lookup(term, DistanceBudget(term, options.max_distance));
    hits.insert(hits.end(), found.begin(), found.end());
  }
  std::stable_sort(hits.begin(), hits.end(), [](const FuzzyHit& a, const FuzzyHit& b) {
    return a.distance < b.distance;
  });
  for (const auto& h : hits) {
    builder.Add(h.page_id, CandidateSource::kFuzzy,
                FuzzyScore(h.distance, options.max_distance));
  }
}

void CheckK(int k) {
  if (k <= 0 || k % 2 != 0) {
    throw DataError("document retrieval k must be even and positive, got " +
                    std::to_string(k));
  }
}

}  // namespace

std::string_view CandidateSourceName(CandidateSource source) {
  switch (source) {
    case CandidateSource::kFuzzy:
      return "FUZZY";
    case CandidateSource::kTitleTfIdf:
      return "TITLE_TFIDF";
    case CandidateSource::kBodyTfIdf:
      return "BODY_TFIDF";
    case CandidateSource::kConcatenatedTfIdf:
      return "CONCATENATED_TFIDF";
    case CandidateSource::kReretrieved:
      return "RERETRIEVED";
  }
  return "UNKNOWN";
}

std::optional<CandidateSource> ParseCandidateSource(std::string_view name) {
  for (auto s : {CandidateSource::kFuzzy, CandidateSource::kTitleTfIdf,
                 CandidateSource::kBodyTfIdf, CandidateSource::kConcatenatedTfIdf,
                 CandidateSource::kReretrieved}) {
    if (CandidateSourceName(s) == name) return s;
  }
  return std::nullopt;
}

std::vector<std::string> DocCandidateSet::PageIds() const {
  std::vector<std::string> ids;
  ids.reserve(candidates.size());
  for (const auto& c : candidates) ids.push_back(c.page_id);
  return ids;
}

bool DocCandidateSet::Contains(std::string_view page_id) const {
  return std::any_of(candidates.begin(), candidates.end(),
                     [&](const DocCandidate& c) { return c.page_id == page_id; });
}

double FuzzyScore(int distance, int max_distance) {
  return 1.0 - static_cast<double>(distance) / (max_distance + 1);
}

DocCandidateSet RetrieveDocuments(const ClaimRecord& claim,
                                  const TfIdfIndex& title_index,
                                  const TfIdfIndex& body_index,
                                  const TitleDictionary& titles,
                                  const RetrievalOptions& options,
                                  const std::vector<std::string>* terms_override) {
  CheckK(options.k);
  CandidateBuilder builder;
  AddFuzzyCandidates(claim, titles, options, terms_override, builder);
  for (const auto& h : title_index.TopK(claim.text, options.k / 2)) {
    builder.Add(h.page_id, CandidateSource::kTitleTfIdf, h.score);
  }
  for (const auto& h : body_index.TopK(claim.text, options.k / 2)) {
    builder.Add(h.page_id, CandidateSource::kBodyTfIdf, h.score);
  }
  return builder.Finish(claim.claim_id);
}

DocCandidateSet RetrieveDocumentsConcatenated(
    const ClaimRecord& claim, const TfIdfIndex& index, const TitleDictionary& titles,
    const RetrievalOptions& options, const std::vector<std::string>* terms_override) {
  CheckK(options.k);
  CandidateBuilder builder;
  AddFuzzyCandidates(claim, titles, options, terms_override, builder);
  for (const auto& h : index.TopK(claim.text, options.k)) {
    builder.Add(h.page_id, CandidateSource::kConcatenatedTfIdf, h.score);
  }
  return builder.Finish(claim.claim_id);
}

std::vector<ReretrievedDocument> ReretrieveDocuments(
    std::span<const EvidenceCandidate> initial, const Corpus& corpus,
    const std::unordered_set<std::string>& exclude) {
  std::vector<const EvidenceCandidate*> ranked;
  ranked.reserve(initial.size());
  for (const auto& c : initial) ranked.push_back(&c);
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto* a, const auto* b) { return RanksBefore(*a, *b); });

  std::vector<ReretrievedDocument> out;
  std::unordered_set<std::string> taken;
  for (const EvidenceCandidate* parent : ranked) {
    const SentenceEntry* entry = corpus.GetSentence(parent->ref);
    if (entry == nullptr) continue;
    for (const auto& target : entry->hyperlinks) {
      if (exclude.count(target) || !corpus.Contains(target)) continue;
      if (!taken.insert(target).second) continue;
      out.push_back({target, parent->ref, parent->relevance});
    }
  }
  return out;
}

}  // namespace fever
