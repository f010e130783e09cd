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

#include "fever/selection.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <unordered_set>

#include "fever/text.hpp"
#include "fever/tfidf.hpp"

namespace fever {

namespace {

const TfIdfConfig& LexicalConfig() {
  static const TfIdfConfig config{.force_lowercase = true,
                                  .force_ascii = true,
                                  .norm = TfIdfNorm::kL2,
                                  .sublinear_tf = false,
                                  .max_ngram = 1};
  return config;
}

struct ScoredSentence {
  SentenceRef ref;
  Eigen::VectorXd probs;
};

// One scorer batch per document.
std::vector<ScoredSentence> ScorePage(std::string_view claim, const DocumentRecord& doc,
                                      Scorer& scorer) {
  std::vector<std::string> texts;
  std::vector<int> lines;
  for (const auto& s : doc.sentences) {
    if (s.text.empty()) continue;
    texts.push_back(s.text);
    lines.push_back(s.line_index);
  }
  if (texts.empty()) return {};
  std::vector<Eigen::VectorXd> probs;
  try {
    probs = scorer.ScoreBatch(ScoreKind::kSentence, claim, texts);
    ValidateProbabilityRows(probs, texts.size(), ScoreWidth(scorer.mode()));
  } catch (const std::exception& e) {
    throw DataError("sentence scoring failed for batch page='" + doc.page_id +
                    "' (" + std::to_string(texts.size()) + " sentences): " + e.what());
  }
  std::vector<ScoredSentence> out;
  out.reserve(texts.size());
  for (std::size_t i = 0; i < texts.size(); ++i) {
    out.push_back({SentenceRef{doc.page_id, lines[i]}, std::move(probs[i])});
  }
  return out;
}

}  // namespace

std::string_view ScoreModeName(ScoreMode mode) {
  return mode == ScoreMode::kBinary ? "binary" : "ternary";
}

std::optional<ScoreMode> ParseScoreMode(std::string_view name) {
  if (name == "binary") return ScoreMode::kBinary;
  if (name == "ternary") return ScoreMode::kTernary;
  return std::nullopt;
}

std::string_view ScoreKindName(ScoreKind kind) {
  switch (kind) {
    case ScoreKind::kSentence:
      return "sentence";
    case ScoreKind::kClaim:
      return "claim";
    case ScoreKind::kClaimConcat:
      return "claim_concat";
  }
  return "sentence";
}

void ValidateProbabilityRows(std::span<const Eigen::VectorXd> probs, std::size_t rows,
                             int width, double tolerance) {
  if (probs.size() != rows) {
    throw DataError("scorer returned " + std::to_string(probs.size()) +
                    " rows, expected " + std::to_string(rows));
  }
  for (const auto& p : probs) {
    if (p.size() != width) {
      throw DataError("probability vector has " + std::to_string(p.size()) +
                      " entries, expected " + std::to_string(width));
    }
    if (!p.allFinite() || (p.array() < 0.0).any() || (p.array() > 1.0).any() ||
        std::abs(p.sum() - 1.0) > tolerance) {
      throw DataError("probability vector is not a distribution");
    }
  }
}

double RelevanceFromProbs(const Eigen::VectorXd& probs, ScoreMode mode) {
  if (probs.size() != ScoreWidth(mode)) {
    throw DataError("probability vector length " + std::to_string(probs.size()) +
                    " does not match " + std::string(ScoreModeName(mode)) + " mode");
  }
  return mode == ScoreMode::kBinary ? probs(1) : 1.0 - probs(1);
}

LexicalScorer::LexicalScorer(const Corpus& corpus, ScoreMode mode) : mode_(mode) {
  n_docs_ = static_cast<std::int64_t>(corpus.size());
  for (const auto& doc : corpus.documents()) {
    std::set<std::string> unique;
    for (auto& t : AnalyzeText(doc.BodyText(), LexicalConfig())) unique.insert(std::move(t));
    for (const auto& t : unique) ++doc_freq_[t];
  }
}

std::map<std::string, double> LexicalScorer::Vectorize(std::string_view text) const {
  std::map<std::string, double> v;
  for (auto& t : AnalyzeText(text, LexicalConfig())) v[std::move(t)] += 1.0;
  for (auto& [term, w] : v) {
    const auto it = doc_freq_.find(term);
    w *= SmoothedIdf(n_docs_, it == doc_freq_.end() ? 0 : it->second);
  }
  return v;
}

double LexicalScorer::Similarity(std::string_view a, std::string_view b) const {
  const auto va = Vectorize(a);
  const auto vb = Vectorize(b);
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (const auto& [t, w] : va) na += w * w;
  for (const auto& [t, w] : vb) nb += w * w;
  auto ia = va.begin();
  auto ib = vb.begin();
  while (ia != va.end() && ib != vb.end()) {
    if (ia->first < ib->first) {
      ++ia;
    } else if (ib->first < ia->first) {
      ++ib;
    } else {
      dot += ia->second * ib->second;
      ++ia;
      ++ib;
    }
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return std::clamp(dot / std::sqrt(na * nb), 0.0, 1.0);
}

std::vector<Eigen::VectorXd> LexicalScorer::ScoreBatch(
    ScoreKind kind, std::string_view claim, std::span<const std::string> sentences) {
  auto row = [&](double c, bool ternary) {
    if (ternary) return Eigen::VectorXd(Eigen::Vector3d(c * 0.5, 1.0 - c, c * 0.5));
    return Eigen::VectorXd(Eigen::Vector2d(1.0 - c, c));
  };
  std::vector<Eigen::VectorXd> out;
  if (kind == ScoreKind::kClaimConcat) {
    std::string joined;
    for (const auto& s : sentences) {
      if (!joined.empty()) joined.push_back(' ');
      joined += s;
    }
    out.push_back(row(Similarity(claim, joined), true));
    return out;
  }
  const bool ternary = kind == ScoreKind::kClaim || mode_ == ScoreMode::kTernary;
  out.reserve(sentences.size());
  for (const auto& s : sentences) out.push_back(row(Similarity(claim, s), ternary));
  return out;
}

std::vector<EvidenceCandidate> RankSentences(std::string_view claim,
                                             const DocCandidateSet& docs,
                                             Scorer& scorer, const Corpus& corpus) {
  std::vector<EvidenceCandidate> ranked;
  for (const auto& candidate : docs.candidates) {
    const DocumentRecord* doc = corpus.Find(candidate.page_id);
    if (doc == nullptr) continue;
    for (auto& scored : ScorePage(claim, *doc, scorer)) {
      EvidenceCandidate c;
      c.ref = std::move(scored.ref);
      c.relevance = RelevanceFromProbs(scored.probs, scorer.mode());
      c.own_score = c.relevance;
      c.probs = std::move(scored.probs);
      ranked.push_back(std::move(c));
    }
  }
  std::sort(ranked.begin(), ranked.end(), RanksBefore);
  return ranked;
}

std::vector<ReretrievedSentence> ScoreReretrieved(
    std::string_view claim, std::span<const ReretrievedDocument> docs, Scorer& scorer,
    const Corpus& corpus) {
  std::vector<ReretrievedSentence> out;
  for (const auto& rr : docs) {
    const DocumentRecord* doc = corpus.Find(rr.page_id);
    if (doc == nullptr) continue;
    for (auto& scored : ScorePage(claim, *doc, scorer)) {
      const double own = RelevanceFromProbs(scored.probs, scorer.mode());
      out.push_back({std::move(scored.ref), own, rr.parent, std::move(scored.probs)});
    }
  }
  return out;
}

std::vector<EvidenceCandidate> ApplyReretrievalScaling(
    std::span<const EvidenceCandidate> initial,
    std::span<const ReretrievedSentence> reretrieved) {
  std::unordered_map<SentenceRef, double, SentenceRefHash> parent_score;
  for (const auto& c : initial) parent_score.emplace(c.ref, c.relevance);
  std::vector<EvidenceCandidate> merged(initial.begin(), initial.end());
  merged.reserve(initial.size() + reretrieved.size());
  for (const auto& r : reretrieved) {
    const auto it = parent_score.find(r.parent);
    if (it == parent_score.end()) {
      throw DataError("re-retrieved sentence " + r.ref.page_id + ":" +
                      std::to_string(r.ref.line_index) + " names unknown parent " +
                      r.parent.page_id + ":" + std::to_string(r.parent.line_index));
    }
    EvidenceCandidate c;
    c.ref = r.ref;
    c.provenance = Provenance::kReretrieved;
    c.parent = r.parent;
    c.parent_relevance = it->second;
    c.own_score = r.own_score;
    c.relevance = it->second * r.own_score;
    c.probs = r.probs;
    merged.push_back(std::move(c));
  }
  std::stable_sort(merged.begin(), merged.end(), RanksBefore);
  return merged;
}

std::vector<EvidenceCandidate> SelectTop5(std::span<const EvidenceCandidate> merged) {
  const std::size_t n = std::min<std::size_t>(merged.size(), 5);
  return {merged.begin(), merged.begin() + static_cast<std::ptrdiff_t>(n)};
}

SelectionResult SelectEvidence(const ClaimRecord& claim, const DocCandidateSet& docs,
                               Scorer& scorer, const Corpus& corpus,
                               const SelectionOptions& options) {
  SelectionResult result;
  const auto initial = RankSentences(claim.text, docs, scorer, corpus);
  if (!options.reretrieval) {
    result.top = SelectTop5(initial);
    return result;
  }
  const std::size_t pool = std::min(options.reretrieval_pool, initial.size());
  const std::span<const EvidenceCandidate> parents(initial.data(), pool);
  const auto page_ids = docs.PageIds();
  const std::unordered_set<std::string> exclude(page_ids.begin(), page_ids.end());
  result.reretrieved_documents = ReretrieveDocuments(parents, corpus, exclude);
  const auto scored =
      ScoreReretrieved(claim.text, result.reretrieved_documents, scorer, corpus);
  result.top = SelectTop5(ApplyReretrievalScaling(initial, scored));
  return result;
}

std::vector<SelectionTrainingExample> ExportTrainingData(
    std::span<const ClaimRecord> claims, const Corpus& corpus,
    const std::map<std::int64_t, DocCandidateSet>& docs, int n_negatives, ScoreMode mode,
    std::uint64_t seed, TrainingExportReport* report) {
  if (n_negatives < 0) throw DataError("negative sample count must be >= 0");
  TrainingExportReport local;
  TrainingExportReport& rep = report ? *report : local;
  rep = TrainingExportReport{};
  const std::string negative_label =
      mode == ScoreMode::kBinary ? "IRRELEVANT" : std::string(LabelName(Label::kNotEnoughInfo));

  std::vector<SelectionTrainingExample> out;
  for (const auto& claim : claims) {
    if (!claim.gold_label) continue;
    ++rep.claims;
    const std::string positive_label =
        mode == ScoreMode::kBinary ? "RELEVANT" : std::string(LabelName(*claim.gold_label));

    std::set<SentenceRef> gold;
    for (const auto& g : claim.gold_evidence) gold.insert(g.members.begin(), g.members.end());
    for (const auto& ref : gold) {
      const SentenceEntry* s = corpus.GetSentence(ref);
      if (s == nullptr || s->text.empty()) {
        ++rep.unresolved_gold;
        continue;
      }
      out.push_back({claim.claim_id, claim.text, s->text, positive_label});
      ++rep.positives;
    }

    std::vector<const SentenceEntry*> pool;
    if (const auto it = docs.find(claim.claim_id); it != docs.end()) {
      for (const auto& candidate : it->second.candidates) {
        const DocumentRecord* doc = corpus.Find(candidate.page_id);
        if (doc == nullptr) continue;
        for (const auto& s : doc->sentences) {
          if (s.text.empty() || gold.count({doc->page_id, s.line_index})) continue;
          pool.push_back(&s);
        }
      }
    }
    const std::size_t want = static_cast<std::size_t>(n_negatives);
    if (pool.size() < want) rep.short_of_negatives.push_back(claim.claim_id);
    const std::size_t take = std::min(want, pool.size());
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(claim.claim_id),
                      static_cast<std::uint32_t>(static_cast<std::uint64_t>(claim.claim_id) >> 32)};
    std::mt19937_64 rng(seq);
    // Partial Fisher-Yates: the first `take` slots become the sample.
    for (std::size_t i = 0; i < take; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
      std::swap(pool[i], pool[pick(rng)]);
      out.push_back({claim.claim_id, claim.text, pool[i]->text, negative_label});
      ++rep.negatives;
    }
  }
  return out;
}

void WriteTrainingJsonl(std::span<const SelectionTrainingExample> examples,
                        std::ostream& out) {
  for (const auto& e : examples) {
    nlohmann::ordered_json j;
    j["claim"] = e.claim;
    j["sentence"] = e.sentence;
    j["label"] = e.label;
    out << j.dump() << '\n';
  }
}

}  // namespace fever
