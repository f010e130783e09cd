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

#include "fever/evaluation.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstdio>
#include <sstream>
#include <unordered_map>

namespace fever {

namespace {

std::string JoinIds(const std::vector<std::int64_t>& ids) {
  std::string out;
  for (std::size_t i = 0; i < ids.size() && i < 20; ++i) {
    if (i) out += ", ";
    out += std::to_string(ids[i]);
  }
  if (ids.size() > 20) out += ", ...";
  return out;
}

// Pairs each prediction with its gold claim, in prediction order.
std::vector<std::pair<const ClaimVerdict*, const ClaimRecord*>> Match(
    std::span<const ClaimVerdict> predictions,
    std::span<const ClaimRecord> gold) {
  if (predictions.empty()) throw DataError("no predictions to score");
  std::unordered_map<std::int64_t, const ClaimRecord*> by_id;
  for (const auto& g : gold) {
    if (!by_id.emplace(g.claim_id, &g).second) {
      throw DataError("duplicate gold claim id " + std::to_string(g.claim_id));
    }
    if (!g.gold_label) {
      throw DataError("gold claim " + std::to_string(g.claim_id) +
                      " has no label");
    }
  }
  std::vector<std::pair<const ClaimVerdict*, const ClaimRecord*>> pairs;
  std::vector<std::int64_t> unmatched;
  std::unordered_map<std::int64_t, int> seen;
  for (const auto& p : predictions) {
    if (++seen[p.claim_id] > 1) {
      throw DataError("duplicate prediction id " + std::to_string(p.claim_id));
    }
    const auto it = by_id.find(p.claim_id);
    if (it == by_id.end()) {
      unmatched.push_back(p.claim_id);
      continue;
    }
    pairs.emplace_back(&p, it->second);
  }
  for (const auto& g : gold) {
    if (!seen.count(g.claim_id)) unmatched.push_back(g.claim_id);
  }
  if (!unmatched.empty()) {
    throw DataError("unmatched claim ids: " + JoinIds(unmatched));
  }
  return pairs;
}

bool IsEvidenceBearing(const ClaimRecord& c) {
  return c.gold_label != Label::kNotEnoughInfo && !c.gold_evidence.empty();
}

std::string FormatFraction(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

}  // namespace

bool PagesCoverSomeGroup(std::span<const EvidenceGroup> groups,
                         const std::unordered_set<std::string>& pages) {
  return std::any_of(groups.begin(), groups.end(), [&](const EvidenceGroup& g) {
    return !g.members.empty() &&
           std::all_of(g.members.begin(), g.members.end(),
                       [&](const SentenceRef& r) { return pages.count(r.page_id) > 0; });
  });
}

bool RefsCoverSomeGroup(std::span<const EvidenceGroup> groups,
                        std::span<const SentenceRef> refs) {
  return std::any_of(groups.begin(), groups.end(), [&](const EvidenceGroup& g) {
    return !g.members.empty() &&
           std::all_of(g.members.begin(), g.members.end(), [&](const SentenceRef& m) {
             return std::find(refs.begin(), refs.end(), m) != refs.end();
           });
  });
}

std::vector<SentenceRef> DedupAndTruncate(std::span<const SentenceRef> refs,
                                          std::size_t k) {
  std::vector<SentenceRef> out;
  for (const auto& r : refs) {
    if (out.size() == k) break;
    if (std::find(out.begin(), out.end(), r) == out.end()) out.push_back(r);
  }
  return out;
}

MetricReport Evaluate(std::span<const ClaimVerdict> predictions,
                      std::span<const ClaimRecord> gold,
                      const RetrievedDocuments* retrieved) {
  const auto pairs = Match(predictions, gold);
  MetricReport report;
  report.n_claims = pairs.size();
  std::size_t label_hits = 0;
  std::size_t fever_hits = 0;
  std::size_t recall_hits = 0;
  for (const auto& [pred, g] : pairs) {
    ClaimOutcome o;
    o.claim_id = pred->claim_id;
    o.gold = *g->gold_label;
    o.predicted = pred->label;
    o.label_correct = o.gold == o.predicted;
    const auto top =
        DedupAndTruncate(pred->evidence, kMaxScoredEvidence);
    o.evidence_covered = RefsCoverSomeGroup(g->gold_evidence, top);
    o.fever_correct =
        o.label_correct && (o.gold == Label::kNotEnoughInfo || o.evidence_covered);
    label_hits += o.label_correct;
    fever_hits += o.fever_correct;
    if (IsEvidenceBearing(*g)) {
      ++report.n_evidence_claims;
      recall_hits += o.evidence_covered;
    }
    ++report.confusion[static_cast<int>(o.gold)][static_cast<int>(o.predicted)];
    report.claims.push_back(o);
  }
  const double n = static_cast<double>(report.n_claims);
  report.label_accuracy = label_hits / n;
  report.fever_score = fever_hits / n;
  report.recall_at_5 =
      report.n_evidence_claims == 0
          ? 1.0
          : static_cast<double>(recall_hits) / report.n_evidence_claims;
  if (retrieved) report.ofever = Ofever(*retrieved, gold);
  return report;
}

double FeverScore(std::span<const ClaimVerdict> predictions,
                  std::span<const ClaimRecord> gold) {
  return Evaluate(predictions, gold).fever_score;
}

double LabelAccuracy(std::span<const ClaimVerdict> predictions,
                     std::span<const ClaimRecord> gold) {
  return Evaluate(predictions, gold).label_accuracy;
}

double RecallAtK(std::span<const ClaimVerdict> predictions,
                 std::span<const ClaimRecord> gold, std::size_t k) {
  const auto pairs = Match(predictions, gold);
  std::size_t denom = 0;
  std::size_t hits = 0;
  for (const auto& [pred, g] : pairs) {
    if (!IsEvidenceBearing(*g)) continue;
    ++denom;
    hits += RefsCoverSomeGroup(g->gold_evidence, DedupAndTruncate(pred->evidence, k));
  }
  return denom == 0 ? 1.0 : static_cast<double>(hits) / denom;
}

double Ofever(const RetrievedDocuments& retrieved,
              std::span<const ClaimRecord> gold) {
  if (gold.empty()) throw DataError("no gold claims for OFEVER");
  std::vector<std::int64_t> unmatched;
  std::unordered_set<std::int64_t> gold_ids;
  std::size_t hits = 0;
  for (const auto& g : gold) {
    if (!g.gold_label) {
      throw DataError("gold claim " + std::to_string(g.claim_id) + " has no label");
    }
    gold_ids.insert(g.claim_id);
    const auto it = retrieved.find(g.claim_id);
    if (it == retrieved.end()) {
      unmatched.push_back(g.claim_id);
      continue;
    }
    if (*g.gold_label == Label::kNotEnoughInfo) {
      ++hits;
      continue;
    }
    const std::unordered_set<std::string> pages(it->second.begin(), it->second.end());
    hits += PagesCoverSomeGroup(g.gold_evidence, pages);
  }
  for (const auto& [id, docs] : retrieved) {
    if (!gold_ids.count(id)) unmatched.push_back(id);
  }
  if (!unmatched.empty()) {
    throw DataError("unmatched claim ids: " + JoinIds(unmatched));
  }
  return static_cast<double>(hits) / gold.size();
}

std::string MetricReport::ToJson() const {
  nlohmann::ordered_json j;
  j["n_claims"] = n_claims;
  j["n_evidence_claims"] = n_evidence_claims;
  j["label_accuracy"] = label_accuracy;
  j["fever_score"] = fever_score;
  j["recall_at_5"] = recall_at_5;
  j["ofever"] = ofever ? nlohmann::ordered_json(*ofever) : nlohmann::ordered_json();
  nlohmann::ordered_json confusion = nlohmann::ordered_json::object();
  for (int g = 0; g < kNumLabels; ++g) {
    nlohmann::ordered_json row = nlohmann::ordered_json::object();
    for (int p = 0; p < kNumLabels; ++p) {
      row[std::string(LabelName(static_cast<Label>(p)))] = this->confusion[g][p];
    }
    confusion[std::string(LabelName(static_cast<Label>(g)))] = row;
  }
  j["confusion"] = confusion;
  nlohmann::ordered_json per_claim = nlohmann::ordered_json::array();
  for (const auto& c : claims) {
    per_claim.push_back({{"id", c.claim_id},
                         {"gold", LabelName(c.gold)},
                         {"predicted", LabelName(c.predicted)},
                         {"label_correct", c.label_correct},
                         {"evidence_covered", c.evidence_covered},
                         {"fever_correct", c.fever_correct}});
  }
  j["claims"] = per_claim;
  return j.dump(2) + "\n";
}

std::string MetricReport::ToTable() const {
  std::ostringstream os;
  auto row = [&](const std::string& name, const std::string& value) {
    os << name;
    for (std::size_t i = name.size(); i < 20; ++i) os << ' ';
    os << value << '\n';
  };
  row("Metric", "Value");
  row("claims", std::to_string(n_claims));
  row("label accuracy", FormatFraction(label_accuracy));
  row("FEVER score", FormatFraction(fever_score));
  row("recall@5", FormatFraction(recall_at_5));
  row("OFEVER", ofever ? FormatFraction(*ofever) : std::string("-"));
  return os.str();
}

}  // namespace fever
