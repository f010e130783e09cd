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

#include "fever/stage_io.hpp"

#include <nlohmann/json.hpp>

#include <functional>
#include <string>

namespace fever {

namespace {

using nlohmann::ordered_json;

void ForEachRecord(std::istream& in, const char* what,
                   const std::function<void(const nlohmann::json&)>& fn) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      if (!j.is_object()) throw DataError("not an object");
      fn(j);
    } catch (const nlohmann::json::exception& e) {
      throw DataError(std::string(what) + " line " + std::to_string(line_no) + ": " +
                      e.what());
    } catch (const DataError& e) {
      throw DataError(std::string(what) + " line " + std::to_string(line_no) + ": " +
                      e.what());
    }
  }
}

ordered_json RefJson(const SentenceRef& ref) { return {ref.page_id, ref.line_index}; }

SentenceRef RefFromJson(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 2) throw DataError("evidence ref must be [page, line]");
  return {j[0].get<std::string>(), j[1].get<int>()};
}

}  // namespace

void WriteDocumentsJsonl(std::span<const DocCandidateSet> sets, std::ostream& out) {
  for (const auto& set : sets) {
    ordered_json docs = ordered_json::array();
    for (const auto& c : set.candidates) {
      docs.push_back({{"page", c.page_id},
                      {"source", CandidateSourceName(c.source)},
                      {"score", c.score}});
    }
    out << ordered_json{{"id", set.claim_id}, {"docs", std::move(docs)}}.dump() << '\n';
  }
}

std::vector<DocCandidateSet> ReadDocumentsJsonl(std::istream& in) {
  std::vector<DocCandidateSet> out;
  ForEachRecord(in, "documents", [&](const nlohmann::json& j) {
    DocCandidateSet set;
    set.claim_id = j.at("id").get<std::int64_t>();
    for (const auto& d : j.at("docs")) {
      const auto source = ParseCandidateSource(d.at("source").get<std::string>());
      if (!source) throw DataError("unknown candidate source");
      set.candidates.push_back(
          {d.at("page").get<std::string>(), *source, d.at("score").get<double>(), {*source}});
    }
    out.push_back(std::move(set));
  });
  return out;
}

void WriteEvidenceJsonl(std::span<const ClaimEvidence> rows, std::ostream& out) {
  for (const auto& row : rows) {
    ordered_json evidence = ordered_json::array();
    for (const auto& c : row.evidence) {
      ordered_json e;
      e["page"] = c.ref.page_id;
      e["line"] = c.ref.line_index;
      e["score"] = c.relevance;
      e["provenance"] =
          c.provenance == Provenance::kInitial ? "initial" : "reretrieved";
      e["parent"] = c.parent ? RefJson(*c.parent) : ordered_json(nullptr);
      e["probs"] = std::vector<double>(c.probs.data(), c.probs.data() + c.probs.size());
      evidence.push_back(std::move(e));
    }
    out << ordered_json{{"id", row.claim_id}, {"evidence", std::move(evidence)}}.dump()
        << '\n';
  }
}

std::vector<ClaimEvidence> ReadEvidenceJsonl(std::istream& in) {
  std::vector<ClaimEvidence> out;
  ForEachRecord(in, "evidence", [&](const nlohmann::json& j) {
    ClaimEvidence row;
    row.claim_id = j.at("id").get<std::int64_t>();
    for (const auto& e : j.at("evidence")) {
      EvidenceCandidate c;
      c.ref = {e.at("page").get<std::string>(), e.at("line").get<int>()};
      c.relevance = e.at("score").get<double>();
      const auto provenance = e.at("provenance").get<std::string>();
      if (provenance == "initial") {
        c.provenance = Provenance::kInitial;
      } else if (provenance == "reretrieved") {
        c.provenance = Provenance::kReretrieved;
      } else {
        throw DataError("unknown provenance '" + provenance + "'");
      }
      if (e.contains("parent") && !e["parent"].is_null()) c.parent = RefFromJson(e["parent"]);
      const auto probs = e.at("probs").get<std::vector<double>>();
      c.probs = Eigen::Map<const Eigen::VectorXd>(probs.data(),
                                                  static_cast<Eigen::Index>(probs.size()));
      row.evidence.push_back(std::move(c));
    }
    out.push_back(std::move(row));
  });
  return out;
}

void WriteReretrievalJsonl(std::span<const ClaimReretrieval> rows, std::ostream& out) {
  for (const auto& row : rows) {
    ordered_json docs = ordered_json::array();
    for (const auto& d : row.docs) {
      docs.push_back({{"page", d.page_id},
                      {"parent", RefJson(d.parent)},
                      {"parent_score", d.parent_relevance}});
    }
    out << ordered_json{{"id", row.claim_id}, {"docs", std::move(docs)}}.dump() << '\n';
  }
}

std::vector<ClaimReretrieval> ReadReretrievalJsonl(std::istream& in) {
  std::vector<ClaimReretrieval> out;
  ForEachRecord(in, "re-retrieval", [&](const nlohmann::json& j) {
    ClaimReretrieval row;
    row.claim_id = j.at("id").get<std::int64_t>();
    for (const auto& d : j.at("docs")) {
      row.docs.push_back({d.at("page").get<std::string>(), RefFromJson(d.at("parent")),
                          d.at("parent_score").get<double>()});
    }
    out.push_back(std::move(row));
  });
  return out;
}

void WritePredictionsJsonl(std::span<const ClaimVerdict> verdicts, std::ostream& out) {
  for (const auto& v : verdicts) {
    ordered_json evidence = ordered_json::array();
    for (const auto& ref : v.evidence) evidence.push_back(RefJson(ref));
    out << ordered_json{{"id", v.claim_id},
                        {"predicted_label", LabelName(v.label)},
                        {"predicted_evidence", std::move(evidence)}}
               .dump()
        << '\n';
  }
}

std::vector<ClaimVerdict> ReadPredictionsJsonl(std::istream& in) {
  std::vector<ClaimVerdict> out;
  ForEachRecord(in, "predictions", [&](const nlohmann::json& j) {
    ClaimVerdict v;
    v.claim_id = j.at("id").get<std::int64_t>();
    const auto name = j.at("predicted_label").get<std::string>();
    const auto label = ParseLabel(name);
    if (!label) throw DataError("unknown label '" + name + "'");
    v.label = *label;
    for (const auto& ref : j.at("predicted_evidence")) v.evidence.push_back(RefFromJson(ref));
    out.push_back(std::move(v));
  });
  return out;
}

}  // namespace fever
