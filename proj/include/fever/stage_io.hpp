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

// Line-delimited JSON records passed between pipeline stages.
//
//   documents:    {"id", "docs": [{"page", "source", "score"}]}
//   evidence:     {"id", "evidence": [{"page", "line", "score", "provenance",
//                                      "parent", "probs"}]}
//   re-retrieved: {"id", "docs": [{"page", "parent", "parent_score"}]}
//   predictions:  {"id", "predicted_label", "predicted_evidence": [[page, line]]}
//
// Readers throw DataError naming the offending line.

#ifndef FEVER_STAGE_IO_HPP_
#define FEVER_STAGE_IO_HPP_

#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <vector>

#include "fever/retrieval.hpp"
#include "fever/types.hpp"

namespace fever {

void WriteDocumentsJsonl(std::span<const DocCandidateSet> sets, std::ostream& out);
std::vector<DocCandidateSet> ReadDocumentsJsonl(std::istream& in);

struct ClaimEvidence {
  std::int64_t claim_id = 0;
  std::vector<EvidenceCandidate> evidence;
};

void WriteEvidenceJsonl(std::span<const ClaimEvidence> rows, std::ostream& out);
std::vector<ClaimEvidence> ReadEvidenceJsonl(std::istream& in);

struct ClaimReretrieval {
  std::int64_t claim_id = 0;
  std::vector<ReretrievedDocument> docs;
};

void WriteReretrievalJsonl(std::span<const ClaimReretrieval> rows, std::ostream& out);
std::vector<ClaimReretrieval> ReadReretrievalJsonl(std::istream& in);

void WritePredictionsJsonl(std::span<const ClaimVerdict> verdicts, std::ostream& out);
std::vector<ClaimVerdict> ReadPredictionsJsonl(std::istream& in);

}  // namespace fever

#endif  // FEVER_STAGE_IO_HPP_
