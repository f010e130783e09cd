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

#ifndef FEVER_TYPES_HPP_
#define FEVER_TYPES_HPP_

#include <Eigen/Core>

#include <compare>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace fever {

// Bad input data: malformed files, unmatched ids, contract violations on
// caller-supplied values.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A pipeline stage ran before the stage that produces its input.
class StageDependencyError : public std::runtime_error {
 public:
  StageDependencyError(const std::string& missing_stage, const std::string& what)
      : std::runtime_error(what), missing_stage_(missing_stage) {}
  const std::string& missing_stage() const { return missing_stage_; }

 private:
  std::string missing_stage_;
};

// Class indices match the column order of every softmax triple in the
// pipeline: [p_refutes, p_nei, p_supports].
enum class Label : int { kRefutes = 0, kNotEnoughInfo = 1, kSupports = 2 };
inline constexpr int kNumLabels = 3;

std::string_view LabelName(Label label);
std::optional<Label> ParseLabel(std::string_view name);

using SoftmaxTriple = Eigen::Vector3d;

// Argmax over a triple with ties resolved SUPPORTS > REFUTES > NEI.
Label ArgmaxLabel(const SoftmaxTriple& probs);

struct SentenceRef {
  std::string page_id;
  int line_index = 0;

  friend auto operator<=>(const SentenceRef&, const SentenceRef&) = default;
  friend bool operator==(const SentenceRef&, const SentenceRef&) = default;
};

struct SentenceRefHash {
  std::size_t operator()(const SentenceRef& ref) const noexcept;
};

// Members sorted ascending and unique.
struct EvidenceGroup {
  std::vector<SentenceRef> members;
  friend bool operator==(const EvidenceGroup&, const EvidenceGroup&) = default;
};

struct ClaimRecord {
  std::int64_t claim_id = 0;
  std::string text;
  std::optional<Label> gold_label;
  std::vector<EvidenceGroup> gold_evidence;
};

enum class Provenance { kInitial, kReretrieved };

// A scored sentence. For re-retrieved sentences relevance is
// parent_relevance * own_score.
struct EvidenceCandidate {
  SentenceRef ref;
  double relevance = 0.0;
  Provenance provenance = Provenance::kInitial;
  std::optional<SentenceRef> parent;
  double parent_relevance = 0.0;
  double own_score = 0.0;
  // Raw scorer output for this sentence (2 or 3 entries).
  Eigen::VectorXd probs;
};

// Descending relevance, then ascending (page_id, line_index).
bool RanksBefore(const EvidenceCandidate& a, const EvidenceCandidate& b);

enum class AggregationMethod { kSingleton, kConcatenated, kMixed };

std::string_view AggregationMethodName(AggregationMethod method);
std::optional<AggregationMethod> ParseAggregationMethod(std::string_view name);

// Final per-claim prediction in FEVER submission shape.
struct ClaimVerdict {
  std::int64_t claim_id = 0;
  Label label = Label::kNotEnoughInfo;
  std::vector<SentenceRef> evidence;  // at most 5
  AggregationMethod method = AggregationMethod::kMixed;
};

}  // namespace fever

#endif  // FEVER_TYPES_HPP_
