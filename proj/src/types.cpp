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

#include "fever/types.hpp"

#include <functional>

namespace fever {

std::string_view LabelName(Label label) {
  switch (label) {
    case Label::kRefutes:
      return "REFUTES";
    case Label::kNotEnoughInfo:
      return "NOT ENOUGH INFO";
    case Label::kSupports:
      return "SUPPORTS";
  }
  return "NOT ENOUGH INFO";
}

std::optional<Label> ParseLabel(std::string_view name) {
  if (name == "SUPPORTS") return Label::kSupports;
  if (name == "REFUTES") return Label::kRefutes;
  if (name == "NOT ENOUGH INFO") return Label::kNotEnoughInfo;
  return std::nullopt;
}

Label ArgmaxLabel(const SoftmaxTriple& probs) {
  // Scan in ascending priority; >= lets the later (higher priority) label
  // take exact ties.
  constexpr Label kOrder[] = {Label::kNotEnoughInfo, Label::kRefutes,
                              Label::kSupports};
  Label best = kOrder[0];
  double best_p = probs(static_cast<int>(best));
  for (Label l : kOrder) {
    const double p = probs(static_cast<int>(l));
    if (p >= best_p) {
      best = l;
      best_p = p;
    }
  }
  return best;
}

std::string_view AggregationMethodName(AggregationMethod method) {
  switch (method) {
    case AggregationMethod::kSingleton:
      return "singleton";
    case AggregationMethod::kConcatenated:
      return "concatenated";
    case AggregationMethod::kMixed:
      return "mixed";
  }
  return "mixed";
}

std::optional<AggregationMethod> ParseAggregationMethod(std::string_view name) {
  if (name == "singleton") return AggregationMethod::kSingleton;
  if (name == "concatenated") return AggregationMethod::kConcatenated;
  if (name == "mixed") return AggregationMethod::kMixed;
  return std::nullopt;
}

bool RanksBefore(const EvidenceCandidate& a, const EvidenceCandidate& b) {
  if (a.relevance != b.relevance) return a.relevance > b.relevance;
  return a.ref < b.ref;
}

std::size_t SentenceRefHash::operator()(const SentenceRef& ref) const noexcept {
  return std::hash<std::string>{}(ref.page_id) * 31 +
         std::hash<int>{}(ref.line_index);
}

}  // namespace fever
