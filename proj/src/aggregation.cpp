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

#include "fever/aggregation.hpp"

#include <algorithm>
#include <string>

namespace fever {

namespace {

bool RowBefore(const ScoredEvidence& a, const ScoredEvidence& b) {
  if (a.retrieval_score != b.retrieval_score) return a.retrieval_score > b.retrieval_score;
  if (a.ref != b.ref) return a.ref < b.ref;
  return std::lexicographical_compare(a.probs.begin(), a.probs.end(), b.probs.begin(),
                                      b.probs.end());
}

}  // namespace

Eigen::VectorXd AggregationFeatures::Flatten() const {
  return Eigen::Map<const Eigen::VectorXd>(rows.data(), rows.size());
}

AggregationFeatures AggregationFeatures::Unflatten(const Eigen::VectorXd& flat) {
  if (flat.size() != kEvidenceRows * kFeatureColumns &&
      flat.size() != (kEvidenceRows + 1) * kFeatureColumns) {
    throw DataError("aggregation features must have length 20 or 24, got " +
                    std::to_string(flat.size()));
  }
  AggregationFeatures f;
  f.rows = Eigen::Map<const FeatureRows>(flat.data(), flat.size() / kFeatureColumns,
                                         kFeatureColumns);
  return f;
}

int FeatureLength(AggregationMethod method) {
  switch (method) {
    case AggregationMethod::kSingleton:
      return kEvidenceRows * kFeatureColumns;
    case AggregationMethod::kMixed:
      return (kEvidenceRows + 1) * kFeatureColumns;
    case AggregationMethod::kConcatenated:
      break;
  }
  throw DataError("concatenated aggregation has no feature matrix");
}

AggregationFeatures BuildFeatures(std::span<const ScoredEvidence> evidence,
                                  const std::optional<SoftmaxTriple>& concat_probs,
                                  AggregationMethod method) {
  if (evidence.size() > static_cast<std::size_t>(kEvidenceRows)) {
    throw DataError("at most 5 evidence rows are aggregated, got " +
                    std::to_string(evidence.size()));
  }
  if (method == AggregationMethod::kMixed && !concat_probs) {
    throw DataError("mixed aggregation needs the concatenated-input softmax");
  }
  const int n_rows = FeatureLength(method) / kFeatureColumns;

  std::vector<ScoredEvidence> sorted(evidence.begin(), evidence.end());
  std::sort(sorted.begin(), sorted.end(), RowBefore);

  AggregationFeatures f;
  f.rows.resize(n_rows, kFeatureColumns);
  f.rows.topRows(kEvidenceRows).rowwise() =
      Eigen::RowVector4d(1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 0.0);
  double retrieval_sum = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    f.rows.row(i) << sorted[i].probs.transpose(), sorted[i].retrieval_score;
    retrieval_sum += sorted[i].retrieval_score;
  }
  if (method == AggregationMethod::kMixed) {
    f.rows.row(kEvidenceRows) << concat_probs->transpose(), retrieval_sum / kEvidenceRows;
  }
  return f;
}

Label Aggregate(const AggregationFeatures& features, const GbdtModel& model) {
  const Eigen::VectorXd flat = features.Flatten();
  if (flat.size() != model.num_features()) {
    throw DataError("aggregator expects " + std::to_string(model.num_features()) +
                    " features, got " + std::to_string(flat.size()));
  }
  if (model.num_classes() != kNumLabels) {
    throw DataError("aggregator model must have 3 classes");
  }
  return ArgmaxLabel(model.PredictProba(flat));
}

Label AggregateConcatenated(const SoftmaxTriple& concat_probs) {
  return ArgmaxLabel(concat_probs);
}

TrainedAggregator TrainAggregator(const Eigen::MatrixXd& features,
                                  std::span<const Label> labels,
                                  std::span<const GbdtConfig> grid, int folds,
                                  std::uint64_t seed, int threads) {
  std::vector<int> y;
  y.reserve(labels.size());
  for (Label l : labels) y.push_back(static_cast<int>(l));
  TrainedAggregator out;
  out.report = GridSearchCv(features, y, kNumLabels, grid, folds, seed, threads);
  out.model = FitGbdt(features, y, kNumLabels, out.report.best_config());
  return out;
}

}  // namespace fever
