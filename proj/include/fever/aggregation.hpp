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

// Claim-level aggregation of per-evidence claim-classifier outputs.
//
// Each evidence row is [p_refutes, p_nei, p_supports, retrieval_score].
// Singleton features are the 5 evidence rows; mixed features append a row
// holding the concatenated-input softmax and the mean retrieval score.

#ifndef FEVER_AGGREGATION_HPP_
#define FEVER_AGGREGATION_HPP_

#include <Eigen/Core>

#include <optional>
#include <span>
#include <vector>

#include "fever/gbdt.hpp"
#include "fever/types.hpp"

namespace fever {

inline constexpr int kEvidenceRows = 5;
inline constexpr int kFeatureColumns = 4;

using FeatureRows = Eigen::Matrix<double, Eigen::Dynamic, kFeatureColumns, Eigen::RowMajor>;

struct AggregationFeatures {
  FeatureRows rows;  // 5 or 6 rows

  Eigen::VectorXd Flatten() const;
  static AggregationFeatures Unflatten(const Eigen::VectorXd& flat);
  friend bool operator==(const AggregationFeatures& a, const AggregationFeatures& b) {
    return a.rows.rows() == b.rows.rows() && a.rows == b.rows;
  }
};

// Flattened feature length for a method: 20 (singleton) or 24 (mixed).
int FeatureLength(AggregationMethod method);

struct ScoredEvidence {
  SentenceRef ref;
  SoftmaxTriple probs;
  double retrieval_score = 0.0;
};

// Rows are ordered by descending retrieval score (ties by ref, then probs),
// padded to 5 with [1/3, 1/3, 1/3, 0]. Throws DataError for more than 5
// evidence, for kConcatenated, or for kMixed without `concat_probs`.
AggregationFeatures BuildFeatures(std::span<const ScoredEvidence> evidence,
                                  const std::optional<SoftmaxTriple>& concat_probs,
                                  AggregationMethod method);

// Argmax of the model's class probabilities, ties SUPPORTS > REFUTES > NEI.
// Throws DataError when the model's feature count differs.
Label Aggregate(const AggregationFeatures& features, const GbdtModel& model);

Label AggregateConcatenated(const SoftmaxTriple& concat_probs);

struct TrainedAggregator {
  GbdtModel model;
  CvReport report;
};

// Grid search with k-fold CV, then a refit of the best config on all rows.
// `features` holds one flattened feature vector per row.
TrainedAggregator TrainAggregator(const Eigen::MatrixXd& features,
                                  std::span<const Label> labels,
                                  std::span<const GbdtConfig> grid, int folds = 4,
                                  std::uint64_t seed = 0, int threads = 1);

}  // namespace fever

#endif  // FEVER_AGGREGATION_HPP_
