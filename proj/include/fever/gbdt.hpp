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

// Multiclass gradient-boosted regression trees with a softmax objective.
//
// Raw class scores start at the log class prior. Each round computes
// p = softmax(F) on the training set and, for every class k, fits one
// regression tree to the residuals r_i = [y_i == k] - p_ik. Splits maximize
// the squared-error reduction of r (exact greedy, thresholds at midpoints
// of adjacent distinct values, at least one sample per side). Leaves hold
// the regularized Newton step
//
//   value = sum(r) / (sum(p (1 - p)) + lambda)
//
// and F_k += learning_rate * tree_k(x).

#ifndef FEVER_GBDT_HPP_
#define FEVER_GBDT_HPP_

#include <Eigen/Core>

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fever/types.hpp"

namespace fever {

struct GbdtConfig {
  double learning_rate = 0.3;
  int n_estimators = 60;
  int max_depth = 2;
  double l2_leaf_regularization = 1.0;
  std::uint64_t seed = 0;

  friend bool operator==(const GbdtConfig&, const GbdtConfig&) = default;
  std::string ToString() const;
};

// The tuned aggregation optimum: depth 2, 60 rounds, learning rate 0.3.
GbdtConfig DefaultGbdtConfig();

// learning_rate {0.1, 0.3} x n_estimators {20, 40, 60, 80, 100} x
// max_depth {2, 4, 6, 8}, nested in that order.
std::vector<GbdtConfig> GbdtGrid(double l2_leaf_regularization = 1.0,
                                 std::uint64_t seed = 0);

class RegressionTree {
 public:
  struct Node {
    int feature = -1;  // -1 for leaves
    double threshold = 0.0;  // x[feature] <= threshold goes left
    int left = -1;
    int right = -1;
    double value = 0.0;
    double gain = 0.0;  // squared-error reduction of the split
    int n_samples = 0;
    bool is_leaf() const { return feature < 0; }
  };

  RegressionTree() = default;
  explicit RegressionTree(std::vector<Node> nodes) : nodes_(std::move(nodes)) {}

  template <typename Derived>
  double Predict(const Eigen::MatrixBase<Derived>& x) const {
    int i = 0;
    while (!nodes_[i].is_leaf()) {
      const Node& n = nodes_[i];
      i = x(n.feature) <= n.threshold ? n.left : n.right;
    }
    return nodes_[i].value;
  }

  const std::vector<Node>& nodes() const { return nodes_; }
  const Node& root() const { return nodes_.front(); }
  int Depth() const;

 private:
  std::vector<Node> nodes_;  // root at 0
};

// Fits one tree to residuals with Newton leaf values. `hessians` are the
// per-sample p (1 - p).
RegressionTree FitRegressionTree(const Eigen::MatrixXd& features,
                                 const Eigen::VectorXd& residuals,
                                 const Eigen::VectorXd& hessians, int max_depth,
                                 double l2_leaf_regularization);

class GbdtModel {
 public:
  GbdtModel() = default;

  int num_classes() const { return static_cast<int>(base_scores_.size()); }
  int num_features() const { return num_features_; }
  double learning_rate() const { return learning_rate_; }
  const Eigen::VectorXd& base_scores() const { return base_scores_; }
  // rounds()[m][k] is round m's tree for class k.
  const std::vector<std::vector<RegressionTree>>& rounds() const { return rounds_; }

  // Throws DataError on a dimension mismatch.
  Eigen::VectorXd RawScores(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  Eigen::VectorXd PredictProba(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  Eigen::MatrixXd PredictProbaBatch(const Eigen::MatrixXd& features) const;
  // First maximum.
  int Predict(const Eigen::Ref<const Eigen::VectorXd>& x) const;

  std::string ToJson() const;
  static GbdtModel FromJson(const std::string& json);

  // Zero rounds: predictions are softmax(base_scores).
  static GbdtModel Constant(Eigen::VectorXd base_scores, int num_features,
                            double learning_rate = 0.3);

 private:
  friend GbdtModel FitGbdt(const Eigen::MatrixXd&, std::span<const int>, int,
                           const GbdtConfig&, std::vector<double>*);

  int num_features_ = 0;
  double learning_rate_ = 0.3;
  Eigen::VectorXd base_scores_;
  std::vector<std::vector<RegressionTree>> rounds_;
};

// Row-wise numerically stable softmax.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> SoftmaxRows(
    const Eigen::MatrixBase<Derived>& logits) {
  using Scalar = typename Derived::Scalar;
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> p =
      (logits.colwise() - logits.rowwise().maxCoeff()).array().exp();
  p.array().colwise() /= p.rowwise().sum().array();
  return p;
}

// Labels must lie in [0, num_classes). Throws DataError on empty or
// non-finite input. When `loss_trace` is given it receives the mean
// training cross-entropy before round 1 and after every round.
GbdtModel FitGbdt(const Eigen::MatrixXd& features, std::span<const int> labels,
                  int num_classes, const GbdtConfig& config,
                  std::vector<double>* loss_trace = nullptr);

double MeanLogLoss(const GbdtModel& model, const Eigen::MatrixXd& features,
                   std::span<const int> labels);
double Accuracy(const GbdtModel& model, const Eigen::MatrixXd& features,
                std::span<const int> labels);

// Stratified by label (shuffled within each class, dealt round-robin) when
// every present class has at least `folds` members; plain shuffled
// round-robin otherwise.
std::vector<int> AssignFolds(std::span<const int> labels, int folds, std::uint64_t seed,
                             bool* stratified = nullptr);

struct CvRow {
  GbdtConfig config;
  double mean_accuracy = 0.0;
  std::vector<double> fold_accuracy;
};

struct CvReport {
  std::size_t best = 0;
  bool stratified = true;
  int folds = 4;
  std::vector<CvRow> rows;

  const GbdtConfig& best_config() const { return rows.at(best).config; }
  std::string ToCsv() const;
};

// k-fold CV per grid point; best is the highest mean validation accuracy,
// ties to the earlier grid point. Independent of `threads`.
CvReport GridSearchCv(const Eigen::MatrixXd& features, std::span<const int> labels,
                      int num_classes, std::span<const GbdtConfig> grid, int folds = 4,
                      std::uint64_t seed = 0, int threads = 1);

}  // namespace fever

#endif  // FEVER_GBDT_HPP_
