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

#include "fever/gbdt.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "fever/parallel.hpp"

namespace fever {

namespace {

constexpr int kModelFormatVersion = 1;
// Splits must beat this reduction; equal-residual nodes otherwise split on
// rounding noise.
constexpr double kMinSplitGain = 1e-12;
// Floor on class priors so absent classes keep a finite base score.
constexpr double kMinClassPrior = 1e-12;

class TreeBuilder {
 public:
  TreeBuilder(const Eigen::MatrixXd& x, const Eigen::VectorXd& r, const Eigen::VectorXd& h,
              int max_depth, double lambda)
      : x_(x), r_(r), h_(h), max_depth_(max_depth), lambda_(lambda) {}

  RegressionTree Build() {
    const auto n = static_cast<int>(x_.rows());
    const auto d = static_cast<int>(x_.cols());
    std::vector<std::vector<int>> sorted(d, std::vector<int>(n));
    for (int f = 0; f < d; ++f) {
      std::iota(sorted[f].begin(), sorted[f].end(), 0);
      std::stable_sort(sorted[f].begin(), sorted[f].end(),
                       [&](int a, int b) { return x_(a, f) < x_(b, f); });
    }
    go_left_.assign(n, 0);
    Grow(sorted, 0);
    return RegressionTree(std::move(nodes_));
  }

 private:
  int Grow(const std::vector<std::vector<int>>& sorted, int depth) {
    const std::vector<int>& samples = sorted.front();
    const auto n = static_cast<int>(samples.size());
    double sum_r = 0.0, sum_h = 0.0;
    for (int i : samples) {
      sum_r += r_(i);
      sum_h += h_(i);
    }
    const int id = static_cast<int>(nodes_.size());
    nodes_.push_back({});
    nodes_[id].value = sum_r / (sum_h + lambda_);
    nodes_[id].n_samples = n;
    if (depth >= max_depth_ || n < 2) return id;

    int best_feature = -1;
    double best_threshold = 0.0;
    double best_gain = kMinSplitGain;
    const double parent_term = sum_r * sum_r / n;
    for (std::size_t f = 0; f < sorted.size(); ++f) {
      const auto& order = sorted[f];
      double left_r = 0.0;
      for (int i = 0; i + 1 < n; ++i) {
        left_r += r_(order[i]);
        const double a = x_(order[i], f);
        const double b = x_(order[i + 1], f);
        if (!(a < b)) continue;
        const double right_r = sum_r - left_r;
        const double gain = left_r * left_r / (i + 1) +
                            right_r * right_r / (n - i - 1) - parent_term;
        if (gain > best_gain) {
          best_gain = gain;
          best_feature = static_cast<int>(f);
          best_threshold = a + (b - a) * 0.5;
          if (!(best_threshold < b)) best_threshold = a;
        }
      }
    }
    if (best_feature < 0) return id;

    for (int i : samples) go_left_[i] = x_(i, best_feature) <= best_threshold;
    std::vector<std::vector<int>> left(sorted.size()), right(sorted.size());
    for (std::size_t f = 0; f < sorted.size(); ++f) {
      for (int i : sorted[f]) (go_left_[i] ? left[f] : right[f]).push_back(i);
    }
    const int l = Grow(left, depth + 1);
    const int r = Grow(right, depth + 1);
    auto& node = nodes_[id];
    node.feature = best_feature;
    node.threshold = best_threshold;
    node.gain = best_gain;
    node.left = l;
    node.right = r;
    return id;
  }

  const Eigen::MatrixXd& x_;
  const Eigen::VectorXd& r_;
  const Eigen::VectorXd& h_;
  int max_depth_;
  double lambda_;
  std::vector<char> go_left_;
  std::vector<RegressionTree::Node> nodes_;
};

void ValidateTrainingData(const Eigen::MatrixXd& x, std::span<const int> y,
                          int num_classes) {
  if (x.rows() == 0) throw DataError("GBDT fit needs at least one sample");
  if (x.cols() == 0) throw DataError("GBDT fit needs at least one feature");
  if (static_cast<std::size_t>(x.rows()) != y.size()) {
    throw DataError("feature rows and label count differ");
  }
  if (!x.allFinite()) throw DataError("GBDT features must be finite");
  if (num_classes < 1) throw DataError("GBDT needs at least one class");
  for (int label : y) {
    if (label < 0 || label >= num_classes) {
      throw DataError("label " + std::to_string(label) + " out of range");
    }
  }
}

void ValidateConfig(const GbdtConfig& c) {
  if (!(c.learning_rate > 0.0) || c.n_estimators < 0 || c.max_depth < 0 ||
      !(c.l2_leaf_regularization >= 0.0)) {
    throw DataError("invalid GBDT config: " + c.ToString());
  }
}

double MeanCrossEntropy(const Eigen::MatrixXd& probs, std::span<const int> y) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < probs.rows(); ++i) {
    total -= std::log(std::max(probs(i, y[i]), 1e-300));
  }
  return total / static_cast<double>(probs.rows());
}

Eigen::MatrixXd SelectRows(const Eigen::MatrixXd& x, const std::vector<int>& rows) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), x.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(i) = x.row(rows[i]);
  return out;
}

}  // namespace

std::string GbdtConfig::ToString() const {
  std::ostringstream os;
  os << "learning_rate=" << learning_rate << " n_estimators=" << n_estimators
     << " max_depth=" << max_depth << " lambda=" << l2_leaf_regularization;
  return os.str();
}

GbdtConfig DefaultGbdtConfig() { return {0.3, 60, 2, 1.0, 0}; }

std::vector<GbdtConfig> GbdtGrid(double l2_leaf_regularization, std::uint64_t seed) {
  std::vector<GbdtConfig> grid;
  for (double lr : {0.1, 0.3})
    for (int n : {20, 40, 60, 80, 100})
      for (int depth : {2, 4, 6, 8})
        grid.push_back({lr, n, depth, l2_leaf_regularization, seed});
  return grid;
}

int RegressionTree::Depth() const {
  std::vector<std::pair<int, int>> stack{{0, 0}};
  int depth = 0;
  while (!stack.empty()) {
    const auto [i, d] = stack.back();
    stack.pop_back();
    depth = std::max(depth, d);
    if (!nodes_[i].is_leaf()) {
      stack.emplace_back(nodes_[i].left, d + 1);
      stack.emplace_back(nodes_[i].right, d + 1);
    }
  }
  return depth;
}

RegressionTree FitRegressionTree(const Eigen::MatrixXd& features,
                                 const Eigen::VectorXd& residuals,
                                 const Eigen::VectorXd& hessians, int max_depth,
                                 double l2_leaf_regularization) {
  if (features.rows() == 0 || features.cols() == 0) {
    throw DataError("cannot fit a tree on empty data");
  }
  return TreeBuilder(features, residuals, hessians, max_depth, l2_leaf_regularization)
      .Build();
}

GbdtModel GbdtModel::Constant(Eigen::VectorXd base_scores, int num_features,
                              double learning_rate) {
  GbdtModel m;
  m.base_scores_ = std::move(base_scores);
  m.num_features_ = num_features;
  m.learning_rate_ = learning_rate;
  return m;
}

Eigen::VectorXd GbdtModel::RawScores(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (x.size() != num_features_) {
    throw DataError("GBDT input has " + std::to_string(x.size()) +
                    " features, model expects " + std::to_string(num_features_));
  }
  Eigen::VectorXd tree_sum = Eigen::VectorXd::Zero(num_classes());
  for (const auto& round : rounds_) {
    for (int k = 0; k < num_classes(); ++k) tree_sum(k) += round[k].Predict(x);
  }
  return base_scores_ + learning_rate_ * tree_sum;
}

Eigen::VectorXd GbdtModel::PredictProba(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  const Eigen::VectorXd raw = RawScores(x);
  return SoftmaxRows(raw.transpose()).transpose();
}

Eigen::MatrixXd GbdtModel::PredictProbaBatch(const Eigen::MatrixXd& features) const {
  Eigen::MatrixXd out(features.rows(), num_classes());
  for (Eigen::Index i = 0; i < features.rows(); ++i) {
    const Eigen::VectorXd x = features.row(i).transpose();
    out.row(i) = PredictProba(x).transpose();
  }
  return out;
}

int GbdtModel::Predict(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  Eigen::Index best = 0;
  PredictProba(x).maxCoeff(&best);
  return static_cast<int>(best);
}

GbdtModel FitGbdt(const Eigen::MatrixXd& features, std::span<const int> labels,
                  int num_classes, const GbdtConfig& config,
                  std::vector<double>* loss_trace) {
  ValidateTrainingData(features, labels, num_classes);
  ValidateConfig(config);
  const auto n = features.rows();

  Eigen::MatrixXd onehot = Eigen::MatrixXd::Zero(n, num_classes);
  for (Eigen::Index i = 0; i < n; ++i) onehot(i, labels[i]) = 1.0;

  GbdtModel model;
  model.num_features_ = static_cast<int>(features.cols());
  model.learning_rate_ = config.learning_rate;
  const Eigen::VectorXd prior = onehot.colwise().mean().transpose();
  model.base_scores_ = prior.cwiseMax(kMinClassPrior).array().log().matrix();

  // Training raw scores, kept exactly as PredictProba would rebuild them:
  // base + lr * (sum of tree outputs).
  Eigen::MatrixXd tree_sum = Eigen::MatrixXd::Zero(n, num_classes);
  auto logits = [&] {
    return Eigen::MatrixXd((tree_sum * config.learning_rate).rowwise() +
                           model.base_scores_.transpose());
  };
  Eigen::MatrixXd probs = SoftmaxRows(logits());
  if (loss_trace) {
    loss_trace->clear();
    loss_trace->push_back(MeanCrossEntropy(probs, labels));
  }
  for (int m = 0; m < config.n_estimators; ++m) {
    std::vector<RegressionTree> round(num_classes);
    for (int k = 0; k < num_classes; ++k) {
      const Eigen::VectorXd residuals = onehot.col(k) - probs.col(k);
      const Eigen::VectorXd hessians =
          (probs.col(k).array() * (1.0 - probs.col(k).array())).matrix();
      round[k] = FitRegressionTree(features, residuals, hessians, config.max_depth,
                                   config.l2_leaf_regularization);
    }
    for (int k = 0; k < num_classes; ++k) {
      for (Eigen::Index i = 0; i < n; ++i) {
        tree_sum(i, k) += round[k].Predict(features.row(i));
      }
    }
    model.rounds_.push_back(std::move(round));
    probs = SoftmaxRows(logits());
    if (loss_trace) loss_trace->push_back(MeanCrossEntropy(probs, labels));
  }
  return model;
}

double MeanLogLoss(const GbdtModel& model, const Eigen::MatrixXd& features,
                   std::span<const int> labels) {
  return MeanCrossEntropy(model.PredictProbaBatch(features), labels);
}

double Accuracy(const GbdtModel& model, const Eigen::MatrixXd& features,
                std::span<const int> labels) {
  if (features.rows() == 0) return 0.0;
  std::size_t hits = 0;
  for (Eigen::Index i = 0; i < features.rows(); ++i) {
    const Eigen::VectorXd x = features.row(i).transpose();
    hits += model.Predict(x) == labels[i];
  }
  return static_cast<double>(hits) / static_cast<double>(features.rows());
}

std::string GbdtModel::ToJson() const {
  nlohmann::ordered_json j;
  j["format"] = "fever-gbdt";
  j["version"] = kModelFormatVersion;
  j["num_classes"] = num_classes();
  j["num_features"] = num_features_;
  j["learning_rate"] = learning_rate_;
  j["base_scores"] = std::vector<double>(base_scores_.data(),
                                         base_scores_.data() + base_scores_.size());
  auto rounds = nlohmann::ordered_json::array();
  for (const auto& round : rounds_) {
    auto trees = nlohmann::ordered_json::array();
    for (const auto& tree : round) {
      auto nodes = nlohmann::ordered_json::array();
      for (const auto& n : tree.nodes()) {
        nodes.push_back({n.feature, n.threshold, n.left, n.right, n.value, n.gain,
                         n.n_samples});
      }
      trees.push_back(std::move(nodes));
    }
    rounds.push_back(std::move(trees));
  }
  j["rounds"] = std::move(rounds);
  return j.dump();
}

GbdtModel GbdtModel::FromJson(const std::string& json) {
  const auto j = nlohmann::json::parse(json, nullptr, false);
  if (j.is_discarded() || !j.is_object() || j.value("format", "") != "fever-gbdt") {
    throw DataError("not a GBDT model file");
  }
  if (j.value("version", 0) != kModelFormatVersion) {
    throw DataError("unsupported GBDT model version");
  }
  try {
    GbdtModel m;
    m.num_features_ = j.at("num_features").get<int>();
    m.learning_rate_ = j.at("learning_rate").get<double>();
    const auto base = j.at("base_scores").get<std::vector<double>>();
    m.base_scores_ = Eigen::Map<const Eigen::VectorXd>(base.data(),
                                                       static_cast<Eigen::Index>(base.size()));
    if (j.at("num_classes").get<int>() != m.num_classes()) {
      throw DataError("GBDT model class count mismatch");
    }
    for (const auto& round : j.at("rounds")) {
      std::vector<RegressionTree> trees;
      for (const auto& tree : round) {
        std::vector<RegressionTree::Node> nodes;
        for (const auto& n : tree) {
          RegressionTree::Node node;
          node.feature = n.at(0).get<int>();
          node.threshold = n.at(1).get<double>();
          node.left = n.at(2).get<int>();
          node.right = n.at(3).get<int>();
          node.value = n.at(4).get<double>();
          node.gain = n.at(5).get<double>();
          node.n_samples = n.at(6).get<int>();
          nodes.push_back(node);
        }
        const auto count = static_cast<int>(nodes.size());
        for (const auto& node : nodes) {
          if (!node.is_leaf() &&
              (node.feature >= m.num_features_ || node.left <= 0 || node.right <= 0 ||
               node.left >= count || node.right >= count)) {
            throw DataError("GBDT model has a malformed tree");
          }
        }
        if (nodes.empty()) throw DataError("GBDT model has an empty tree");
        trees.emplace_back(std::move(nodes));
      }
      if (static_cast<int>(trees.size()) != m.num_classes()) {
        throw DataError("GBDT round has the wrong number of trees");
      }
      m.rounds_.push_back(std::move(trees));
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed GBDT model: ") + e.what());
  }
}

std::vector<int> AssignFolds(std::span<const int> labels, int folds, std::uint64_t seed,
                             bool* stratified) {
  if (folds < 2) throw DataError("cross-validation needs at least 2 folds");
  if (labels.size() < static_cast<std::size_t>(folds)) {
    throw DataError("cross-validation needs at least as many samples as folds");
  }
  std::mt19937_64 rng(seed);
  std::vector<int> fold(labels.size(), 0);
  const int max_label = *std::max_element(labels.begin(), labels.end());
  std::vector<std::vector<int>> by_class(max_label + 1);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    by_class[labels[i]].push_back(static_cast<int>(i));
  }
  const bool can_stratify = std::all_of(by_class.begin(), by_class.end(), [&](const auto& c) {
    return c.empty() || c.size() >= static_cast<std::size_t>(folds);
  });
  if (stratified) *stratified = can_stratify;
  if (can_stratify) {
    std::size_t dealt = 0;
    for (auto& members : by_class) {
      std::shuffle(members.begin(), members.end(), rng);
      for (int i : members) fold[i] = static_cast<int>(dealt++ % folds);
    }
  } else {
    std::vector<int> all(labels.size());
    std::iota(all.begin(), all.end(), 0);
    std::shuffle(all.begin(), all.end(), rng);
    for (std::size_t j = 0; j < all.size(); ++j) fold[all[j]] = static_cast<int>(j % folds);
  }
  return fold;
}

CvReport GridSearchCv(const Eigen::MatrixXd& features, std::span<const int> labels,
                      int num_classes, std::span<const GbdtConfig> grid, int folds,
                      std::uint64_t seed, int threads) {
  if (grid.empty()) throw DataError("GBDT grid search needs a non-empty grid");
  ValidateTrainingData(features, labels, num_classes);
  CvReport report;
  report.folds = folds;
  const std::vector<int> fold_of = AssignFolds(labels, folds, seed, &report.stratified);

  std::vector<Eigen::MatrixXd> train_x(folds), valid_x(folds);
  std::vector<std::vector<int>> train_y(folds), valid_y(folds);
  for (int f = 0; f < folds; ++f) {
    std::vector<int> train_rows, valid_rows;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      (fold_of[i] == f ? valid_rows : train_rows).push_back(static_cast<int>(i));
    }
    train_x[f] = SelectRows(features, train_rows);
    valid_x[f] = SelectRows(features, valid_rows);
    for (int i : train_rows) train_y[f].push_back(labels[i]);
    for (int i : valid_rows) valid_y[f].push_back(labels[i]);
  }

  report.rows.resize(grid.size());
  std::vector<double> accuracy(grid.size() * folds, 0.0);
  ParallelFor(accuracy.size(), threads, [&](std::size_t job) {
    const std::size_t g = job / folds;
    const int f = static_cast<int>(job % folds);
    const GbdtModel model = FitGbdt(train_x[f], train_y[f], num_classes, grid[g]);
    accuracy[job] = Accuracy(model, valid_x[f], valid_y[f]);
  });
  for (std::size_t g = 0; g < grid.size(); ++g) {
    CvRow& row = report.rows[g];
    row.config = grid[g];
    row.fold_accuracy.assign(accuracy.begin() + g * folds, accuracy.begin() + (g + 1) * folds);
    row.mean_accuracy =
        std::accumulate(row.fold_accuracy.begin(), row.fold_accuracy.end(), 0.0) / folds;
    if (row.mean_accuracy > report.rows[report.best].mean_accuracy) report.best = g;
  }
  return report;
}

std::string CvReport::ToCsv() const {
  std::ostringstream os;
  os << "learning_rate,n_estimators,max_depth,mean_accuracy,best\n";
  os.precision(6);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& c = rows[i].config;
    os << c.learning_rate << ',' << c.n_estimators << ',' << c.max_depth << ','
       << std::fixed << rows[i].mean_accuracy << std::defaultfloat << ','
       << (i == best ? 1 : 0) << '\n';
  }
  return os.str();
}

}  // namespace fever
