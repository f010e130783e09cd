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

#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "oracles.hpp"

namespace fever {
namespace {

SoftmaxTriple T(double r, double n, double s) { return SoftmaxTriple(r, n, s); }

ScoredEvidence E(std::string page, int line, SoftmaxTriple probs, double score) {
  return {{std::move(page), line}, probs, score};
}

std::vector<ScoredEvidence> RandomEvidence(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<ScoredEvidence> out;
  for (int i = 0; i < n; ++i) {
    const double a = u(rng), b = u(rng) * (1.0 - a);
    // Coarse scores so ties on retrieval score actually happen.
    out.push_back(E("P" + std::to_string(rng() % 3), i, T(a, b, 1.0 - a - b),
                    static_cast<double>(rng() % 4) / 4.0));
  }
  return out;
}

TEST(Features, MixedIsSixByFour) {
  std::vector<ScoredEvidence> ev;
  for (int i = 0; i < 5; ++i) ev.push_back(E("P", i, T(0.1, 0.2, 0.7), 0.1 * (i + 1)));
  const auto f = BuildFeatures(ev, T(0.2, 0.3, 0.5), AggregationMethod::kMixed);
  EXPECT_EQ(f.rows.rows(), 6);
  EXPECT_EQ(f.Flatten().size(), 24);
  EXPECT_EQ(FeatureLength(AggregationMethod::kMixed), 24);
  EXPECT_EQ(f.rows.row(5).head<3>().transpose(), T(0.2, 0.3, 0.5));
  EXPECT_NEAR(f.rows(5, 3), (0.1 + 0.2 + 0.3 + 0.4 + 0.5) / 5.0, 1e-15);
}

TEST(Features, EmptySingletonIsAllPadding) {
  const auto f = BuildFeatures({}, std::nullopt, AggregationMethod::kSingleton);
  EXPECT_EQ(f.rows.rows(), 5);
  EXPECT_EQ(f.Flatten().size(), 20);
  EXPECT_EQ(FeatureLength(AggregationMethod::kSingleton), 20);
  for (int r = 0; r < 5; ++r) {
    EXPECT_DOUBLE_EQ(f.rows(r, 0), 1.0 / 3.0);
    EXPECT_DOUBLE_EQ(f.rows(r, 1), 1.0 / 3.0);
    EXPECT_DOUBLE_EQ(f.rows(r, 2), 1.0 / 3.0);
    EXPECT_DOUBLE_EQ(f.rows(r, 3), 0.0);
  }
}

TEST(Features, RowsSortedByRetrievalScore) {
  const std::vector<ScoredEvidence> ev = {E("A", 0, T(1, 0, 0), 0.9), E("B", 0, T(0, 1, 0), 0.4),
                                          E("C", 0, T(0, 0, 1), 0.7)};
  const auto f = BuildFeatures(ev, T(0.3, 0.3, 0.4), AggregationMethod::kMixed);
  EXPECT_DOUBLE_EQ(f.rows(0, 3), 0.9);
  EXPECT_DOUBLE_EQ(f.rows(1, 3), 0.7);
  EXPECT_DOUBLE_EQ(f.rows(2, 3), 0.4);
  EXPECT_DOUBLE_EQ(f.rows(3, 3), 0.0);
  EXPECT_DOUBLE_EQ(f.rows(4, 3), 0.0);
  EXPECT_DOUBLE_EQ(f.rows(1, 2), 1.0);
  // Padding counts as zero in the mean.
  EXPECT_NEAR(f.rows(5, 3), 2.0 / 5.0, 1e-15);
}

TEST(Features, Errors) {
  std::vector<ScoredEvidence> six(6, E("P", 0, T(0, 0, 1), 0.5));
  EXPECT_THROW(BuildFeatures(six, std::nullopt, AggregationMethod::kSingleton), DataError);
  EXPECT_THROW(BuildFeatures({}, std::nullopt, AggregationMethod::kMixed), DataError);
  EXPECT_THROW(BuildFeatures({}, T(0, 0, 1), AggregationMethod::kConcatenated), DataError);
  EXPECT_THROW(FeatureLength(AggregationMethod::kConcatenated), DataError);
  EXPECT_THROW(AggregationFeatures::Unflatten(Eigen::VectorXd::Zero(21)), DataError);
}

TEST(Features, PermutationInvariant) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 300; ++trial) {
    auto ev = RandomEvidence(rng, static_cast<int>(rng() % 6));
    const auto want = BuildFeatures(ev, T(0.1, 0.1, 0.8), AggregationMethod::kMixed);
    std::shuffle(ev.begin(), ev.end(), rng);
    EXPECT_EQ(BuildFeatures(ev, T(0.1, 0.1, 0.8), AggregationMethod::kMixed), want);
  }
}

TEST(Features, FlattenRoundTrip) {
  std::mt19937_64 rng(32);
  for (int trial = 0; trial < 100; ++trial) {
    const auto ev = RandomEvidence(rng, static_cast<int>(rng() % 6));
    for (auto method : {AggregationMethod::kSingleton, AggregationMethod::kMixed}) {
      const auto f = BuildFeatures(ev, T(0.5, 0.25, 0.25), method);
      EXPECT_EQ(AggregationFeatures::Unflatten(f.Flatten()), f);
      // Row-major: row r, column c sits at 4r + c.
      const Eigen::VectorXd flat = f.Flatten();
      for (Eigen::Index r = 0; r < f.rows.rows(); ++r)
        for (int c = 0; c < 4; ++c) EXPECT_EQ(flat(4 * r + c), f.rows(r, c));
    }
  }
}

TEST(Concatenated, ArgmaxWithTieOrder) {
  EXPECT_EQ(AggregateConcatenated(T(0.1, 0.2, 0.7)), Label::kSupports);
  EXPECT_EQ(AggregateConcatenated(T(0.5, 0.3, 0.2)), Label::kRefutes);
  EXPECT_EQ(AggregateConcatenated(T(0.2, 0.6, 0.2)), Label::kNotEnoughInfo);
  EXPECT_EQ(AggregateConcatenated(T(1.0 / 3, 1.0 / 3, 1.0 / 3)), Label::kSupports);
  EXPECT_EQ(AggregateConcatenated(T(0.4, 0.4, 0.2)), Label::kRefutes);
  EXPECT_EQ(AggregateConcatenated(T(0.2, 0.4, 0.4)), Label::kSupports);
}

TEST(Aggregate, DegenerateModelAlwaysSupports) {
  Eigen::MatrixXd x(4, 20);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = u(rng);
  const std::vector<int> y(4, static_cast<int>(Label::kSupports));
  const auto model = FitGbdt(x, y, 3, DefaultGbdtConfig());
  for (int trial = 0; trial < 50; ++trial) {
    const auto f = BuildFeatures(RandomEvidence(rng, static_cast<int>(rng() % 6)), std::nullopt,
                                 AggregationMethod::kSingleton);
    EXPECT_EQ(Aggregate(f, model), Label::kSupports);
  }
}

TEST(Aggregate, TwoClaimSeparableFixture) {
  const auto supports = BuildFeatures(std::vector<ScoredEvidence>{E("A", 0, T(0, 0, 1), 0.9)}, T(0, 0, 1),
                                      AggregationMethod::kMixed);
  const auto refutes = BuildFeatures(std::vector<ScoredEvidence>{E("B", 0, T(1, 0, 0), 0.9)}, T(1, 0, 0),
                                     AggregationMethod::kMixed);
  Eigen::MatrixXd x(2, 24);
  x.row(0) = supports.Flatten().transpose();
  x.row(1) = refutes.Flatten().transpose();
  const std::vector<int> y = {static_cast<int>(Label::kSupports),
                              static_cast<int>(Label::kRefutes)};
  const auto model = FitGbdt(x, y, 3, DefaultGbdtConfig());
  EXPECT_EQ(Aggregate(supports, model), Label::kSupports);
  EXPECT_EQ(Aggregate(refutes, model), Label::kRefutes);
  EXPECT_EQ(Aggregate(supports, model), Aggregate(supports, model));

  // The first SUPPORTS tree's split is one the exhaustive oracle rates best.
  const Eigen::VectorXd residuals = (Eigen::VectorXd(2) << 0.5, -0.5).finished();
  const auto& tree = model.rounds()[0][static_cast<int>(Label::kSupports)];
  ASSERT_FALSE(tree.root().is_leaf());
  const auto problems = oracle::CompareTreeWithOracle(tree, x, residuals, 2);
  EXPECT_TRUE(problems.empty()) << problems.front();
}

TEST(Aggregate, DimensionAndClassChecks) {
  const auto model20 = GbdtModel::Constant(Eigen::VectorXd::Zero(3), 20);
  const auto mixed = BuildFeatures({}, T(0, 0, 1), AggregationMethod::kMixed);
  EXPECT_THROW(Aggregate(mixed, model20), DataError);
  const auto two_class = GbdtModel::Constant(Eigen::VectorXd::Zero(2), 24);
  EXPECT_THROW(Aggregate(mixed, two_class), DataError);
}

TEST(Aggregate, OutputIsAlwaysALabel) {
  std::mt19937_64 rng(41);
  const int n = 24;
  Eigen::MatrixXd x(n, 20);
  std::vector<int> y;
  for (int i = 0; i < n; ++i) {
    x.row(i) = BuildFeatures(RandomEvidence(rng, 5), std::nullopt, AggregationMethod::kSingleton)
                   .Flatten()
                   .transpose();
    y.push_back(static_cast<int>(rng() % 3));
  }
  const auto model = FitGbdt(x, y, 3, {0.3, 10, 3, 1.0, 0});
  for (int trial = 0; trial < 100; ++trial) {
    const Label l = Aggregate(
        BuildFeatures(RandomEvidence(rng, static_cast<int>(rng() % 6)), std::nullopt,
                      AggregationMethod::kSingleton),
        model);
    EXPECT_TRUE(l == Label::kRefutes || l == Label::kNotEnoughInfo || l == Label::kSupports);
  }
}

TEST(Train, SingleConfigGrid) {
  std::vector<Label> labels;
  Eigen::MatrixXd x(12, 20);
  for (int i = 0; i < 12; ++i) {
    const Label l = static_cast<Label>(i % 3);
    SoftmaxTriple p = SoftmaxTriple::Zero();
    p(static_cast<int>(l)) = 1.0;
    x.row(i) = BuildFeatures(std::vector<ScoredEvidence>{E("P", i, p, 0.5 + 0.01 * i)}, std::nullopt,
                             AggregationMethod::kSingleton)
                   .Flatten()
                   .transpose();
    labels.push_back(l);
  }
  const std::vector<GbdtConfig> grid = {{0.3, 20, 2, 1.0, 0}};
  const auto trained = TrainAggregator(x, labels, grid);
  EXPECT_EQ(trained.report.rows.size(), 1u);
  EXPECT_EQ(trained.model.rounds().size(), 20u);
  EXPECT_EQ(trained.model.num_features(), 20);
  // Refit on everything does at least as well as cross-validation.
  std::vector<int> y;
  for (Label l : labels) y.push_back(static_cast<int>(l));
  EXPECT_GE(Accuracy(trained.model, x, y), trained.report.rows[0].mean_accuracy);
}

}  // namespace
}  // namespace fever
