// Copyright 2026 The aggmia Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "aggmia/classifier.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "gtest/gtest.h"
#include "test_util.h"

namespace aggmia {
namespace {

LabeledAggregate Labeled(Dims dims, int64_t m, std::vector<double> counts,
                         bool in) {
  auto a = AggregateMatrix::Create(dims, m, Provenance{}, std::move(counts));
  EXPECT_TRUE(a.ok()) << a.status();
  return {*a, in};
}

// Cell 0 carries a weak signal; the rest are noise.
std::vector<LabeledAggregate> NoisyProblem(int n, Dims dims, Rng& rng) {
  std::vector<LabeledAggregate> out;
  for (int i = 0; i < n; ++i) {
    const bool in = i % 2 == 0;
    std::vector<double> c(dims.cells());
    for (double& x : c) x = static_cast<double>(rng.UniformInt(6));
    c[0] = std::min(9.0, c[0] + (in ? 2.0 : 0.0) + rng.UniformInt(3));
    out.push_back(Labeled(dims, 9, std::move(c), in));
  }
  return out;
}

double TrainingAccuracy(const MembershipClassifier& clf,
                        const std::vector<LabeledAggregate>& data) {
  int correct = 0;
  for (const LabeledAggregate& x : data) correct += *clf.PredictIn(x.aggregate) == x.in;
  return static_cast<double>(correct) / data.size();
}

TEST(LogisticObjectiveTest, GradientMatchesCentralDifferences) {
  Rng rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 5 + static_cast<int>(rng.UniformInt(10));
    const int d = 2 + static_cast<int>(rng.UniformInt(6));
    Eigen::MatrixXd x(n, d);
    Eigen::VectorXd y(n), w(d);
    for (int i = 0; i < n; ++i) {
      y(i) = static_cast<double>(rng.UniformInt(2));
      for (int j = 0; j < d; ++j) x(i, j) = rng.StandardNormal();
    }
    for (int j = 0; j < d; ++j) w(j) = rng.StandardNormal();
    const double bias = rng.StandardNormal();
    const LogisticObjective f(x, y);
    Eigen::VectorXd grad;
    double grad_bias = 0;
    const double value = f.ValueAndGradient(w, bias, &grad, &grad_bias);
    EXPECT_NEAR(value, f.Value(w, bias), 1e-14);
    constexpr double kH = 1e-5;
    for (int j = 0; j <= d; ++j) {
      Eigen::VectorXd wp = w, wm = w;
      double bp = bias, bm = bias;
      if (j < d) {
        wp(j) += kH;
        wm(j) -= kH;
      } else {
        bp += kH;
        bm -= kH;
      }
      const double numeric = (f.Value(wp, bp) - f.Value(wm, bm)) / (2 * kH);
      const double analytic = j < d ? grad(j) : grad_bias;
      EXPECT_LE(std::abs(numeric - analytic),
                1e-5 * std::max(std::abs(analytic), 1e-3))
          << "trial " << trial << " coordinate " << j;
    }
  }
}

TEST(LogisticObjectiveTest, SoftplusAndSigmoidAreStable) {
  EXPECT_DOUBLE_EQ(Softplus(800), 800);
  EXPECT_EQ(Softplus(-800), 0);
  EXPECT_NEAR(Softplus(0), std::log(2.0), 1e-15);
  EXPECT_EQ(Sigmoid(0), 0.5);
  EXPECT_NEAR(Sigmoid(-800), 0, 1e-300);
  EXPECT_EQ(Sigmoid(800), 1);
}

TEST(TrainClassifierTest, SeparatesOneInformativeCell) {
  const Dims dims{1, 3};
  std::vector<LabeledAggregate> data;
  for (int i = 0; i < 20; ++i) {
    const bool in = i % 2 == 0;
    data.push_back(Labeled(dims, 20, {in ? 10.0 + i % 5 : 1.0 + i % 5, 4, double(i % 3)}, in));
  }
  auto clf = TrainClassifier(data);
  ASSERT_OK(clf);
  EXPECT_EQ(TrainingAccuracy(*clf, data), 1.0);
  EXPECT_GT(clf->weights()[0], 0);
  // The constant cell has zero spread and is dropped.
  EXPECT_EQ(clf->weights()[1], 0);
  EXPECT_EQ(clf->feature_scale()[1], 0);
}

TEST(TrainClassifierTest, RejectsSingleClassAndEmptyInput) {
  const Dims dims{1, 2};
  std::vector<LabeledAggregate> data{Labeled(dims, 3, {1, 2}, true),
                                     Labeled(dims, 3, {0, 2}, true)};
  EXPECT_EQ(TrainClassifier(data).status().code(), absl::StatusCode::kInvalidArgument);
  EXPECT_FALSE(TrainClassifier({}).ok());
}

TEST(TrainClassifierTest, DuplicatedTrainingSetGivesSameClassifier) {
  Rng rng(2);
  const std::vector<LabeledAggregate> data = NoisyProblem(60, {4, 5}, rng);
  std::vector<LabeledAggregate> doubled = data;
  doubled.insert(doubled.end(), data.begin(), data.end());
  auto a = TrainClassifier(data);
  auto b = TrainClassifier(doubled);
  ASSERT_OK(a);
  ASSERT_OK(b);
  EXPECT_EQ(a->NonZeroWeights(), b->NonZeroWeights());
  for (std::size_t i = 0; i < a->weights().size(); ++i) {
    EXPECT_NEAR(a->weights()[i], b->weights()[i], 1e-9);
    EXPECT_NEAR(a->feature_mean()[i], b->feature_mean()[i], 1e-12);
  }
  EXPECT_NEAR(a->bias(), b->bias(), 1e-9);
}

TEST(TrainClassifierTest, DeterministicBitForBit) {
  Rng rng(3);
  const std::vector<LabeledAggregate> data = NoisyProblem(80, {5, 6}, rng);
  auto a = TrainClassifier(data);
  auto b = TrainClassifier(data);
  ASSERT_OK(a);
  EXPECT_EQ(*a, *b);
}

TEST(TrainClassifierTest, StrongerPenaltyNeverAddsWeights) {
  Rng rng(4);
  const std::vector<LabeledAggregate> data = NoisyProblem(100, {6, 8}, rng);
  int previous = std::numeric_limits<int>::max();
  for (double lambda : {0.0, 0.001, 0.003, 0.01, 0.03, 0.1, 0.3, 1.0}) {
    TrainOptions options;
    options.l1_strength = lambda;
    options.max_epochs = 5000;
    options.tolerance = 1e-10;
    auto clf = TrainClassifier(data, options);
    ASSERT_OK(clf);
    EXPECT_LE(clf->NonZeroWeights(), previous) << "lambda " << lambda;
    previous = clf->NonZeroWeights();
  }
  EXPECT_EQ(previous, 0);
}

TEST(TrainClassifierTest, ReportsProgress) {
  Rng rng(5);
  const std::vector<LabeledAggregate> data = NoisyProblem(200, {3, 3}, rng);
  TrainReport report;
  TrainOptions options;
  options.max_epochs = 3;
  options.tolerance = 0;
  ASSERT_OK(TrainClassifier(data, options, &report));
  EXPECT_EQ(report.epochs, 3);
  EXPECT_FALSE(report.converged);
  ASSERT_OK(TrainClassifier(data, {}, &report));
  EXPECT_TRUE(report.converged) << report.epochs;
  EXPECT_LT(report.epochs, 500);
  EXPECT_GT(report.objective, 0);
}

TEST(ScoreTest, ZeroClassifierScoresHalf) {
  const MembershipClassifier clf = MembershipClassifier::Zero({2, 3});
  const AggregateMatrix a(Dims{2, 3}, 4);
  EXPECT_EQ(*clf.Score(a), 0.5);
  EXPECT_TRUE(*clf.PredictIn(a));
  EXPECT_EQ(clf.threshold(), 0.5);
}

TEST(ScoreTest, HandComputedTwoByTwo) {
  auto clf = MembershipClassifier::Create({2, 2}, {0.5, -1, 0, 2}, {1, 1, 1, 1},
                                          {2, 1, 1, 0}, 0.3, 0.0);
  ASSERT_OK(clf);
  auto a = AggregateMatrix::Create({2, 2}, 9, Provenance{}, {3, 2, 5, 7});
  // 0.3 + 0.5 * (3 - 1) / 2 - 1 * (2 - 1) / 1, the zero-scale cell ignored.
  EXPECT_NEAR(*clf->DecisionValue(*a), -0.2, 1e-15);
  EXPECT_NEAR(*clf->Score(*a), 1.0 / (1.0 + std::exp(0.2)), 1e-15);
  EXPECT_FALSE(*clf->PredictIn(*a));
  EXPECT_FALSE(clf->Score(AggregateMatrix(Dims{2, 3}, 1)).ok());
}

TEST(ScoreTest, MonotoneInLinearScore) {
  auto clf = MembershipClassifier::Create({1, 3}, {0.4, -0.2, 1.1}, {0, 0, 0},
                                          {1, 1, 1}, -0.5, 0.0);
  Rng rng(6);
  std::vector<std::pair<double, double>> pairs;
  for (int i = 0; i < 200; ++i) {
    std::vector<double> c{double(rng.UniformInt(10)), double(rng.UniformInt(10)),
                          double(rng.UniformInt(10))};
    const double linear = 0.4 * c[0] - 0.2 * c[1] + 1.1 * c[2];
    pairs.push_back({linear, *clf->Score(*AggregateMatrix::Create(
                                 {1, 3}, 9, Provenance{}, c))});
  }
  std::sort(pairs.begin(), pairs.end());
  for (std::size_t i = 1; i < pairs.size(); ++i) {
    EXPECT_LE(pairs[i - 1].second, pairs[i].second);
  }
}

TEST(SerializeTest, RoundTripRestoresEveryField) {
  Rng rng(7);
  const std::vector<LabeledAggregate> data = NoisyProblem(50, {3, 4}, rng);
  auto clf = TrainClassifier(data);
  ASSERT_OK(clf);
  clf->set_decision_threshold(0.1234567890123);
  auto parsed = MembershipClassifier::Parse(clf->Serialize());
  ASSERT_OK(parsed);
  EXPECT_EQ(*parsed, *clf);
  EXPECT_FALSE(MembershipClassifier::Parse("aggmia-classifier 2\n").ok());
  EXPECT_FALSE(MembershipClassifier::Parse("").ok());
}

TEST(ChooseThresholdTest, SeparatedValuesUseMidpointOfGap) {
  EXPECT_DOUBLE_EQ(ChooseThreshold(std::vector<double>{1, 2, 5, 8},
                                   {false, false, true, true}, 0.0),
                   3.5);
  // The center itself wins a tie when it lies inside the gap.
  EXPECT_DOUBLE_EQ(ChooseThreshold(std::vector<double>{-3, -2, 1, 4},
                                   {false, false, true, true}, 0.0),
                   0.0);
}

TEST(ChooseThresholdTest, IdenticalValuesFallBackToCenter) {
  const std::vector<double> v(6, 1.7);
  EXPECT_EQ(ChooseThreshold(v, {true, false, true, false, true, false}, 0.0), 0.0);
}

TEST(ChooseThresholdTest, BeatsEveryCutoffInExhaustiveSweep) {
  Rng rng(8);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + static_cast<int>(rng.UniformInt(15));
    std::vector<double> v(n);
    std::vector<bool> labels(n);
    for (int i = 0; i < n; ++i) {
      v[i] = static_cast<double>(rng.UniformInt(6)) - 2.5;
      labels[i] = rng.UniformInt(2) == 1;
    }
    auto accuracy = [&](double cutoff) {
      int correct = 0;
      for (int i = 0; i < n; ++i) correct += (v[i] >= cutoff) == labels[i];
      return correct;
    };
    const int chosen = accuracy(ChooseThreshold(v, labels, 0.0));
    for (double cutoff : v) EXPECT_GE(chosen, accuracy(cutoff));
    EXPECT_GE(chosen, accuracy(std::numeric_limits<double>::infinity()));
  }
}

TEST(TuneThresholdTest, RequiresBothLabels) {
  const Dims dims{1, 2};
  std::vector<LabeledAggregate> one_class{Labeled(dims, 3, {1, 2}, true)};
  EXPECT_FALSE(TuneThreshold(MembershipClassifier::Zero(dims), one_class).ok());
  std::vector<LabeledAggregate> both{Labeled(dims, 3, {1, 2}, true),
                                     Labeled(dims, 3, {0, 2}, false)};
  auto tuned = TuneThreshold(MembershipClassifier::Zero(dims), both);
  ASSERT_OK(tuned);
  EXPECT_EQ(tuned->threshold(), 0.5);
}

}  // namespace
}  // namespace aggmia
