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

#ifndef AGGMIA_CLASSIFIER_H_
#define AGGMIA_CLASSIFIER_H_

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "Eigen/Dense"
#include "absl/status/statusor.h"
#include "aggmia/mobility.h"

namespace aggmia {

// One training, validation or test example: a released aggregate and whether
// the target contributed to it.
struct LabeledAggregate {
  AggregateMatrix aggregate;
  bool in = false;
};

// Mean logistic loss over rows of `features` with 0/1 `labels`, as a function
// of weights and an unpenalized bias.
class LogisticObjective {
 public:
  LogisticObjective(Eigen::MatrixXd features, Eigen::VectorXd labels);

  double Value(const Eigen::VectorXd& w, double bias) const;
  // Returns the loss and writes the gradient.
  double ValueAndGradient(const Eigen::VectorXd& w, double bias,
                          Eigen::VectorXd* grad_w, double* grad_bias) const;

  const Eigen::MatrixXd& features() const { return features_; }
  Eigen::Index num_examples() const { return features_.rows(); }
  Eigen::Index num_features() const { return features_.cols(); }

 private:
  Eigen::MatrixXd features_;
  Eigen::VectorXd labels_;
};

// Numerically stable log(1 + exp(z)).
double Softplus(double z);
double Sigmoid(double z);

class MembershipClassifier {
 public:
  // Weights live in standardized feature space: the decision value of an
  // aggregate x is bias + sum_i weights[i] * (x_i - mean[i]) / scale[i], with
  // cells of scale 0 ignored.
  static absl::StatusOr<MembershipClassifier> Create(
      Dims dims, std::vector<double> weights, std::vector<double> mean,
      std::vector<double> scale, double bias, double decision_threshold);

  // Zero weights and bias; scores every aggregate at 0.5.
  static MembershipClassifier Zero(Dims dims);

  Dims dims() const { return dims_; }
  std::span<const double> weights() const { return weights_; }
  std::span<const double> feature_mean() const { return mean_; }
  std::span<const double> feature_scale() const { return scale_; }
  double bias() const { return bias_; }
  int NonZeroWeights() const;

  // Cutoff on the linear decision value; threshold() is the same cutoff on
  // the sigmoid scale.
  double decision_threshold() const { return decision_threshold_; }
  double threshold() const { return Sigmoid(decision_threshold_); }
  void set_decision_threshold(double t) { decision_threshold_ = t; }

  absl::StatusOr<double> DecisionValue(const AggregateMatrix& a) const;
  absl::StatusOr<double> DecisionValue(std::span<const double> counts) const;
  absl::StatusOr<double> Score(const AggregateMatrix& a) const;
  // IN iff the decision value reaches the cutoff.
  absl::StatusOr<bool> PredictIn(const AggregateMatrix& a) const;

  // Line-oriented text with hexadecimal floats, so parsing restores every
  // field bit-for-bit.
  std::string Serialize() const;
  static absl::StatusOr<MembershipClassifier> Parse(std::string_view text);

  friend bool operator==(const MembershipClassifier&,
                         const MembershipClassifier&) = default;

 private:
  MembershipClassifier() = default;

  Dims dims_;
  std::vector<double> weights_;
  std::vector<double> mean_;
  std::vector<double> scale_;
  double bias_ = 0.0;
  double decision_threshold_ = 0.0;
};

struct TrainOptions {
  // L1 penalty on the mean-loss scale.
  double l1_strength = 0.0025;
  int max_epochs = 500;
  // Stop once the penalized objective changes by less than this.
  double tolerance = 1e-6;
};

struct TrainReport {
  int epochs = 0;
  bool converged = false;
  double objective = 0.0;
};

// L1-regularized logistic regression fitted by proximal gradient descent
// with backtracking. Features are standardized with the training set's
// per-cell mean and population standard deviation. Deterministic.
absl::StatusOr<MembershipClassifier> TrainClassifier(
    std::span<const LabeledAggregate> training, const TrainOptions& options = {},
    TrainReport* report = nullptr);

// Cutoff maximizing accuracy of `value >= cutoff` against `labels`. The
// candidates are midpoints between consecutive distinct values, `center`, and
// one cutoff below and above all values; ties go to the candidate nearest
// `center`.
double ChooseThreshold(std::span<const double> values,
                       const std::vector<bool>& labels, double center);

// Calibrates the cutoff on validation data. Requires both labels.
absl::StatusOr<MembershipClassifier> TuneThreshold(
    MembershipClassifier clf, std::span<const LabeledAggregate> validation);

}  // namespace aggmia

#endif  // AGGMIA_CLASSIFIER_H_
