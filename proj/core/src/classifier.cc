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
#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>
#include <utility>

#include "absl/status/status.h"
#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_split.h"
#include "absl/strings/string_view.h"

namespace aggmia {
namespace {

constexpr double kMinScale = 1e-12;
constexpr std::string_view kMagic = "aggmia-classifier 1";

std::string HexDouble(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::hex);
  return std::string(buf, end);
}

bool ParseHexDouble(std::string_view s, double* out) {
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), *out,
                                   std::chars_format::hex);
  return ec == std::errc() && ptr == s.data() + s.size();
}

double L1Norm(const Eigen::VectorXd& w) { return w.lpNorm<1>(); }

}  // namespace

double Softplus(double z) {
  return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

double Sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

LogisticObjective::LogisticObjective(Eigen::MatrixXd features,
                                     Eigen::VectorXd labels)
    : features_(std::move(features)), labels_(std::move(labels)) {}

double LogisticObjective::Value(const Eigen::VectorXd& w, double bias) const {
  const Eigen::VectorXd z = (features_ * w).array() + bias;
  double loss = 0;
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    loss += Softplus(z[i]) - labels_[i] * z[i];
  }
  return loss / static_cast<double>(z.size());
}

double LogisticObjective::ValueAndGradient(const Eigen::VectorXd& w,
                                           double bias, Eigen::VectorXd* grad_w,
                                           double* grad_bias) const {
  const Eigen::VectorXd z = (features_ * w).array() + bias;
  const double n = static_cast<double>(z.size());
  Eigen::VectorXd residual(z.size());
  double loss = 0;
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    loss += Softplus(z[i]) - labels_[i] * z[i];
    residual[i] = (Sigmoid(z[i]) - labels_[i]) / n;
  }
  *grad_w = features_.transpose() * residual;
  *grad_bias = residual.sum();
  return loss / n;
}

absl::StatusOr<MembershipClassifier> MembershipClassifier::Create(
    Dims dims, std::vector<double> weights, std::vector<double> mean,
    std::vector<double> scale, double bias, double decision_threshold) {
  const std::size_t cells = dims.cells();
  if (weights.size() != cells || mean.size() != cells || scale.size() != cells) {
    return absl::InvalidArgumentError("classifier vectors do not match dims");
  }
  for (std::size_t i = 0; i < cells; ++i) {
    if (!std::isfinite(weights[i]) || !std::isfinite(mean[i]) ||
        !std::isfinite(scale[i]) || scale[i] < 0) {
      return absl::InvalidArgumentError(
          absl::StrCat("non-finite or negative classifier entry at cell ", i));
    }
  }
  if (!std::isfinite(bias) || std::isnan(decision_threshold)) {
    return absl::InvalidArgumentError("invalid bias or threshold");
  }
  MembershipClassifier clf;
  clf.dims_ = dims;
  clf.weights_ = std::move(weights);
  clf.mean_ = std::move(mean);
  clf.scale_ = std::move(scale);
  clf.bias_ = bias;
  clf.decision_threshold_ = decision_threshold;
  return clf;
}

MembershipClassifier MembershipClassifier::Zero(Dims dims) {
  MembershipClassifier clf;
  clf.dims_ = dims;
  clf.weights_.assign(dims.cells(), 0.0);
  clf.mean_.assign(dims.cells(), 0.0);
  clf.scale_.assign(dims.cells(), 0.0);
  return clf;
}

int MembershipClassifier::NonZeroWeights() const {
  return static_cast<int>(
      std::count_if(weights_.begin(), weights_.end(), [](double w) { return w != 0; }));
}

absl::StatusOr<double> MembershipClassifier::DecisionValue(
    std::span<const double> counts) const {
  if (counts.size() != weights_.size()) {
    return absl::InvalidArgumentError(
        absl::StrCat("aggregate has ", counts.size(), " cells, classifier expects ",
                     weights_.size()));
  }
  double z = bias_;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (scale_[i] > 0 && weights_[i] != 0) {
      z += weights_[i] * (counts[i] - mean_[i]) / scale_[i];
    }
  }
  return z;
}

absl::StatusOr<double> MembershipClassifier::DecisionValue(
    const AggregateMatrix& a) const {
  if (!(a.dims() == dims_)) {
    return absl::InvalidArgumentError("aggregate dims do not match classifier");
  }
  return DecisionValue(a.counts());
}

absl::StatusOr<double> MembershipClassifier::Score(const AggregateMatrix& a) const {
  absl::StatusOr<double> z = DecisionValue(a);
  if (!z.ok()) return z.status();
  return Sigmoid(*z);
}

absl::StatusOr<bool> MembershipClassifier::PredictIn(const AggregateMatrix& a) const {
  absl::StatusOr<double> z = DecisionValue(a);
  if (!z.ok()) return z.status();
  return *z >= decision_threshold_;
}

std::string MembershipClassifier::Serialize() const {
  std::ostringstream out;
  out << kMagic << "\n";
  out << "dims " << dims_.n_rois << " " << dims_.n_epochs << "\n";
  out << "bias " << HexDouble(bias_) << "\n";
  out << "decision_threshold " << HexDouble(decision_threshold_) << "\n";
  std::size_t stored = 0;
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    if (weights_[i] != 0 || mean_[i] != 0 || scale_[i] != 0) ++stored;
  }
  out << "cells " << stored << "\n";
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    if (weights_[i] == 0 && mean_[i] == 0 && scale_[i] == 0) continue;
    out << i << " " << HexDouble(weights_[i]) << " " << HexDouble(mean_[i]) << " "
        << HexDouble(scale_[i]) << "\n";
  }
  return out.str();
}

absl::StatusOr<MembershipClassifier> MembershipClassifier::Parse(
    std::string_view text) {
  std::vector<absl::string_view> lines =
      absl::StrSplit(absl::string_view(text.data(), text.size()), '\n',
                     absl::SkipEmpty());
  auto bad = [](std::size_t line, absl::string_view what) {
    return absl::InvalidArgumentError(
        absl::StrCat("classifier line ", line + 1, ": ", what));
  };
  if (lines.size() < 5 || std::string_view(lines[0].data(), lines[0].size()) != kMagic) {
    return bad(0, "missing header");
  }
  auto fields = [&](std::size_t i) {
    return std::vector<absl::string_view>(absl::StrSplit(lines[i], ' '));
  };
  auto as_view = [](absl::string_view s) { return std::string_view(s.data(), s.size()); };

  std::vector<absl::string_view> f = fields(1);
  Dims dims;
  if (f.size() != 3 || f[0] != "dims" || !absl::SimpleAtoi(f[1], &dims.n_rois) ||
      !absl::SimpleAtoi(f[2], &dims.n_epochs) || dims.n_rois <= 0 ||
      dims.n_epochs <= 0) {
    return bad(1, "expected 'dims <rois> <epochs>'");
  }
  double bias = 0, threshold = 0;
  f = fields(2);
  if (f.size() != 2 || f[0] != "bias" || !ParseHexDouble(as_view(f[1]), &bias)) {
    return bad(2, "expected 'bias <hex>'");
  }
  f = fields(3);
  if (f.size() != 2 || f[0] != "decision_threshold" ||
      !ParseHexDouble(as_view(f[1]), &threshold)) {
    return bad(3, "expected 'decision_threshold <hex>'");
  }
  f = fields(4);
  std::size_t stored = 0;
  if (f.size() != 2 || f[0] != "cells" || !absl::SimpleAtoi(f[1], &stored)) {
    return bad(4, "expected 'cells <count>'");
  }
  if (lines.size() != 5 + stored) return bad(4, "cell count does not match body");

  const std::size_t cells = dims.cells();
  std::vector<double> weights(cells, 0.0), mean(cells, 0.0), scale(cells, 0.0);
  for (std::size_t li = 5; li < lines.size(); ++li) {
    f = fields(li);
    std::size_t index = 0;
    if (f.size() != 4 || !absl::SimpleAtoi(f[0], &index) || index >= cells ||
        !ParseHexDouble(as_view(f[1]), &weights[index]) ||
        !ParseHexDouble(as_view(f[2]), &mean[index]) ||
        !ParseHexDouble(as_view(f[3]), &scale[index])) {
      return bad(li, "expected '<cell> <weight> <mean> <scale>'");
    }
  }
  return Create(dims, std::move(weights), std::move(mean), std::move(scale), bias,
                threshold);
}

absl::StatusOr<MembershipClassifier> TrainClassifier(
    std::span<const LabeledAggregate> training, const TrainOptions& options,
    TrainReport* report) {
  if (training.empty()) return absl::InvalidArgumentError("empty training set");
  const Dims dims = training.front().aggregate.dims();
  const std::size_t cells = dims.cells();
  std::size_t n_in = 0;
  for (const LabeledAggregate& ex : training) {
    if (!(ex.aggregate.dims() == dims)) {
      return absl::InvalidArgumentError("training aggregates differ in dims");
    }
    n_in += ex.in ? 1 : 0;
  }
  if (n_in == 0 || n_in == training.size()) {
    return absl::InvalidArgumentError("training set must contain both labels");
  }
  if (!(options.l1_strength >= 0) || options.max_epochs < 1) {
    return absl::InvalidArgumentError("invalid training options");
  }
  const double n = static_cast<double>(training.size());

  std::vector<double> mean(cells, 0.0), scale(cells, 0.0);
  for (const LabeledAggregate& ex : training) {
    std::span<const double> c = ex.aggregate.counts();
    for (std::size_t j = 0; j < cells; ++j) mean[j] += c[j];
  }
  for (double& v : mean) v /= n;
  for (const LabeledAggregate& ex : training) {
    std::span<const double> c = ex.aggregate.counts();
    for (std::size_t j = 0; j < cells; ++j) {
      const double d = c[j] - mean[j];
      scale[j] += d * d;
    }
  }
  std::vector<std::size_t> active;
  for (std::size_t j = 0; j < cells; ++j) {
    scale[j] = std::sqrt(scale[j] / n);
    if (scale[j] > kMinScale) {
      active.push_back(j);
    } else {
      scale[j] = 0;
      mean[j] = 0;
    }
  }

  const Eigen::Index rows = static_cast<Eigen::Index>(training.size());
  const Eigen::Index cols = static_cast<Eigen::Index>(active.size());
  Eigen::MatrixXd x(rows, cols);
  Eigen::VectorXd y(rows);
  for (Eigen::Index i = 0; i < rows; ++i) {
    std::span<const double> c = training[static_cast<std::size_t>(i)].aggregate.counts();
    for (Eigen::Index k = 0; k < cols; ++k) {
      const std::size_t j = active[static_cast<std::size_t>(k)];
      x(i, k) = (c[j] - mean[j]) / scale[j];
    }
    y[i] = training[static_cast<std::size_t>(i)].in ? 1.0 : 0.0;
  }
  const LogisticObjective objective(std::move(x), std::move(y));
  const double lambda = options.l1_strength;

  Eigen::VectorXd w = Eigen::VectorXd::Zero(cols);
  double b = 0;
  Eigen::VectorXd grad;
  double grad_b = 0;
  double step = 1.0;
  double f = objective.ValueAndGradient(w, b, &grad, &grad_b);
  double total = f + lambda * L1Norm(w);
  TrainReport local;
  for (int epoch = 1; epoch <= options.max_epochs; ++epoch) {
    Eigen::VectorXd w_next;
    double b_next = 0;
    double f_next = 0;
    while (true) {
      w_next = w - step * grad;
      const double shrink = step * lambda;
      for (Eigen::Index k = 0; k < cols; ++k) {
        const double v = w_next[k];
        w_next[k] = v > shrink ? v - shrink : (v < -shrink ? v + shrink : 0.0);
      }
      b_next = b - step * grad_b;
      f_next = objective.Value(w_next, b_next);
      const Eigen::VectorXd dw = w_next - w;
      const double db = b_next - b;
      const double bound = f + grad.dot(dw) + grad_b * db +
                           (dw.squaredNorm() + db * db) / (2 * step);
      if (f_next <= bound + 1e-15 || step < 1e-12) break;
      step *= 0.5;
    }
    w = std::move(w_next);
    b = b_next;
    f = objective.ValueAndGradient(w, b, &grad, &grad_b);
    const double next_total = f + lambda * L1Norm(w);
    const double change = std::abs(total - next_total);
    total = next_total;
    local.epochs = epoch;
    if (change < options.tolerance) {
      local.converged = true;
      break;
    }
  }
  local.objective = total;
  if (report != nullptr) *report = local;

  std::vector<double> weights(cells, 0.0);
  for (Eigen::Index k = 0; k < cols; ++k) {
    weights[active[static_cast<std::size_t>(k)]] = w[k];
  }
  return MembershipClassifier::Create(dims, std::move(weights), std::move(mean),
                                      std::move(scale), b, 0.0);
}

double ChooseThreshold(std::span<const double> values,
                       const std::vector<bool>& labels, double center) {
  std::vector<std::pair<double, bool>> sorted;
  sorted.reserve(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) sorted.emplace_back(values[i], labels[i]);
  std::sort(sorted.begin(), sorted.end());

  std::vector<double> candidates{center};
  if (!sorted.empty()) {
    const double lo = sorted.front().first;
    const double hi = sorted.back().first;
    candidates.push_back(std::isfinite(lo) ? lo - 1.0 : lo);
    candidates.push_back(std::isfinite(hi) ? hi + 1.0
                                           : std::numeric_limits<double>::infinity());
    for (std::size_t i = 1; i < sorted.size(); ++i) {
      const double a = sorted[i - 1].first;
      const double b = sorted[i].first;
      if (a == b) continue;
      candidates.push_back(std::isfinite(a) ? a + (b - a) / 2 : b - 1.0);
    }
  }

  double best = center;
  std::size_t best_correct = 0;
  bool first = true;
  for (double c : candidates) {
    std::size_t correct = 0;
    for (const auto& [v, in] : sorted) correct += ((v >= c) == in) ? 1 : 0;
    const bool closer = std::abs(c - center) < std::abs(best - center);
    if (first || correct > best_correct || (correct == best_correct && closer)) {
      best = c;
      best_correct = correct;
      first = false;
    }
  }
  return best;
}

absl::StatusOr<MembershipClassifier> TuneThreshold(
    MembershipClassifier clf, std::span<const LabeledAggregate> validation) {
  std::vector<double> values;
  std::vector<bool> labels;
  bool has_in = false, has_out = false;
  for (const LabeledAggregate& ex : validation) {
    absl::StatusOr<double> z = clf.DecisionValue(ex.aggregate);
    if (!z.ok()) return z.status();
    values.push_back(*z);
    labels.push_back(ex.in);
    (ex.in ? has_in : has_out) = true;
  }
  if (!has_in || !has_out) {
    return absl::InvalidArgumentError("validation set must contain both labels");
  }
  clf.set_decision_threshold(ChooseThreshold(values, labels, 0.0));
  return clf;
}

}  // namespace aggmia
