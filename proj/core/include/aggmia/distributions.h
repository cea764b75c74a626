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

#ifndef AGGMIA_DISTRIBUTIONS_H_
#define AGGMIA_DISTRIBUTIONS_H_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "aggmia/delaunay.h"
#include "aggmia/random.h"

namespace aggmia {

// Probability mass function over ROIs or epochs. Entries are nonnegative and
// sum to one.
class DiscreteDistribution {
 public:
  DiscreteDistribution() = default;

  // Normalizes nonnegative weights. Rejects an empty, negative, non-finite or
  // all-zero weight vector.
  static absl::StatusOr<DiscreteDistribution> FromWeights(
      std::vector<double> weights);
  static DiscreteDistribution Uniform(std::size_t n);

  std::size_t size() const { return probs_.size(); }
  double operator[](std::size_t i) const { return probs_[i]; }
  std::span<const double> probs() const { return probs_; }

  // Population variance of the probabilities: sum (p_i - 1/n)^2 / n.
  double Variance() const;

  friend bool operator==(const DiscreteDistribution&,
                         const DiscreteDistribution&) = default;

 private:
  explicit DiscreteDistribution(std::vector<double> probs)
      : probs_(std::move(probs)) {}
  std::vector<double> probs_;
};

// Total-variation distance, half the L1 distance. Sizes must match.
double TotalVariation(const DiscreteDistribution& a,
                      const DiscreteDistribution& b);

// Population variance of an arbitrary probability-like vector.
double PopulationVariance(std::span<const double> values);

// Distribution of the number of visits in a trace. The estimator only ever
// produces kExponential; kLogNormal exists for ground-truth worlds.
struct ActivityModel {
  enum class Family { kExponential, kLogNormal };
  Family family = Family::kExponential;
  double mean = 1.0;
  // Shape of the underlying normal for kLogNormal.
  double log_sigma = 1.0;

  static ActivityModel Exponential(double mean) {
    return {Family::kExponential, mean, 0.0};
  }
  static ActivityModel LogNormal(double mean, double log_sigma) {
    return {Family::kLogNormal, mean, log_sigma};
  }

  // One continuous draw (before rounding to a visit count).
  double Sample(Rng& rng) const;
  std::string ToString() const;
};

// The four generator inputs: space, time, activity, and ROI adjacency.
struct MarginalSet {
  DiscreteDistribution space;
  DiscreteDistribution time;
  ActivityModel activity;
  DelaunayGraph delaunay;
};

}  // namespace aggmia

#endif  // AGGMIA_DISTRIBUTIONS_H_
