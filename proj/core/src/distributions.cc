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

#include "aggmia/distributions.h"

#include <cassert>
#include <cmath>
#include <numeric>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"

namespace aggmia {

absl::StatusOr<DiscreteDistribution> DiscreteDistribution::FromWeights(
    std::vector<double> weights) {
  if (weights.empty()) {
    return absl::InvalidArgumentError("distribution over an empty set");
  }
  double total = 0;
  for (double w : weights) {
    if (!(w >= 0) || !std::isfinite(w)) {
      return absl::InvalidArgumentError("weights must be finite and >= 0");
    }
    total += w;
  }
  if (!(total > 0)) {
    return absl::InvalidArgumentError("weights sum to zero");
  }
  for (double& w : weights) w /= total;
  return DiscreteDistribution(std::move(weights));
}

DiscreteDistribution DiscreteDistribution::Uniform(std::size_t n) {
  return DiscreteDistribution(std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

double PopulationVariance(std::span<const double> values) {
  if (values.empty()) return 0;
  const double n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double ss = 0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return ss / n;
}

double DiscreteDistribution::Variance() const { return PopulationVariance(probs_); }

double TotalVariation(const DiscreteDistribution& a,
                      const DiscreteDistribution& b) {
  assert(a.size() == b.size());
  double sum = 0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += std::abs(a[i] - b[i]);
  return 0.5 * sum;
}

double ActivityModel::Sample(Rng& rng) const {
  switch (family) {
    case Family::kExponential:
      return rng.Exponential(mean);
    case Family::kLogNormal: {
      const double mu = std::log(mean) - 0.5 * log_sigma * log_sigma;
      return std::exp(mu + log_sigma * rng.StandardNormal());
    }
  }
  return mean;
}

std::string ActivityModel::ToString() const {
  if (family == Family::kExponential) return absl::StrCat("exponential(", mean, ")");
  return absl::StrCat("lognormal(mean=", mean, ",sigma=", log_sigma, ")");
}

}  // namespace aggmia
