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

#ifndef AGGMIA_ESTIMATION_H_
#define AGGMIA_ESTIMATION_H_

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "absl/status/statusor.h"
#include "aggmia/delaunay.h"
#include "aggmia/distributions.h"
#include "aggmia/generator.h"
#include "aggmia/mobility.h"
#include "aggmia/privacy.h"
#include "aggmia/random.h"

namespace aggmia {

// Row and column sums of `a`, each normalized by the total count.
// Fails with FailedPrecondition on an all-zero aggregate.
absl::StatusOr<std::pair<DiscreteDistribution, DiscreteDistribution>>
EmpiricalMarginals(const AggregateMatrix& a);

// x -> log(1 + gamma x) with gamma = 1 / (smallest nonzero probability),
// renormalized. Zeros stay zero.
absl::StatusOr<DiscreteDistribution> LogCompress(const DiscreteDistribution& p);

// x -> x^power, renormalized. power must be >= 1.
absl::StatusOr<DiscreteDistribution> PowerTransform(const DiscreteDistribution& p,
                                                    double power);

// Expected population variance of a probability vector made by drawing `dim`
// Unif(0,1) values and normalizing them to sum one. Monte Carlo with a fixed
// internal seed and kTargetVarianceReplicates replicates; cached per dim.
inline constexpr int kTargetVarianceReplicates = 100000;
double TargetVariance(int dim);

struct PowerSelection {
  double power = 1.0;
  // Variance of the transformed distribution at `power`.
  double variance = 0.0;
  // False when p_max was reached before the target was met.
  bool converged = true;
};

inline constexpr double kPowerStep = 0.01;
inline constexpr double kDefaultMaxPower = 20.0;

// Smallest power on the grid 1, 1 + step, ... , p_max whose transformed
// variance is within `tol` of `sigma_target` or exceeds it.
PowerSelection SelectPower(const DiscreteDistribution& p, double sigma_target,
                           double tol, double p_max = kDefaultMaxPower);

enum class MeanUpdateRule {
  // mu_{n+1} = mu_n + (sum(A) - sum(A_syn(mu_n))) / m; stop on |mu_{n+1} - mu_n|.
  kFromPrevious,
  // mu_{n+1} = mu_0 + (sum(A) - sum(A_syn(mu_n))) / m; stop on |mu_{n+1} - mu_0|.
  // Kept for comparison: it oscillates instead of converging.
  kFromInitial,
};

struct MeanVisitsOptions {
  double tol = 0.5;
  int max_iter = 25;
  MeanUpdateRule rule = MeanUpdateRule::kFromPrevious;
  double floor = 0.01;
  GeneratorOptions generator;
};

struct MeanVisitsEstimate {
  double mean = 0.0;
  // sum(A) / m.
  double initial = 0.0;
  bool converged = true;
  // Set when an update drove the estimate to or below the floor.
  bool floored = false;
  // mu_0, mu_1, ... in iteration order.
  std::vector<double> iterates;
};

// Iteratively matches the total mass of a synthetic release of m traces (same
// mechanisms as `cfg`) to the mass of `released`. Without privacy, or with
// SSC at k = 0, returns sum(A)/m directly. Every synthetic group uses its
// own substream of `rng`.
absl::StatusOr<MeanVisitsEstimate> EstimateMeanVisits(
    const AggregateMatrix& released, int64_t m, const DiscreteDistribution& space,
    const DiscreteDistribution& time, const DelaunayGraph& graph,
    const PrivacyConfig& cfg, int epochs_per_day, Rng& rng,
    const MeanVisitsOptions& options = {});

enum class MarginalCorrection { kNone, kLogCompression, kPowerTransform };

struct EstimationOptions {
  MeanVisitsOptions mean_visits;
  // Power selection tolerance as a fraction of the target variance.
  double power_tol_fraction = 0.01;
  double max_power = kDefaultMaxPower;
};

struct MarginalEstimate {
  MarginalSet marginals;
  DiscreteDistribution empirical_space;
  DiscreteDistribution empirical_time;
  MarginalCorrection correction = MarginalCorrection::kNone;
  std::optional<PowerSelection> space_power;
  std::optional<PowerSelection> time_power;
  MeanVisitsEstimate mean_visits;
};

// Full marginal recovery from a release: empirical marginals, then log
// compression for SSC (k > 0) or power transformation for any DP release,
// then the mean-visits search and an exponential activity fit.
absl::StatusOr<MarginalEstimate> EstimateAll(const AggregateMatrix& released,
                                             int64_t m,
                                             const DelaunayGraph& graph,
                                             const PrivacyConfig& cfg,
                                             int epochs_per_day, Rng& rng,
                                             const EstimationOptions& options = {});
absl::StatusOr<MarginalEstimate> EstimateAll(const AggregateMatrix& released,
                                             int64_t m,
                                             const RoiGeometry& geometry,
                                             const PrivacyConfig& cfg,
                                             int epochs_per_day, Rng& rng,
                                             const EstimationOptions& options = {});

}  // namespace aggmia

#endif  // AGGMIA_ESTIMATION_H_
