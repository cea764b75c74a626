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

#include "aggmia/estimation.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"

namespace aggmia {
namespace {

constexpr uint64_t kTargetVarianceSeed = 0x5eed'7a26'e7ULL;

bool ReleaseIsUnprotected(const PrivacyConfig& cfg) {
  return !cfg.dp.has_value() && (!cfg.ssc_k.has_value() || *cfg.ssc_k == 0);
}

}  // namespace

absl::StatusOr<std::pair<DiscreteDistribution, DiscreteDistribution>>
EmpiricalMarginals(const AggregateMatrix& a) {
  const Dims dims = a.dims();
  std::vector<double> rows(static_cast<std::size_t>(dims.n_rois), 0.0);
  std::vector<double> cols(static_cast<std::size_t>(dims.n_epochs), 0.0);
  for (int s = 0; s < dims.n_rois; ++s) {
    for (int t = 0; t < dims.n_epochs; ++t) {
      const double c = a.at(s, t);
      rows[static_cast<std::size_t>(s)] += c;
      cols[static_cast<std::size_t>(t)] += c;
    }
  }
  absl::StatusOr<DiscreteDistribution> space =
      DiscreteDistribution::FromWeights(std::move(rows));
  absl::StatusOr<DiscreteDistribution> time =
      DiscreteDistribution::FromWeights(std::move(cols));
  if (!space.ok() || !time.ok()) {
    return absl::FailedPreconditionError(
        "cannot estimate marginals from an all-zero aggregate");
  }
  return std::make_pair(*std::move(space), *std::move(time));
}

absl::StatusOr<DiscreteDistribution> LogCompress(const DiscreteDistribution& p) {
  double min_nonzero = 0;
  for (double x : p.probs()) {
    if (x > 0 && (min_nonzero == 0 || x < min_nonzero)) min_nonzero = x;
  }
  if (min_nonzero == 0) {
    return absl::InvalidArgumentError("log compression of an all-zero vector");
  }
  const double gamma = 1.0 / min_nonzero;
  std::vector<double> out(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) out[i] = std::log1p(gamma * p[i]);
  return DiscreteDistribution::FromWeights(std::move(out));
}

absl::StatusOr<DiscreteDistribution> PowerTransform(const DiscreteDistribution& p,
                                                    double power) {
  if (!(power >= 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("power must be >= 1, got ", power));
  }
  const double max = *std::max_element(p.probs().begin(), p.probs().end());
  std::vector<double> out(p.size());
  // Scaling by the max first keeps large powers away from underflow.
  for (std::size_t i = 0; i < p.size(); ++i) {
    out[i] = p[i] > 0 ? std::pow(p[i] / max, power) : 0.0;
  }
  return DiscreteDistribution::FromWeights(std::move(out));
}

double TargetVariance(int dim) {
  static std::mutex mu;
  static std::map<int, double> cache;
  {
    std::lock_guard<std::mutex> lock(mu);
    if (auto it = cache.find(dim); it != cache.end()) return it->second;
  }
  Rng rng(DeriveSeed(kTargetVarianceSeed, {static_cast<uint64_t>(dim)}));
  std::vector<double> draw(static_cast<std::size_t>(dim));
  double sum_var = 0;
  for (int r = 0; r < kTargetVarianceReplicates; ++r) {
    double total = 0;
    for (double& x : draw) {
      x = rng.Uniform();
      total += x;
    }
    for (double& x : draw) x /= total;
    sum_var += PopulationVariance(draw);
  }
  const double value = sum_var / kTargetVarianceReplicates;
  std::lock_guard<std::mutex> lock(mu);
  cache.emplace(dim, value);
  return value;
}

PowerSelection SelectPower(const DiscreteDistribution& p, double sigma_target,
                           double tol, double p_max) {
  PowerSelection out;
  out.variance = p.Variance();
  if (out.variance >= sigma_target - tol) return out;
  const int steps = static_cast<int>(std::floor((p_max - 1.0) / kPowerStep + 1e-9));
  for (int i = 1; i <= steps; ++i) {
    const double power = 1.0 + i * kPowerStep;
    const double v = PowerTransform(p, power)->Variance();
    out.power = power;
    out.variance = v;
    if (v >= sigma_target - tol) return out;
  }
  out.converged = false;
  return out;
}

absl::StatusOr<MeanVisitsEstimate> EstimateMeanVisits(
    const AggregateMatrix& released, int64_t m, const DiscreteDistribution& space,
    const DiscreteDistribution& time, const DelaunayGraph& graph,
    const PrivacyConfig& cfg, int epochs_per_day, Rng& rng,
    const MeanVisitsOptions& options) {
  if (m <= 0) return absl::InvalidArgumentError("group size must be positive");
  if (absl::Status s = cfg.Validate(); !s.ok()) return s;
  const double released_total = released.Total();
  MeanVisitsEstimate est;
  est.initial = released_total / static_cast<double>(m);
  est.mean = est.initial;
  est.iterates.push_back(est.mean);
  if (ReleaseIsUnprotected(cfg)) return est;

  if (est.mean <= options.floor) {
    est.mean = options.floor;
    est.floored = true;
  }
  MarginalSet synthetic{space, time, ActivityModel::Exponential(est.mean), graph};
  est.converged = false;
  for (int iter = 0; iter < options.max_iter; ++iter) {
    synthetic.activity = ActivityModel::Exponential(est.mean);
    absl::StatusOr<TraceGenerator> gen =
        TraceGenerator::Create(synthetic, options.generator);
    if (!gen.ok()) return gen.status();
    Rng group_rng = rng.Fork();
    std::vector<LocationTrace> traces =
        GenerateTraces(*gen, static_cast<int>(m), group_rng);
    std::vector<const LocationTrace*> refs;
    refs.reserve(traces.size());
    for (const LocationTrace& t : traces) refs.push_back(&t);
    absl::StatusOr<AggregateMatrix> synthetic_release =
        ReleaseGroup(refs, cfg, epochs_per_day, group_rng);
    if (!synthetic_release.ok()) return synthetic_release.status();

    const double correction =
        (released_total - synthetic_release->Total()) / static_cast<double>(m);
    const double anchor =
        options.rule == MeanUpdateRule::kFromPrevious ? est.mean : est.initial;
    double next = anchor + correction;
    if (next <= options.floor) {
      next = options.floor;
      est.floored = true;
    }
    const double change = std::abs(next - anchor);
    est.mean = next;
    est.iterates.push_back(next);
    if (change < options.tol) {
      est.converged = true;
      break;
    }
  }
  return est;
}

absl::StatusOr<MarginalEstimate> EstimateAll(const AggregateMatrix& released,
                                             int64_t m,
                                             const DelaunayGraph& graph,
                                             const PrivacyConfig& cfg,
                                             int epochs_per_day, Rng& rng,
                                             const EstimationOptions& options) {
  if (graph.num_vertices() != static_cast<std::size_t>(released.dims().n_rois)) {
    return absl::InvalidArgumentError("adjacency does not match the release");
  }
  auto empirical = EmpiricalMarginals(released);
  if (!empirical.ok()) return empirical.status();
  MarginalEstimate est;
  est.empirical_space = empirical->first;
  est.empirical_time = empirical->second;
  DiscreteDistribution space = empirical->first;
  DiscreteDistribution time = empirical->second;

  if (cfg.dp.has_value()) {
    est.correction = MarginalCorrection::kPowerTransform;
    const double space_target = TargetVariance(static_cast<int>(space.size()));
    const double time_target = TargetVariance(static_cast<int>(time.size()));
    est.space_power = SelectPower(space, space_target,
                                  options.power_tol_fraction * space_target,
                                  options.max_power);
    est.time_power = SelectPower(time, time_target,
                                 options.power_tol_fraction * time_target,
                                 options.max_power);
    space = *PowerTransform(space, est.space_power->power);
    time = *PowerTransform(time, est.time_power->power);
  } else if (cfg.ssc_k.has_value() && *cfg.ssc_k > 0) {
    est.correction = MarginalCorrection::kLogCompression;
    space = *LogCompress(space);
    time = *LogCompress(time);
  }

  auto mean = EstimateMeanVisits(released, m, space, time, graph, cfg,
                                 epochs_per_day, rng, options.mean_visits);
  if (!mean.ok()) return mean.status();
  est.mean_visits = *std::move(mean);
  est.marginals = MarginalSet{std::move(space), std::move(time),
                              ActivityModel::Exponential(est.mean_visits.mean),
                              graph};
  return est;
}

absl::StatusOr<MarginalEstimate> EstimateAll(const AggregateMatrix& released,
                                             int64_t m,
                                             const RoiGeometry& geometry,
                                             const PrivacyConfig& cfg,
                                             int epochs_per_day, Rng& rng,
                                             const EstimationOptions& options) {
  return EstimateAll(released, m, BuildDelaunayOrPath(geometry), cfg,
                     epochs_per_day, rng, options);
}

}  // namespace aggmia
