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

#include "aggmia/world.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <utility>
#include <vector>

#include "aggmia/delaunay.h"
#include "aggmia/random.h"

namespace aggmia {
namespace {

enum SeedStream : uint64_t { kLayoutStream = 1, kSpaceStream = 2, kTraceStream = 3 };

std::vector<double> SpaceWeights(const WorldSpec& spec) {
  const std::size_t n = static_cast<std::size_t>(spec.n_rois);
  std::vector<double> w(n, 1.0);
  if (spec.space == SpaceShape::kZipf) {
    // Popularity ranks are shuffled so that popular ROIs are scattered.
    Rng rng(DeriveSeed(spec.seed, {kSpaceStream}));
    std::vector<std::size_t> rank(n);
    std::iota(rank.begin(), rank.end(), std::size_t{0});
    for (std::size_t i = n; i > 1; --i) {
      std::swap(rank[i - 1], rank[rng.UniformInt(i)]);
    }
    for (std::size_t i = 0; i < n; ++i) {
      w[rank[i]] = 1.0 / std::pow(static_cast<double>(i + 1), spec.zipf_a);
    }
  }
  return w;
}

std::vector<double> TimeWeights(const WorldSpec& spec) {
  std::vector<double> w(static_cast<std::size_t>(spec.n_epochs), 1.0);
  if (spec.time == TimeShape::kDiurnal) {
    for (int t = 0; t < spec.n_epochs; ++t) {
      const double phase = 2 * std::numbers::pi * (t % spec.diurnal_period) /
                           spec.diurnal_period;
      // Trough at the start of each period, peak half a period later.
      const double v = 1.0 - spec.diurnal_amplitude * std::cos(phase);
      w[static_cast<std::size_t>(t)] = std::max(v, spec.diurnal_floor);
    }
  }
  return w;
}

}  // namespace

absl::Status WorldSpec::Validate() const {
  if (n_rois < 3) return absl::InvalidArgumentError("world needs at least 3 ROIs");
  if (n_epochs < 1) return absl::InvalidArgumentError("world needs epochs");
  if (population < 1) return absl::InvalidArgumentError("world needs users");
  if (layout == RoiLayout::kGrid && grid_cols < 1) {
    return absl::InvalidArgumentError("grid_cols must be positive");
  }
  if (space == SpaceShape::kZipf && !(zipf_a > 0)) {
    return absl::InvalidArgumentError("zipf exponent must be positive");
  }
  if (time == TimeShape::kDiurnal &&
      (diurnal_period < 1 || !(diurnal_amplitude >= 0) || !(diurnal_floor > 0))) {
    return absl::InvalidArgumentError("invalid diurnal parameters");
  }
  if (!(activity.mean > 0)) return absl::InvalidArgumentError("activity mean must be > 0");
  if (activity.family == ActivityModel::Family::kLogNormal && !(activity.log_sigma >= 0)) {
    return absl::InvalidArgumentError("lognormal sigma must be >= 0");
  }
  if (epochs_per_day < 1) return absl::InvalidArgumentError("epochs_per_day must be >= 1");
  if (generator.subgraph_size < 1) {
    return absl::InvalidArgumentError("subgraph size must be >= 1");
  }
  return absl::OkStatus();
}

absl::StatusOr<RoiGeometry> MakeLayout(const WorldSpec& spec) {
  if (absl::Status s = spec.Validate(); !s.ok()) return s;
  std::vector<Point> points;
  points.reserve(static_cast<std::size_t>(spec.n_rois));
  if (spec.layout == RoiLayout::kGrid) {
    for (int i = 0; i < spec.n_rois; ++i) {
      points.push_back({static_cast<double>(i % spec.grid_cols),
                        static_cast<double>(i / spec.grid_cols)});
    }
  } else {
    Rng rng(DeriveSeed(spec.seed, {kLayoutStream}));
    const double side = std::sqrt(static_cast<double>(spec.n_rois));
    for (int i = 0; i < spec.n_rois; ++i) {
      const double x = rng.Uniform() * side;
      points.push_back({x, rng.Uniform() * side});
    }
  }
  return RoiGeometry::Create(std::move(points));
}

absl::StatusOr<MarginalSet> TrueMarginals(const WorldSpec& spec) {
  absl::StatusOr<RoiGeometry> geometry = MakeLayout(spec);
  if (!geometry.ok()) return geometry.status();
  absl::StatusOr<DelaunayGraph> graph = BuildDelaunay(*geometry);
  if (!graph.ok()) return graph.status();
  absl::StatusOr<DiscreteDistribution> space =
      DiscreteDistribution::FromWeights(SpaceWeights(spec));
  if (!space.ok()) return space.status();
  absl::StatusOr<DiscreteDistribution> time =
      DiscreteDistribution::FromWeights(TimeWeights(spec));
  if (!time.ok()) return time.status();
  return MarginalSet{*std::move(space), *std::move(time), spec.activity,
                     *std::move(graph)};
}

absl::StatusOr<World> SynthesizeWorld(const WorldSpec& spec) {
  absl::StatusOr<RoiGeometry> geometry = MakeLayout(spec);
  if (!geometry.ok()) return geometry.status();
  absl::StatusOr<MarginalSet> truth = TrueMarginals(spec);
  if (!truth.ok()) return truth.status();
  absl::StatusOr<TraceGenerator> generator =
      TraceGenerator::Create(*truth, spec.generator);
  if (!generator.ok()) return generator.status();

  Rng rng(DeriveSeed(spec.seed, {kTraceStream}));
  std::vector<LocationTrace> traces = GenerateTraces(*generator, spec.population, rng);
  std::vector<UserId> ids(traces.size());
  for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = static_cast<UserId>(i);
  absl::StatusOr<Population> population =
      Population::Create(*std::move(geometry), spec.n_epochs, spec.epochs_per_day,
                         std::move(ids), std::move(traces));
  if (!population.ok()) return population.status();
  return World{*std::move(population), *std::move(truth)};
}

}  // namespace aggmia
