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

#include "aggmia/generator.h"

#include <algorithm>
#include <cmath>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"

namespace aggmia {

absl::StatusOr<TraceGenerator> TraceGenerator::Create(MarginalSet marginals,
                                                      GeneratorOptions options) {
  if (marginals.space.size() == 0 || marginals.time.size() == 0) {
    return absl::InvalidArgumentError("marginals must be nonempty");
  }
  if (marginals.delaunay.num_vertices() != marginals.space.size()) {
    return absl::InvalidArgumentError(absl::StrCat(
        "adjacency has ", marginals.delaunay.num_vertices(),
        " vertices but the space marginal has ", marginals.space.size()));
  }
  if (!(marginals.activity.mean > 0)) {
    return absl::InvalidArgumentError("activity mean must be positive");
  }
  if (options.subgraph_size < 1) {
    return absl::InvalidArgumentError("subgraph size must be >= 1");
  }
  TraceGenerator g;
  g.space_sampler_ = AliasTable(marginals.space.probs());
  g.time_sampler_ = AliasTable(marginals.time.probs());
  g.marginals_ = std::move(marginals);
  g.options_ = options;
  return g;
}

TraceGenerator::Sample TraceGenerator::GenerateDetailed(Rng& rng) const {
  Sample out;
  out.origin = static_cast<int>(space_sampler_.Sample(rng));
  out.subgraph = ConnectedSubgraph(marginals_.delaunay, out.origin,
                                   options_.subgraph_size, rng);
  std::vector<double> local(out.subgraph.size());
  for (std::size_t i = 0; i < local.size(); ++i) {
    local[i] = marginals_.space[static_cast<std::size_t>(out.subgraph[i])];
  }
  const double draw = marginals_.activity.Sample(rng);
  out.drawn_visits = std::max(1, static_cast<int>(std::lround(draw)));

  std::vector<Visit> visits;
  visits.reserve(static_cast<std::size_t>(out.drawn_visits));
  for (int i = 0; i < out.drawn_visits; ++i) {
    const int roi = out.subgraph[SampleLinear(local, rng)];
    const int epoch = static_cast<int>(time_sampler_.Sample(rng));
    visits.push_back({roi, epoch});
  }
  out.trace = LocationTrace::FromVisits(dims(), std::move(visits));
  return out;
}

absl::StatusOr<LocationTrace> GenerateTrace(const MarginalSet& marginals,
                                            Rng& rng) {
  absl::StatusOr<TraceGenerator> g = TraceGenerator::Create(marginals);
  if (!g.ok()) return g.status();
  return g->Generate(rng);
}

std::vector<LocationTrace> GenerateTraces(const TraceGenerator& generator,
                                          int n, Rng& rng) {
  const uint64_t key = rng.NextKey();
  std::vector<LocationTrace> out;
  out.reserve(static_cast<std::size_t>(std::max(n, 0)));
  for (int i = 0; i < n; ++i) {
    Rng sub(DeriveSeed(key, {static_cast<uint64_t>(i)}));
    out.push_back(generator.Generate(sub));
  }
  return out;
}

absl::StatusOr<ReferencePool> GenerateReference(const MarginalSet& marginals,
                                                int n, Rng& rng,
                                                GeneratorOptions options) {
  if (n < 1) return absl::InvalidArgumentError("reference size must be >= 1");
  absl::StatusOr<TraceGenerator> g = TraceGenerator::Create(marginals, options);
  if (!g.ok()) return g.status();
  ReferencePool pool;
  pool.kind = ReferencePool::Kind::kSyntheticZeroKnowledge;
  pool.traces = GenerateTraces(*g, n, rng);
  return pool;
}

}  // namespace aggmia
