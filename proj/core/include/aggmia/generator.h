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

#ifndef AGGMIA_GENERATOR_H_
#define AGGMIA_GENERATOR_H_

#include <vector>

#include "absl/status/statusor.h"
#include "aggmia/distributions.h"
#include "aggmia/mobility.h"
#include "aggmia/random.h"
#include "aggmia/reference_pool.h"

namespace aggmia {

inline constexpr int kDefaultSubgraphSize = 10;

struct GeneratorOptions {
  // ROIs in the connected neighbourhood a synthetic user may visit.
  int subgraph_size = kDefaultSubgraphSize;
};

// Samples synthetic traces from a MarginalSet:
//   1. origin s0 ~ space marginal,
//   2. C(s0) = connected Delaunay neighbourhood of s0,
//   3. n = max(1, round(activity draw)),
//   4. n visits, each with roi ~ space marginal restricted to C(s0) and
//      epoch ~ time marginal, independently and with replacement.
// Repeated (roi, epoch) draws collapse into one visit.
class TraceGenerator {
 public:
  struct Sample {
    LocationTrace trace;
    int origin = 0;
    int drawn_visits = 0;
    std::vector<int> subgraph;
  };

  static absl::StatusOr<TraceGenerator> Create(MarginalSet marginals,
                                               GeneratorOptions options = {});

  LocationTrace Generate(Rng& rng) const { return GenerateDetailed(rng).trace; }
  Sample GenerateDetailed(Rng& rng) const;

  const MarginalSet& marginals() const { return marginals_; }
  Dims dims() const {
    return Dims{static_cast<int>(marginals_.space.size()),
                static_cast<int>(marginals_.time.size())};
  }

 private:
  TraceGenerator() = default;
  MarginalSet marginals_;
  GeneratorOptions options_;
  AliasTable space_sampler_;
  AliasTable time_sampler_;
};

absl::StatusOr<LocationTrace> GenerateTrace(const MarginalSet& marginals,
                                            Rng& rng);

// n independent traces. Trace i uses the substream DeriveSeed(key, {i}) where
// key is one draw from `rng`, so the pool is reproducible per seed and can be
// produced in any order.
std::vector<LocationTrace> GenerateTraces(const TraceGenerator& generator,
                                          int n, Rng& rng);

absl::StatusOr<ReferencePool> GenerateReference(const MarginalSet& marginals,
                                                int n, Rng& rng,
                                                GeneratorOptions options = {});

}  // namespace aggmia

#endif  // AGGMIA_GENERATOR_H_
