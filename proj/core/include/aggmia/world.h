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

#ifndef AGGMIA_WORLD_H_
#define AGGMIA_WORLD_H_

#include <cstdint>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "aggmia/distributions.h"
#include "aggmia/generator.h"
#include "aggmia/mobility.h"

namespace aggmia {

enum class RoiLayout { kGrid, kUniform };
enum class SpaceShape { kUniform, kZipf };
enum class TimeShape { kUniform, kDiurnal };

// Recipe for a ground-truth population with known marginals.
struct WorldSpec {
  int n_rois = 500;
  // Columns of the grid layout; 25 columns of 20 rows by default.
  int grid_cols = 25;
  int n_epochs = 168;
  int population = 5000;
  RoiLayout layout = RoiLayout::kGrid;

  SpaceShape space = SpaceShape::kZipf;
  double zipf_a = 1.0;

  TimeShape time = TimeShape::kDiurnal;
  int diurnal_period = 24;
  // Relative swing of the sinusoid around its mean, and the lowest relative
  // weight any epoch may receive.
  double diurnal_amplitude = 0.8;
  double diurnal_floor = 0.05;

  ActivityModel activity = ActivityModel::LogNormal(40.0, 1.0);
  int epochs_per_day = 24;
  uint64_t seed = 1;
  GeneratorOptions generator;

  absl::Status Validate() const;
};

struct World {
  Population population;
  // The exact marginals the traces were drawn from.
  MarginalSet truth;
};

absl::StatusOr<RoiGeometry> MakeLayout(const WorldSpec& spec);

// Analytic marginals of the spec, with the Delaunay graph of its layout.
absl::StatusOr<MarginalSet> TrueMarginals(const WorldSpec& spec);

// Draws spec.population traces (user ids 0..N-1). User i uses its own
// substream, so the world is a pure function of the spec.
absl::StatusOr<World> SynthesizeWorld(const WorldSpec& spec);

}  // namespace aggmia

#endif  // AGGMIA_WORLD_H_
