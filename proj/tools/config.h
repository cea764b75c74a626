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

#ifndef AGGMIA_TOOLS_CONFIG_H_
#define AGGMIA_TOOLS_CONFIG_H_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/statusor.h"
#include "aggmia/attack.h"
#include "aggmia/estimation.h"
#include "aggmia/evaluation.h"
#include "aggmia/io.h"
#include "aggmia/privacy.h"
#include "aggmia/world.h"

namespace aggmia::tools {

enum class WorldSource { kSynthetic, kFiles };
enum class AdversaryChoice { kZeroKnowledge, kKnockKnock, kBoth };

// Cartesian sweep axes. An empty axis means "use the base value"; nullopt
// entries in `k` and `epsilon` switch that mechanism off.
struct SweepAxes {
  std::vector<int64_t> m;
  std::vector<std::optional<int>> k;
  std::vector<std::optional<double>> epsilon;
  std::vector<double> p_fraction;
  std::vector<SamplingMode> mode;
};

struct ExperimentConfig {
  WorldSource world_source = WorldSource::kSynthetic;
  WorldSpec world;
  // Whether world.seed was given; otherwise the world follows `seed`.
  bool world_seed_set = false;
  std::string traces_path;
  std::string geometry_path;
  std::optional<int> load_n_epochs;

  int64_t m = 1000;
  std::optional<int> ssc_k;
  std::optional<double> dp_epsilon;
  double dp_sensitivity = 1.0;
  DpUnit dp_unit = DpUnit::kEvent;

  AdversaryChoice adversary = AdversaryChoice::kZeroKnowledge;
  SamplingMode mode = SamplingMode::kPaired;
  int n_train = 400;
  int n_val = 100;
  int n_test = 100;
  int n_targets = 50;
  double p_fraction = 1.0;
  int ref_size = 5000;
  int synthetic_ref_size = 5000;
  int min_target_visits = 10;
  TrainOptions train;
  MeanVisitsOptions mean_visits;
  double power_tol_fraction = 0.01;
  double max_power = kDefaultMaxPower;

  SweepAxes sweep;
  std::string input_aggregate;
  uint64_t seed = 0;
  std::string out_dir = ".";
  int workers = 1;

  PrivacyConfig privacy() const;
  WorldSpec ResolvedWorld() const;
};

// `key = value` lines; `#` starts a comment line. Unknown keys, malformed
// values and repeated keys are errors (InvalidArgument, with line numbers).
absl::StatusOr<ExperimentConfig> ParseConfig(std::string_view text);

// Every key with its value, in a fixed order; parses back to an equal config.
std::string RenderConfig(const ExperimentConfig& config);

struct SweepPoint {
  int64_t m = 0;
  PrivacyConfig cfg;
  double p_fraction = 1.0;
  SamplingMode mode = SamplingMode::kPaired;
};

// Points in row-major order over (m, k, epsilon, p_fraction, mode).
std::vector<SweepPoint> ExpandSweep(const ExperimentConfig& config);

ExperimentSpec SpecForPoint(const ExperimentConfig& config, const SweepPoint& point,
                            Adversary adversary);

}  // namespace aggmia::tools

#endif  // AGGMIA_TOOLS_CONFIG_H_
