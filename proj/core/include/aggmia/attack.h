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

#ifndef AGGMIA_ATTACK_H_
#define AGGMIA_ATTACK_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "aggmia/classifier.h"
#include "aggmia/estimation.h"
#include "aggmia/generator.h"
#include "aggmia/mobility.h"
#include "aggmia/privacy.h"
#include "aggmia/random.h"
#include "aggmia/reference_pool.h"

namespace aggmia {

enum class SamplingMode { kIndependent, kPaired };
enum class Adversary { kZeroKnowledge, kKnockKnock };

std::string ToString(SamplingMode mode);
std::string ToString(Adversary adversary);

struct GroupSpec {
  int64_t m = 1000;
  PrivacyConfig cfg;
  // Day length in epochs, for user-day capping.
  int epochs_per_day = 24;
};

// The raw ingredients of one paired example: both aggregates before any
// mechanism, plus the shared pre-post-processing noise (empty without DP).
struct TrainingPair {
  AggregateMatrix raw_in;
  AggregateMatrix raw_out;
  std::vector<double> noise;
};

// Samples `n_pairs` base groups of m - 1 reference traces (skipping
// `exclude_index`, the target's own entry in a real pool). Each pair adds the
// target to the base for IN and one further reference trace for OUT. Under
// user-day DP every trace is capped before aggregation.
absl::StatusOr<std::vector<TrainingPair>> SamplePairs(
    const ReferencePool& ref, const LocationTrace& target,
    std::optional<std::size_t> exclude_index, int n_pairs, const GroupSpec& group,
    Rng& rng);

// Applies the release mechanisms to a pair: shared noise, post-processing of
// each member, then suppression.
absl::StatusOr<std::pair<AggregateMatrix, AggregateMatrix>> ReleasePair(
    const TrainingPair& pair, const PrivacyConfig& cfg);

// Labeled training aggregates. Independent mode: `n` groups of m reference
// traces, the target replacing one member in every other group, independent
// mechanisms per group. Paired mode: n / 2 pairs from SamplePairs. `n` must
// be even and positive.
absl::StatusOr<std::vector<LabeledAggregate>> BuildTrainingSet(
    const ReferencePool& ref, const LocationTrace& target,
    std::optional<std::size_t> exclude_index, int n, SamplingMode mode,
    const GroupSpec& group, Rng& rng);

enum class Verdict { kIn, kOut };

// OUT when the target visits a cell whose released count is zero. Only valid
// on unsuppressed noiseless counts: Raw or SSC at k = 0.
absl::StatusOr<std::optional<Verdict>> TrivialOutRule(const AggregateMatrix& a,
                                                      const LocationTrace& target);

struct AttackParams {
  int n_train = 400;
  int n_val = 100;
  SamplingMode mode = SamplingMode::kPaired;
  // Synthetic reference size for the zero-knowledge adversary.
  int synthetic_ref_size = 5000;
  TrainOptions train;
  EstimationOptions estimation;
  GeneratorOptions generator;
};

// What the adversary is given besides the target's (partial) trace.
struct AdversaryKnowledge {
  Adversary kind = Adversary::kZeroKnowledge;
  // Zero knowledge: ROI positions and one release to estimate marginals from.
  const RoiGeometry* geometry = nullptr;
  const AggregateMatrix* estimation_release = nullptr;
  // Knock-knock: a real pool that contains the target at `target_index`.
  const ReferencePool* reference = nullptr;
  std::optional<std::size_t> target_index;
};

struct AttackOutcome {
  // Per release: sigmoid score, linear decision value (-inf when the trivial
  // rule fired), IN verdict, and whether the rule fired.
  std::vector<double> scores;
  std::vector<double> decision_values;
  std::vector<bool> verdicts;
  std::vector<bool> rule_fired;
  MembershipClassifier classifier = MembershipClassifier::Zero({});
  TrainReport train_report;
  std::optional<MarginalEstimate> estimate;
};

// Trains a membership classifier against `target_partial` and scores each of
// `releases`. Validation aggregates are built with independent sampling.
absl::StatusOr<AttackOutcome> RunAttack(const AdversaryKnowledge& knowledge,
                                        std::span<const AggregateMatrix> releases,
                                        const LocationTrace& target_partial,
                                        const GroupSpec& group,
                                        const AttackParams& params, Rng& rng);

}  // namespace aggmia

#endif  // AGGMIA_ATTACK_H_
