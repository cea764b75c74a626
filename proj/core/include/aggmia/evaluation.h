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

#ifndef AGGMIA_EVALUATION_H_
#define AGGMIA_EVALUATION_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "absl/status/statusor.h"
#include "aggmia/attack.h"
#include "aggmia/classifier.h"
#include "aggmia/mobility.h"
#include "aggmia/privacy.h"
#include "aggmia/random.h"

namespace aggmia {

// n_test / 2 IN groups (the full target trace plus m - 1 eligible users) and
// n_test / 2 OUT groups (m eligible users other than the target), released
// with fresh mechanism draws. Users in `exclude` never appear, except the
// target in IN groups. IN and OUT alternate, starting with IN.
absl::StatusOr<std::vector<LabeledAggregate>> BuildTestSet(
    const Population& world, UserId target, int64_t m, int n_test,
    const std::unordered_set<UserId>& exclude, const PrivacyConfig& cfg, Rng& rng);

// Probability that a random IN example outscores a random OUT example, ties
// counting one half. Requires both labels.
absl::StatusOr<double> Auc(std::span<const double> scores,
                           const std::vector<bool>& labels);

absl::StatusOr<double> Accuracy(const std::vector<bool>& verdicts,
                                const std::vector<bool>& labels);

struct RocPoint {
  double fpr = 0;
  double tpr = 0;
};
// Points of the empirical ROC curve from (0,0) to (1,1), one per distinct
// score, sweeping the cutoff downwards.
std::vector<RocPoint> RocCurve(std::span<const double> scores,
                               const std::vector<bool>& labels);

// Sample standard deviation over sqrt(n); zero for fewer than two values.
double StandardError(std::span<const double> values);

struct ExperimentSpec {
  int64_t m = 1000;
  PrivacyConfig cfg;
  Adversary adversary = Adversary::kZeroKnowledge;
  int n_targets = 50;
  int n_test = 100;
  double p_fraction = 1.0;
  // Real users set aside as the knock-knock reference; always includes the
  // targets. Test groups are drawn from the remaining users.
  int ref_size = 5000;
  // Only users with at least this many visits are chosen as targets.
  int min_target_visits = 10;
  AttackParams attack;
  uint64_t seed = 0;
  int workers = 1;

  absl::Status Validate() const;
};

struct TargetResult {
  UserId target = 0;
  double auc = 0;
  double accuracy = 0;
  int rule_fired = 0;
  // Set when the target failed; the metrics are then meaningless.
  std::optional<std::string> error;
  std::vector<double> decision_values;
  std::vector<bool> labels;
};

struct AttackResult {
  std::vector<TargetResult> per_target;
  double mean_auc = 0;
  double se_auc = 0;
  double mean_accuracy = 0;
  double se_accuracy = 0;
  int succeeded = 0;
  int failed = 0;
};

// Up to n users with at least `min_visits` visits, as a seeded prefix of a
// permutation of the eligible users (in population order).
std::vector<UserId> SelectTargets(const Population& world, int n, int min_visits,
                                  uint64_t seed);

// Targets plus seeded other users, `ref_size` ids in total.
absl::StatusOr<std::vector<UserId>> SelectReference(const Population& world,
                                                    std::span<const UserId> targets,
                                                    int ref_size, uint64_t seed);

// The full protocol for every target: partial trace, reference, training,
// threshold tuning, test scoring, metrics. Targets run on `workers` threads;
// every target draws from substreams keyed by its id, so results do not
// depend on the worker count or on the other targets.
absl::StatusOr<AttackResult> RunExperiment(const Population& world,
                                           const ExperimentSpec& spec);

}  // namespace aggmia

#endif  // AGGMIA_EVALUATION_H_
