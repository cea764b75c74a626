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

#include "aggmia/attack.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "aggmia/delaunay.h"

namespace aggmia {
namespace {

absl::Status CheckPool(const ReferencePool& ref, const LocationTrace& target,
                       std::optional<std::size_t> exclude_index, int64_t needed) {
  if (ref.size() == 0) return absl::InvalidArgumentError("empty reference pool");
  for (const LocationTrace& t : ref.traces) {
    if (!(t.dims() == target.dims())) {
      return absl::InvalidArgumentError("reference and target dims differ");
    }
  }
  if (exclude_index.has_value() && *exclude_index >= ref.size()) {
    return absl::InvalidArgumentError("excluded index outside the reference");
  }
  const std::size_t eligible = ref.size() - (exclude_index.has_value() ? 1 : 0);
  if (needed < 1 || static_cast<std::size_t>(needed) > eligible) {
    return absl::FailedPreconditionError(
        absl::StrCat("reference has ", eligible, " eligible traces, need ", needed));
  }
  return absl::OkStatus();
}

// Maps [0, eligible) onto pool indices, skipping the excluded one.
std::size_t PoolIndex(std::size_t i, std::optional<std::size_t> exclude_index) {
  return exclude_index.has_value() && i >= *exclude_index ? i + 1 : i;
}

absl::StatusOr<LocationTrace> MaybeCap(const LocationTrace& t, const GroupSpec& group,
                                       Rng& rng) {
  if (std::optional<int> cap = UserDayCap(group.cfg)) {
    return CapUserDay(t, *cap, group.epochs_per_day, rng);
  }
  return t;
}

bool RuleAllowed(const PrivacyConfig& cfg) {
  return !cfg.dp.has_value() && (!cfg.ssc_k.has_value() || *cfg.ssc_k == 0);
}

}  // namespace

std::string ToString(SamplingMode mode) {
  return mode == SamplingMode::kPaired ? "paired" : "independent";
}

std::string ToString(Adversary adversary) {
  return adversary == Adversary::kZeroKnowledge ? "zk" : "kk";
}

absl::StatusOr<std::vector<TrainingPair>> SamplePairs(
    const ReferencePool& ref, const LocationTrace& target,
    std::optional<std::size_t> exclude_index, int n_pairs, const GroupSpec& group,
    Rng& rng) {
  if (absl::Status s = group.cfg.Validate(); !s.ok()) return s;
  if (absl::Status s = CheckPool(ref, target, exclude_index, group.m); !s.ok()) {
    return s;
  }
  if (n_pairs < 0) return absl::InvalidArgumentError("negative pair count");
  const Dims dims = target.dims();
  const std::size_t eligible = ref.size() - (exclude_index.has_value() ? 1 : 0);
  const std::size_t m = static_cast<std::size_t>(group.m);
  const uint64_t key = rng.NextKey();

  std::vector<TrainingPair> pairs;
  pairs.reserve(static_cast<std::size_t>(n_pairs));
  for (int i = 0; i < n_pairs; ++i) {
    Rng r(DeriveSeed(key, {static_cast<uint64_t>(i)}));
    std::vector<std::size_t> drawn = SampleWithoutReplacement(eligible, m, r);
    const std::size_t other_slot = r.UniformInt(m);

    std::vector<double> base(dims.cells(), 0.0);
    for (std::size_t j = 0; j < m; ++j) {
      if (j == other_slot) continue;
      absl::StatusOr<LocationTrace> t =
          MaybeCap(ref.traces[PoolIndex(drawn[j], exclude_index)], group, r);
      if (!t.ok()) return t.status();
      AccumulateTrace(*t, base);
    }
    absl::StatusOr<LocationTrace> in_trace = MaybeCap(target, group, r);
    if (!in_trace.ok()) return in_trace.status();
    absl::StatusOr<LocationTrace> out_trace =
        MaybeCap(ref.traces[PoolIndex(drawn[other_slot], exclude_index)], group, r);
    if (!out_trace.ok()) return out_trace.status();

    TrainingPair pair;
    pair.raw_in = AggregateMatrix(dims, group.m);
    pair.raw_out = AggregateMatrix(dims, group.m);
    pair.raw_in.mutable_counts() = base;
    pair.raw_out.mutable_counts() = std::move(base);
    AccumulateTrace(*in_trace, pair.raw_in.mutable_counts());
    AccumulateTrace(*out_trace, pair.raw_out.mutable_counts());
    if (group.cfg.dp.has_value()) {
      pair.noise = LaplaceNoise(dims, group.cfg.dp->scale(), r);
    }
    pairs.push_back(std::move(pair));
  }
  return pairs;
}

absl::StatusOr<std::pair<AggregateMatrix, AggregateMatrix>> ReleasePair(
    const TrainingPair& pair, const PrivacyConfig& cfg) {
  if (absl::Status s = cfg.Validate(); !s.ok()) return s;
  AggregateMatrix in = pair.raw_in;
  AggregateMatrix out = pair.raw_out;
  if (cfg.dp.has_value()) {
    if (pair.noise.size() != in.dims().cells()) {
      return absl::InvalidArgumentError("pair carries no noise for a DP release");
    }
    in = PostProcessNoisy(in.dims(), in.group_size(), AddNoise(in, pair.noise), *cfg.dp);
    out = PostProcessNoisy(out.dims(), out.group_size(), AddNoise(out, pair.noise),
                           *cfg.dp);
  }
  if (cfg.ssc_k.has_value()) {
    absl::StatusOr<AggregateMatrix> a = SuppressSmallCounts(in, *cfg.ssc_k);
    if (!a.ok()) return a.status();
    absl::StatusOr<AggregateMatrix> b = SuppressSmallCounts(out, *cfg.ssc_k);
    if (!b.ok()) return b.status();
    in = *std::move(a);
    out = *std::move(b);
  }
  return std::make_pair(std::move(in), std::move(out));
}

absl::StatusOr<std::vector<LabeledAggregate>> BuildTrainingSet(
    const ReferencePool& ref, const LocationTrace& target,
    std::optional<std::size_t> exclude_index, int n, SamplingMode mode,
    const GroupSpec& group, Rng& rng) {
  if (n <= 0 || n % 2 != 0) {
    return absl::InvalidArgumentError(
        absl::StrCat("training set size must be even and positive, got ", n));
  }
  std::vector<LabeledAggregate> out;
  out.reserve(static_cast<std::size_t>(n));
  if (mode == SamplingMode::kPaired) {
    absl::StatusOr<std::vector<TrainingPair>> pairs =
        SamplePairs(ref, target, exclude_index, n / 2, group, rng);
    if (!pairs.ok()) return pairs.status();
    for (const TrainingPair& p : *pairs) {
      auto released = ReleasePair(p, group.cfg);
      if (!released.ok()) return released.status();
      out.push_back({std::move(released->first), true});
      out.push_back({std::move(released->second), false});
    }
    return out;
  }

  if (absl::Status s = group.cfg.Validate(); !s.ok()) return s;
  if (absl::Status s = CheckPool(ref, target, exclude_index, group.m); !s.ok()) {
    return s;
  }
  const std::size_t eligible = ref.size() - (exclude_index.has_value() ? 1 : 0);
  const std::size_t m = static_cast<std::size_t>(group.m);
  const uint64_t key = rng.NextKey();
  for (int i = 0; i < n; ++i) {
    Rng r(DeriveSeed(key, {static_cast<uint64_t>(i)}));
    const bool in = i % 2 == 0;
    std::vector<std::size_t> drawn = SampleWithoutReplacement(eligible, m, r);
    std::vector<const LocationTrace*> members;
    members.reserve(m);
    for (std::size_t j : drawn) members.push_back(&ref.traces[PoolIndex(j, exclude_index)]);
    if (in) members[r.UniformInt(m)] = &target;
    absl::StatusOr<AggregateMatrix> released =
        ReleaseGroup(members, group.cfg, group.epochs_per_day, r);
    if (!released.ok()) return released.status();
    out.push_back({*std::move(released), in});
  }
  return out;
}

absl::StatusOr<std::optional<Verdict>> TrivialOutRule(const AggregateMatrix& a,
                                                      const LocationTrace& target) {
  const Provenance& p = a.provenance();
  const bool valid = p.kind == Provenance::Kind::kRaw ||
                     (p.kind == Provenance::Kind::kSsc && p.ssc_k == 0);
  if (!valid) {
    return absl::FailedPreconditionError(absl::StrCat(
        "trivial rule needs raw counts, got ", p.ToString()));
  }
  if (!(a.dims() == target.dims())) {
    return absl::InvalidArgumentError("aggregate and target dims differ");
  }
  for (const Visit& v : target.visits()) {
    if (a.at(v.roi, v.epoch) == 0) return Verdict::kOut;
  }
  return std::nullopt;
}

absl::StatusOr<AttackOutcome> RunAttack(const AdversaryKnowledge& knowledge,
                                        std::span<const AggregateMatrix> releases,
                                        const LocationTrace& target_partial,
                                        const GroupSpec& group,
                                        const AttackParams& params, Rng& rng) {
  if (target_partial.empty()) return absl::InvalidArgumentError("empty target trace");
  Rng estimate_rng = rng.Fork();
  Rng reference_rng = rng.Fork();
  Rng train_rng = rng.Fork();
  Rng validation_rng = rng.Fork();

  AttackOutcome outcome;
  ReferencePool synthetic;
  const ReferencePool* pool = nullptr;
  std::optional<std::size_t> exclude_index;
  if (knowledge.kind == Adversary::kZeroKnowledge) {
    if (knowledge.geometry == nullptr || knowledge.estimation_release == nullptr) {
      return absl::InvalidArgumentError(
          "zero-knowledge attack needs geometry and a release");
    }
    absl::StatusOr<MarginalEstimate> estimate =
        EstimateAll(*knowledge.estimation_release, group.m,
                    BuildDelaunayOrPath(*knowledge.geometry), group.cfg,
                    group.epochs_per_day, estimate_rng, params.estimation);
    if (!estimate.ok()) return estimate.status();
    absl::StatusOr<ReferencePool> generated =
        GenerateReference(estimate->marginals, params.synthetic_ref_size,
                          reference_rng, params.generator);
    if (!generated.ok()) return generated.status();
    outcome.estimate = *std::move(estimate);
    synthetic = *std::move(generated);
    pool = &synthetic;
  } else {
    if (knowledge.reference == nullptr) {
      return absl::InvalidArgumentError("knock-knock attack needs a reference");
    }
    pool = knowledge.reference;
    exclude_index = knowledge.target_index;
  }

  absl::StatusOr<std::vector<LabeledAggregate>> training =
      BuildTrainingSet(*pool, target_partial, exclude_index, params.n_train,
                       params.mode, group, train_rng);
  if (!training.ok()) return training.status();
  absl::StatusOr<MembershipClassifier> clf =
      TrainClassifier(*training, params.train, &outcome.train_report);
  if (!clf.ok()) return clf.status();
  training->clear();
  training->shrink_to_fit();

  absl::StatusOr<std::vector<LabeledAggregate>> validation =
      BuildTrainingSet(*pool, target_partial, exclude_index, params.n_val,
                       SamplingMode::kIndependent, group, validation_rng);
  if (!validation.ok()) return validation.status();
  clf = TuneThreshold(*std::move(clf), *validation);
  if (!clf.ok()) return clf.status();
  outcome.classifier = *std::move(clf);

  const bool rule = RuleAllowed(group.cfg);
  for (const AggregateMatrix& a : releases) {
    bool fired = false;
    if (rule) {
      absl::StatusOr<std::optional<Verdict>> v = TrivialOutRule(a, target_partial);
      if (!v.ok()) return v.status();
      fired = v->has_value();
    }
    double z = -std::numeric_limits<double>::infinity();
    if (!fired) {
      absl::StatusOr<double> d = outcome.classifier.DecisionValue(a);
      if (!d.ok()) return d.status();
      z = *d;
    }
    outcome.decision_values.push_back(z);
    outcome.scores.push_back(fired ? 0.0 : Sigmoid(z));
    outcome.verdicts.push_back(!fired && z >= outcome.classifier.decision_threshold());
    outcome.rule_fired.push_back(fired);
  }
  return outcome;
}

}  // namespace aggmia
