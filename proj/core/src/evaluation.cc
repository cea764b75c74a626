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

#include "aggmia/evaluation.h"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <numeric>
#include <thread>
#include <utility>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"

namespace aggmia {
namespace {

enum SeedStream : uint64_t {
  kTargetStream = 11,
  kReferenceStream = 12,
  kTestStream = 13,
  kPartialStream = 14,
  kTrainStream = 15,
  kEstimationStream = 16,
};

uint64_t Bits(double v) { return std::bit_cast<uint64_t>(v); }

// Keyed by everything that shapes the released test aggregates, so that
// adversaries, sampling modes and partial fractions see the same test sets.
uint64_t TestKey(const ExperimentSpec& spec, UserId target) {
  const PrivacyConfig& c = spec.cfg;
  return DeriveSeed(
      spec.seed,
      {kTestStream, static_cast<uint64_t>(target), static_cast<uint64_t>(spec.m),
       c.ssc_k ? static_cast<uint64_t>(*c.ssc_k) + 1 : 0,
       c.dp ? Bits(c.dp->epsilon) : 0, c.dp ? Bits(c.dp->sensitivity) : 0,
       c.dp ? static_cast<uint64_t>(c.dp->unit) + 1 : 0});
}

std::vector<std::size_t> OrderByScore(std::span<const double> scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  return order;
}

struct SharedInputs {
  const Population* world;
  const ExperimentSpec* spec;
  std::unordered_set<UserId> reference_ids;
  ReferencePool real_pool;
  std::unordered_map<UserId, std::size_t> pool_index;
};

absl::Status RunTarget(const SharedInputs& in, UserId target, TargetResult* r) {
  const ExperimentSpec& spec = *in.spec;
  const Population& world = *in.world;
  const std::size_t index = *world.IndexOf(target);

  Rng partial_rng(
      DeriveSeed(spec.seed, {kPartialStream, static_cast<uint64_t>(target),
                             Bits(spec.p_fraction)}));
  absl::StatusOr<LocationTrace> partial =
      PartialTrace(world.trace(index), spec.p_fraction, partial_rng);
  if (!partial.ok()) return partial.status();

  const uint64_t test_key = TestKey(spec, target);
  Rng test_rng(DeriveSeed(test_key, {0}));
  absl::StatusOr<std::vector<LabeledAggregate>> tests = BuildTestSet(
      world, target, spec.m, spec.n_test, in.reference_ids, spec.cfg, test_rng);
  if (!tests.ok()) return tests.status();
  std::vector<AggregateMatrix> releases;
  releases.reserve(tests->size());
  for (LabeledAggregate& ex : *tests) {
    r->labels.push_back(ex.in);
    releases.push_back(std::move(ex.aggregate));
  }
  tests->clear();

  const GroupSpec group{spec.m, spec.cfg, world.epochs_per_day()};
  AdversaryKnowledge knowledge;
  knowledge.kind = spec.adversary;
  AggregateMatrix estimation_release;
  if (spec.adversary == Adversary::kZeroKnowledge) {
    // The release the adversary learns marginals from: another group drawn
    // from the test population, without the target.
    Rng est_rng(DeriveSeed(test_key, {kEstimationStream}));
    std::unordered_set<UserId> exclude = in.reference_ids;
    exclude.insert(target);
    absl::StatusOr<std::vector<std::size_t>> members =
        SampleGroup(world, static_cast<int>(spec.m), exclude, std::nullopt, est_rng);
    if (!members.ok()) return members.status();
    std::vector<const LocationTrace*> traces;
    for (std::size_t i : *members) traces.push_back(&world.trace(i));
    absl::StatusOr<AggregateMatrix> released =
        ReleaseGroup(traces, spec.cfg, world.epochs_per_day(), est_rng);
    if (!released.ok()) return released.status();
    estimation_release = *std::move(released);
    knowledge.geometry = &world.geometry();
    knowledge.estimation_release = &estimation_release;
  } else {
    knowledge.reference = &in.real_pool;
    knowledge.target_index = in.pool_index.at(target);
  }

  Rng train_rng(DeriveSeed(
      test_key, {kTrainStream, Bits(spec.p_fraction),
                 static_cast<uint64_t>(spec.attack.mode),
                 static_cast<uint64_t>(spec.adversary)}));
  absl::StatusOr<AttackOutcome> outcome =
      RunAttack(knowledge, releases, *partial, group, spec.attack, train_rng);
  if (!outcome.ok()) return outcome.status();

  absl::StatusOr<double> auc = Auc(outcome->decision_values, r->labels);
  if (!auc.ok()) return auc.status();
  absl::StatusOr<double> accuracy = Accuracy(outcome->verdicts, r->labels);
  if (!accuracy.ok()) return accuracy.status();
  r->auc = *auc;
  r->accuracy = *accuracy;
  r->rule_fired = static_cast<int>(
      std::count(outcome->rule_fired.begin(), outcome->rule_fired.end(), true));
  r->decision_values = std::move(outcome->decision_values);
  return absl::OkStatus();
}

}  // namespace

absl::StatusOr<std::vector<LabeledAggregate>> BuildTestSet(
    const Population& world, UserId target, int64_t m, int n_test,
    const std::unordered_set<UserId>& exclude, const PrivacyConfig& cfg, Rng& rng) {
  if (n_test <= 0 || n_test % 2 != 0) {
    return absl::InvalidArgumentError("test set size must be even and positive");
  }
  if (m <= 0) return absl::InvalidArgumentError("group size must be positive");
  if (!world.IndexOf(target)) {
    return absl::NotFoundError(absl::StrCat("unknown target ", target));
  }
  std::unordered_set<UserId> exclude_out = exclude;
  exclude_out.insert(target);
  const uint64_t key = rng.NextKey();
  std::vector<LabeledAggregate> out;
  out.reserve(static_cast<std::size_t>(n_test));
  for (int i = 0; i < n_test; ++i) {
    Rng r(DeriveSeed(key, {static_cast<uint64_t>(i)}));
    const bool in = i % 2 == 0;
    absl::StatusOr<std::vector<std::size_t>> members =
        in ? SampleGroup(world, static_cast<int>(m), exclude, target, r)
           : SampleGroup(world, static_cast<int>(m), exclude_out, std::nullopt, r);
    if (!members.ok()) return members.status();
    std::vector<const LocationTrace*> traces;
    traces.reserve(members->size());
    for (std::size_t j : *members) traces.push_back(&world.trace(j));
    absl::StatusOr<AggregateMatrix> released =
        ReleaseGroup(traces, cfg, world.epochs_per_day(), r);
    if (!released.ok()) return released.status();
    out.push_back({*std::move(released), in});
  }
  return out;
}

absl::StatusOr<double> Auc(std::span<const double> scores,
                           const std::vector<bool>& labels) {
  if (scores.size() != labels.size()) {
    return absl::InvalidArgumentError("scores and labels differ in length");
  }
  const int64_t n_in = std::count(labels.begin(), labels.end(), true);
  const int64_t n_out = static_cast<int64_t>(labels.size()) - n_in;
  if (n_in == 0 || n_out == 0) {
    return absl::InvalidArgumentError("AUC is undefined without both labels");
  }
  const std::vector<std::size_t> order = OrderByScore(scores);
  // Twice the Mann-Whitney count: 2 per correctly ordered pair, 1 per tie.
  int64_t twice = 0;
  int64_t out_below = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    int64_t in_tie = 0, out_tie = 0;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      (labels[order[j]] ? in_tie : out_tie) += 1;
      ++j;
    }
    twice += 2 * in_tie * out_below + in_tie * out_tie;
    out_below += out_tie;
    i = j;
  }
  return static_cast<double>(twice) / (2.0 * static_cast<double>(n_in * n_out));
}

absl::StatusOr<double> Accuracy(const std::vector<bool>& verdicts,
                                const std::vector<bool>& labels) {
  if (verdicts.empty()) return absl::InvalidArgumentError("accuracy of nothing");
  if (verdicts.size() != labels.size()) {
    return absl::InvalidArgumentError("verdicts and labels differ in length");
  }
  std::size_t correct = 0;
  for (std::size_t i = 0; i < verdicts.size(); ++i) correct += verdicts[i] == labels[i];
  return static_cast<double>(correct) / static_cast<double>(verdicts.size());
}

std::vector<RocPoint> RocCurve(std::span<const double> scores,
                               const std::vector<bool>& labels) {
  const double n_in = static_cast<double>(std::count(labels.begin(), labels.end(), true));
  const double n_out = static_cast<double>(labels.size()) - n_in;
  std::vector<std::size_t> order = OrderByScore(scores);
  std::reverse(order.begin(), order.end());
  std::vector<RocPoint> points{{0.0, 0.0}};
  double tp = 0, fp = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      (labels[order[j]] ? tp : fp) += 1;
      ++j;
    }
    points.push_back({n_out > 0 ? fp / n_out : 0.0, n_in > 0 ? tp / n_in : 0.0});
    i = j;
  }
  return points;
}

double StandardError(std::span<const double> values) {
  const std::size_t n = values.size();
  if (n < 2) return 0.0;
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double ss = 0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / static_cast<double>(n - 1)) / std::sqrt(static_cast<double>(n));
}

absl::Status ExperimentSpec::Validate() const {
  if (m < 1) return absl::InvalidArgumentError("m must be >= 1");
  if (n_targets < 1) return absl::InvalidArgumentError("n_targets must be >= 1");
  if (n_test < 2 || n_test % 2) return absl::InvalidArgumentError("n_test must be even");
  if (attack.n_train < 2 || attack.n_train % 2) {
    return absl::InvalidArgumentError("n_train must be even");
  }
  if (attack.n_val < 2 || attack.n_val % 2) {
    return absl::InvalidArgumentError("n_val must be even");
  }
  if (!(p_fraction > 0 && p_fraction <= 1)) {
    return absl::InvalidArgumentError("p_fraction must lie in (0, 1]");
  }
  if (ref_size < n_targets) {
    return absl::InvalidArgumentError("ref_size must be at least n_targets");
  }
  if (attack.synthetic_ref_size < 1) {
    return absl::InvalidArgumentError("synthetic reference size must be >= 1");
  }
  if (workers < 1) return absl::InvalidArgumentError("workers must be >= 1");
  return cfg.Validate();
}

std::vector<UserId> SelectTargets(const Population& world, int n, int min_visits,
                                  uint64_t seed) {
  std::vector<UserId> eligible;
  for (std::size_t i = 0; i < world.size(); ++i) {
    if (static_cast<int>(world.trace(i).size()) >= min_visits) {
      eligible.push_back(world.id(i));
    }
  }
  Rng rng(DeriveSeed(seed, {kTargetStream}));
  const std::size_t take = std::min(eligible.size(), static_cast<std::size_t>(std::max(n, 0)));
  for (std::size_t i = 0; i < take; ++i) {
    std::swap(eligible[i], eligible[i + rng.UniformInt(eligible.size() - i)]);
  }
  eligible.resize(take);
  return eligible;
}

absl::StatusOr<std::vector<UserId>> SelectReference(const Population& world,
                                                    std::span<const UserId> targets,
                                                    int ref_size, uint64_t seed) {
  if (ref_size < static_cast<int>(targets.size())) {
    return absl::InvalidArgumentError("reference smaller than the target list");
  }
  std::unordered_set<UserId> chosen(targets.begin(), targets.end());
  std::vector<UserId> others;
  for (UserId id : world.ids()) {
    if (!chosen.contains(id)) others.push_back(id);
  }
  const std::size_t extra = static_cast<std::size_t>(ref_size) - targets.size();
  if (extra > others.size()) {
    return absl::FailedPreconditionError(absl::StrCat(
        "population too small for a reference of ", ref_size));
  }
  Rng rng(DeriveSeed(seed, {kReferenceStream}));
  std::vector<UserId> out(targets.begin(), targets.end());
  for (std::size_t pos : SampleWithoutReplacement(others.size(), extra, rng)) {
    out.push_back(others[pos]);
  }
  return out;
}

absl::StatusOr<AttackResult> RunExperiment(const Population& world,
                                           const ExperimentSpec& spec) {
  if (absl::Status s = spec.Validate(); !s.ok()) return s;
  const std::vector<UserId> targets =
      SelectTargets(world, spec.n_targets, spec.min_target_visits, spec.seed);
  if (targets.empty()) {
    return absl::FailedPreconditionError(absl::StrCat(
        "no user has at least ", spec.min_target_visits, " visits"));
  }
  absl::StatusOr<std::vector<UserId>> reference =
      SelectReference(world, targets, spec.ref_size, spec.seed);
  if (!reference.ok()) return reference.status();

  SharedInputs shared{&world, &spec, {}, {}, {}};
  shared.reference_ids.insert(reference->begin(), reference->end());
  if (spec.adversary == Adversary::kKnockKnock) {
    shared.real_pool.kind = ReferencePool::Kind::kRealKnockKnock;
    for (UserId id : *reference) {
      shared.pool_index.emplace(id, shared.real_pool.size());
      shared.real_pool.traces.push_back(world.trace(*world.IndexOf(id)));
      shared.real_pool.ids.push_back(id);
    }
  }

  AttackResult result;
  result.per_target.resize(targets.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < targets.size(); i = next++) {
      TargetResult& r = result.per_target[i];
      r.target = targets[i];
      if (absl::Status s = RunTarget(shared, targets[i], &r); !s.ok()) {
        r.error = s.ToString();
      }
    }
  };
  const int n_threads =
      std::min<int>(spec.workers, static_cast<int>(targets.size()));
  if (n_threads <= 1) {
    work();
  } else {
    std::vector<std::thread> threads;
    for (int t = 0; t < n_threads; ++t) threads.emplace_back(work);
    for (std::thread& t : threads) t.join();
  }

  std::vector<double> aucs, accuracies;
  for (const TargetResult& r : result.per_target) {
    if (r.error) {
      ++result.failed;
      continue;
    }
    aucs.push_back(r.auc);
    accuracies.push_back(r.accuracy);
  }
  result.succeeded = static_cast<int>(aucs.size());
  if (!aucs.empty()) {
    result.mean_auc = std::accumulate(aucs.begin(), aucs.end(), 0.0) / aucs.size();
    result.mean_accuracy =
        std::accumulate(accuracies.begin(), accuracies.end(), 0.0) / accuracies.size();
    result.se_auc = StandardError(aucs);
    result.se_accuracy = StandardError(accuracies);
  }
  return result;
}

}  // namespace aggmia
