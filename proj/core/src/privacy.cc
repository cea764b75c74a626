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

#include "aggmia/privacy.h"

#include <algorithm>
#include <cmath>

#include "absl/strings/str_cat.h"

namespace aggmia {

absl::Status PrivacyConfig::Validate() const {
  if (ssc_k.has_value() && *ssc_k < 0) {
    return absl::InvalidArgumentError("ssc_k must be nonnegative");
  }
  if (dp.has_value()) {
    if (!(dp->epsilon > 0) || !std::isfinite(dp->epsilon)) {
      return absl::InvalidArgumentError("dp_epsilon must be positive");
    }
    if (!(dp->sensitivity >= 1) || !std::isfinite(dp->sensitivity)) {
      return absl::InvalidArgumentError("dp_sensitivity must be >= 1");
    }
  }
  return absl::OkStatus();
}

Provenance PrivacyConfig::ToProvenance() const {
  Provenance p;
  if (dp.has_value()) {
    p.epsilon = dp->epsilon;
    p.sensitivity = dp->sensitivity;
    p.unit = dp->unit;
  }
  if (ssc_k.has_value()) p.ssc_k = *ssc_k;
  if (dp && ssc_k) {
    p.kind = Provenance::Kind::kDpSsc;
  } else if (dp) {
    p.kind = Provenance::Kind::kDp;
  } else if (ssc_k) {
    p.kind = Provenance::Kind::kSsc;
  }
  return p;
}

std::string PrivacyConfig::ToString() const { return ToProvenance().ToString(); }

absl::StatusOr<AggregateMatrix> SuppressSmallCounts(const AggregateMatrix& a,
                                                    int k) {
  if (k < 0) return absl::InvalidArgumentError("SSC threshold must be >= 0");
  const Provenance& in = a.provenance();
  if (in.has_ssc()) {
    // Re-suppression is allowed (it is idempotent for equal k) but the
    // recorded threshold keeps the larger one.
    k = std::max(k, in.ssc_k);
  }
  AggregateMatrix out = a;
  for (double& c : out.mutable_counts()) {
    if (c <= k) c = 0.0;
  }
  Provenance p = in;
  p.ssc_k = k;
  p.kind = in.has_dp() ? Provenance::Kind::kDpSsc : Provenance::Kind::kSsc;
  out.set_provenance(p);
  return out;
}

std::vector<double> LaplaceNoise(Dims dims, double scale, Rng& rng) {
  const uint64_t key = rng.NextKey();
  std::vector<double> noise(dims.cells());
  for (std::size_t i = 0; i < noise.size(); ++i) {
    noise[i] = LaplaceFromBits(CounterBits(key, i), scale);
  }
  return noise;
}

std::vector<double> AddNoise(const AggregateMatrix& a,
                             std::span<const double> noise) {
  std::vector<double> out(a.counts().begin(), a.counts().end());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += noise[i];
  return out;
}

AggregateMatrix PostProcessNoisy(Dims dims, int64_t group_size,
                                 std::vector<double> noisy,
                                 const DpParams& params) {
  const double m = static_cast<double>(group_size);
  for (double& c : noisy) c = std::floor(std::clamp(c, 0.0, m));
  AggregateMatrix out(dims, group_size);
  out.mutable_counts() = std::move(noisy);
  Provenance p;
  p.kind = Provenance::Kind::kDp;
  p.epsilon = params.epsilon;
  p.sensitivity = params.sensitivity;
  p.unit = params.unit;
  out.set_provenance(p);
  return out;
}

absl::StatusOr<AggregateMatrix> AddLaplaceDp(const AggregateMatrix& a,
                                             double epsilon, double sensitivity,
                                             Rng& rng, DpUnit unit) {
  if (!(epsilon > 0)) return absl::InvalidArgumentError("epsilon must be > 0");
  if (!(sensitivity > 0)) {
    return absl::InvalidArgumentError("sensitivity must be > 0");
  }
  if (a.provenance().kind != Provenance::Kind::kRaw) {
    return absl::FailedPreconditionError("DP noise requires a raw aggregate");
  }
  const DpParams params{epsilon, sensitivity, unit};
  std::vector<double> noise = LaplaceNoise(a.dims(), params.scale(), rng);
  return PostProcessNoisy(a.dims(), a.group_size(), AddNoise(a, noise), params);
}

absl::StatusOr<LocationTrace> CapUserDay(const LocationTrace& trace,
                                         int max_per_day, int epochs_per_day,
                                         Rng& rng) {
  if (max_per_day <= 0 || epochs_per_day <= 0) {
    return absl::InvalidArgumentError(
        "user-day cap and epochs per day must be positive");
  }
  std::span<const Visit> visits = trace.visits();
  // Visits are sorted by roi; bucket them by day first.
  const int n_days =
      (trace.dims().n_epochs + epochs_per_day - 1) / epochs_per_day;
  std::vector<std::vector<Visit>> by_day(static_cast<std::size_t>(n_days));
  for (const Visit& v : visits) {
    by_day[static_cast<std::size_t>(v.epoch / epochs_per_day)].push_back(v);
  }
  bool changed = false;
  std::vector<Visit> kept;
  kept.reserve(visits.size());
  for (auto& day : by_day) {
    const auto cap = static_cast<std::size_t>(max_per_day);
    if (day.size() <= cap) {
      kept.insert(kept.end(), day.begin(), day.end());
      continue;
    }
    changed = true;
    for (std::size_t i : SampleWithoutReplacement(day.size(), cap, rng)) {
      kept.push_back(day[i]);
    }
  }
  if (!changed) return trace;
  return LocationTrace::FromVisits(trace.dims(), std::move(kept));
}

absl::StatusOr<AggregateMatrix> ApplyPipeline(const AggregateMatrix& a,
                                              const PrivacyConfig& cfg,
                                              Rng& rng) {
  if (absl::Status s = cfg.Validate(); !s.ok()) return s;
  if (a.provenance().kind != Provenance::Kind::kRaw) {
    return absl::FailedPreconditionError(
        "privacy pipeline requires a raw aggregate");
  }
  AggregateMatrix out = a;
  if (cfg.dp.has_value()) {
    absl::StatusOr<AggregateMatrix> noisy =
        AddLaplaceDp(out, cfg.dp->epsilon, cfg.dp->sensitivity, rng, cfg.dp->unit);
    if (!noisy.ok()) return noisy.status();
    out = *std::move(noisy);
  }
  if (cfg.ssc_k.has_value()) {
    absl::StatusOr<AggregateMatrix> suppressed =
        SuppressSmallCounts(out, *cfg.ssc_k);
    if (!suppressed.ok()) return suppressed.status();
    out = *std::move(suppressed);
  }
  return out;
}

std::optional<int> UserDayCap(const PrivacyConfig& cfg) {
  if (!cfg.dp.has_value() || cfg.dp->unit != DpUnit::kUserDay) return std::nullopt;
  return static_cast<int>(std::floor(cfg.dp->sensitivity));
}

absl::StatusOr<AggregateMatrix> ReleaseGroup(
    std::span<const LocationTrace* const> traces, const PrivacyConfig& cfg,
    int epochs_per_day, Rng& rng) {
  if (absl::Status s = cfg.Validate(); !s.ok()) return s;
  absl::StatusOr<AggregateMatrix> raw;
  if (std::optional<int> cap = UserDayCap(cfg)) {
    std::vector<LocationTrace> capped;
    capped.reserve(traces.size());
    for (const LocationTrace* t : traces) {
      absl::StatusOr<LocationTrace> c = CapUserDay(*t, *cap, epochs_per_day, rng);
      if (!c.ok()) return c.status();
      capped.push_back(*std::move(c));
    }
    raw = Aggregate(std::span<const LocationTrace>(capped));
  } else {
    raw = Aggregate(traces);
  }
  if (!raw.ok()) return raw.status();
  return ApplyPipeline(*raw, cfg, rng);
}

}  // namespace aggmia
