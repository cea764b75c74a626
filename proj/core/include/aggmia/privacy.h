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

#ifndef AGGMIA_PRIVACY_H_
#define AGGMIA_PRIVACY_H_

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "aggmia/mobility.h"
#include "aggmia/random.h"

namespace aggmia {

struct DpParams {
  double epsilon = 1.0;
  // Global sensitivity. For DpUnit::kUserDay this is also the per-day cap on
  // visits contributed by one user.
  double sensitivity = 1.0;
  DpUnit unit = DpUnit::kEvent;

  double scale() const { return sensitivity / epsilon; }
};

// Release regime. When both mechanisms are set, DP noise is applied first and
// suppression second.
struct PrivacyConfig {
  std::optional<int> ssc_k;
  std::optional<DpParams> dp;

  static PrivacyConfig Raw() { return {}; }
  static PrivacyConfig Ssc(int k) { return {k, std::nullopt}; }
  static PrivacyConfig Dp(double epsilon, double sensitivity = 1.0,
                          DpUnit unit = DpUnit::kEvent) {
    return {std::nullopt, DpParams{epsilon, sensitivity, unit}};
  }

  bool is_raw() const { return !ssc_k.has_value() && !dp.has_value(); }
  absl::Status Validate() const;
  Provenance ToProvenance() const;
  std::string ToString() const;
};

// Entries <= k become 0, entries > k are kept verbatim.
absl::StatusOr<AggregateMatrix> SuppressSmallCounts(const AggregateMatrix& a,
                                                    int k);

// Per-entry Laplace(scale) noise for `dims`. One key is drawn from `rng`; the
// entry at flat index i uses the i-th word of that key's counter stream.
std::vector<double> LaplaceNoise(Dims dims, double scale, Rng& rng);

// Adds `noise` to the counts of `a` without any post-processing.
std::vector<double> AddNoise(const AggregateMatrix& a,
                             std::span<const double> noise);

// Clamps noisy counts to [0, m] and floors them, producing a DP aggregate.
AggregateMatrix PostProcessNoisy(Dims dims, int64_t group_size,
                                 std::vector<double> noisy,
                                 const DpParams& params);

// Laplace mechanism with post-processing. `a` must be Raw.
absl::StatusOr<AggregateMatrix> AddLaplaceDp(const AggregateMatrix& a,
                                             double epsilon, double sensitivity,
                                             Rng& rng,
                                             DpUnit unit = DpUnit::kEvent);

// Keeps at most `max_per_day` visits in every window of `epochs_per_day`
// consecutive epochs, choosing a uniform subset on days that exceed the cap.
absl::StatusOr<LocationTrace> CapUserDay(const LocationTrace& trace,
                                         int max_per_day, int epochs_per_day,
                                         Rng& rng);

// Applies the configured DP (if any) and then SSC (if any). `a` must be Raw.
absl::StatusOr<AggregateMatrix> ApplyPipeline(const AggregateMatrix& a,
                                              const PrivacyConfig& cfg, Rng& rng);

// Per-day cap used for user-day DP, or nullopt when traces are not capped.
std::optional<int> UserDayCap(const PrivacyConfig& cfg);

// Full data-collector release of a group: user-day capping when configured,
// aggregation, then ApplyPipeline. Capping draws come before noise draws.
absl::StatusOr<AggregateMatrix> ReleaseGroup(
    std::span<const LocationTrace* const> traces, const PrivacyConfig& cfg,
    int epochs_per_day, Rng& rng);

}  // namespace aggmia

#endif  // AGGMIA_PRIVACY_H_
