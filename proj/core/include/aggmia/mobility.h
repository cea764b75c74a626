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

#ifndef AGGMIA_MOBILITY_H_
#define AGGMIA_MOBILITY_H_

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "absl/status/statusor.h"
#include "aggmia/random.h"

namespace aggmia {

using UserId = int64_t;

struct Point {
  double x = 0;
  double y = 0;
  friend bool operator==(const Point&, const Point&) = default;
};

// Planar ROI positions, indexed 0..size()-1.
class RoiGeometry {
 public:
  RoiGeometry() = default;
  // Requires at least 3 ROIs with pairwise distinct coordinates.
  static absl::StatusOr<RoiGeometry> Create(std::vector<Point> positions);

  std::size_t size() const { return positions_.size(); }
  const Point& operator[](std::size_t i) const { return positions_[i]; }
  std::span<const Point> positions() const { return positions_; }

  friend bool operator==(const RoiGeometry&, const RoiGeometry&) = default;

 private:
  explicit RoiGeometry(std::vector<Point> positions)
      : positions_(std::move(positions)) {}
  std::vector<Point> positions_;
};

struct Dims {
  int n_rois = 0;
  int n_epochs = 0;

  std::size_t cells() const {
    return static_cast<std::size_t>(n_rois) * static_cast<std::size_t>(n_epochs);
  }
  std::size_t Index(int roi, int epoch) const {
    return static_cast<std::size_t>(roi) * static_cast<std::size_t>(n_epochs) +
           static_cast<std::size_t>(epoch);
  }
  friend bool operator==(const Dims&, const Dims&) = default;
};

struct Visit {
  int32_t roi = 0;
  int32_t epoch = 0;
  friend auto operator<=>(const Visit&, const Visit&) = default;
};

// A user's visits as a sorted set of (roi, epoch) pairs: the sparse form of
// the binary |S| x |T| visit matrix.
class LocationTrace {
 public:
  LocationTrace() = default;

  // Sorts and deduplicates `visits`. Rejects visits outside `dims`.
  static absl::StatusOr<LocationTrace> Create(Dims dims,
                                              std::vector<Visit> visits);
  // Same as Create for inputs already known to lie within `dims`.
  static LocationTrace FromVisits(Dims dims, std::vector<Visit> visits);

  Dims dims() const { return dims_; }
  std::span<const Visit> visits() const { return visits_; }
  std::size_t size() const { return visits_.size(); }
  bool empty() const { return visits_.empty(); }
  bool Contains(Visit v) const;

  friend bool operator==(const LocationTrace&, const LocationTrace&) = default;

 private:
  LocationTrace(Dims dims, std::vector<Visit> visits)
      : dims_(dims), visits_(std::move(visits)) {}
  Dims dims_;
  std::vector<Visit> visits_;
};

enum class DpUnit { kEvent, kUserDay };

// Which release regime produced an aggregate. DP is always applied before
// suppression when both are present.
struct Provenance {
  enum class Kind { kRaw, kSsc, kDp, kDpSsc };
  Kind kind = Kind::kRaw;
  int ssc_k = 0;
  double epsilon = 0;
  double sensitivity = 0;
  DpUnit unit = DpUnit::kEvent;

  bool has_dp() const { return kind == Kind::kDp || kind == Kind::kDpSsc; }
  bool has_ssc() const { return kind == Kind::kSsc || kind == Kind::kDpSsc; }
  std::string ToString() const;
  friend bool operator==(const Provenance&, const Provenance&) = default;
};

// Dense |S| x |T| count matrix (row-major, roi-major) for a group of m users.
class AggregateMatrix {
 public:
  AggregateMatrix() = default;
  // All-zero raw aggregate.
  AggregateMatrix(Dims dims, int64_t group_size);

  // Validates counts >= 0, and integrality with entries <= m for Raw and
  // post-processed DP provenance.
  static absl::StatusOr<AggregateMatrix> Create(Dims dims, int64_t group_size,
                                                Provenance provenance,
                                                std::vector<double> counts);

  Dims dims() const { return dims_; }
  int64_t group_size() const { return group_size_; }
  const Provenance& provenance() const { return provenance_; }
  std::span<const double> counts() const { return counts_; }
  double at(int roi, int epoch) const { return counts_[dims_.Index(roi, epoch)]; }
  double Total() const;

  // Mutation is for producers in this library; released values are treated
  // as immutable by consumers.
  std::vector<double>& mutable_counts() { return counts_; }
  void set_provenance(Provenance p) { provenance_ = p; }

  friend bool operator==(const AggregateMatrix&, const AggregateMatrix&) = default;

 private:
  Dims dims_;
  int64_t group_size_ = 0;
  Provenance provenance_;
  std::vector<double> counts_;
};

// Adds the visits of `trace` into a dense counts buffer of matching dims.
void AccumulateTrace(const LocationTrace& trace, std::span<double> counts);

// Raw aggregate (entrywise sum of visit matrices). Rejects an empty list or
// mismatched dims.
absl::StatusOr<AggregateMatrix> Aggregate(std::span<const LocationTrace> traces);
absl::StatusOr<AggregateMatrix> Aggregate(
    std::span<const LocationTrace* const> traces);

// Uniform subset of ceil(fraction * |trace|) visits. fraction must be in (0, 1].
absl::StatusOr<LocationTrace> PartialTrace(const LocationTrace& trace,
                                           double fraction, Rng& rng);

class Population {
 public:
  static absl::StatusOr<Population> Create(RoiGeometry geometry, int n_epochs,
                                           int epochs_per_day,
                                           std::vector<UserId> ids,
                                           std::vector<LocationTrace> traces);

  const RoiGeometry& geometry() const { return geometry_; }
  Dims dims() const { return dims_; }
  int epochs_per_day() const { return epochs_per_day_; }
  std::size_t size() const { return traces_.size(); }
  UserId id(std::size_t index) const { return ids_[index]; }
  std::span<const UserId> ids() const { return ids_; }
  const LocationTrace& trace(std::size_t index) const { return traces_[index]; }
  std::span<const LocationTrace> traces() const { return traces_; }
  std::optional<std::size_t> IndexOf(UserId id) const;

  friend bool operator==(const Population& a, const Population& b) {
    return a.geometry_ == b.geometry_ && a.dims_ == b.dims_ &&
           a.epochs_per_day_ == b.epochs_per_day_ && a.ids_ == b.ids_ &&
           a.traces_ == b.traces_;
  }

 private:
  Population() = default;
  RoiGeometry geometry_;
  Dims dims_;
  int epochs_per_day_ = 1;
  std::vector<UserId> ids_;
  std::vector<LocationTrace> traces_;
  std::unordered_map<UserId, std::size_t> index_;
};

// Uniform without-replacement sample of m population indices among users not
// in `exclude`. If `include` is set that user is a member (placed last) and
// the other m-1 are drawn from the remaining eligible users.
absl::StatusOr<std::vector<std::size_t>> SampleGroup(
    const Population& population, int m,
    const std::unordered_set<UserId>& exclude, std::optional<UserId> include,
    Rng& rng);

}  // namespace aggmia

#endif  // AGGMIA_MOBILITY_H_
