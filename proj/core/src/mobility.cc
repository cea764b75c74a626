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

#include "aggmia/mobility.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"

namespace aggmia {
namespace {

bool IsIntegral(double x) { return std::floor(x) == x; }

}  // namespace

absl::StatusOr<RoiGeometry> RoiGeometry::Create(std::vector<Point> positions) {
  if (positions.size() < 3) {
    return absl::InvalidArgumentError(
        absl::StrCat("geometry needs at least 3 ROIs, got ", positions.size()));
  }
  std::set<std::pair<double, double>> seen;
  for (std::size_t i = 0; i < positions.size(); ++i) {
    const Point& p = positions[i];
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
      return absl::InvalidArgumentError(
          absl::StrCat("ROI ", i, " has a non-finite coordinate"));
    }
    if (!seen.emplace(p.x, p.y).second) {
      return absl::InvalidArgumentError(
          absl::StrCat("ROI ", i, " duplicates the coordinates of another ROI"));
    }
  }
  return RoiGeometry(std::move(positions));
}

absl::StatusOr<LocationTrace> LocationTrace::Create(Dims dims,
                                                    std::vector<Visit> visits) {
  if (dims.n_rois <= 0 || dims.n_epochs <= 0) {
    return absl::InvalidArgumentError("trace dims must be positive");
  }
  for (const Visit& v : visits) {
    if (v.roi < 0 || v.roi >= dims.n_rois || v.epoch < 0 ||
        v.epoch >= dims.n_epochs) {
      return absl::OutOfRangeError(absl::StrCat("visit (", v.roi, ",", v.epoch,
                                                ") outside ", dims.n_rois, "x",
                                                dims.n_epochs));
    }
  }
  return FromVisits(dims, std::move(visits));
}

LocationTrace LocationTrace::FromVisits(Dims dims, std::vector<Visit> visits) {
  std::sort(visits.begin(), visits.end());
  visits.erase(std::unique(visits.begin(), visits.end()), visits.end());
  return LocationTrace(dims, std::move(visits));
}

bool LocationTrace::Contains(Visit v) const {
  return std::binary_search(visits_.begin(), visits_.end(), v);
}

std::string Provenance::ToString() const {
  switch (kind) {
    case Kind::kRaw:
      return "raw";
    case Kind::kSsc:
      return absl::StrCat("ssc(k=", ssc_k, ")");
    case Kind::kDp:
      return absl::StrCat("dp(eps=", epsilon, ",delta=", sensitivity, ")");
    case Kind::kDpSsc:
      return absl::StrCat("dp+ssc(eps=", epsilon, ",delta=", sensitivity,
                          ",k=", ssc_k, ")");
  }
  return "unknown";
}

AggregateMatrix::AggregateMatrix(Dims dims, int64_t group_size)
    : dims_(dims), group_size_(group_size), counts_(dims.cells(), 0.0) {}

absl::StatusOr<AggregateMatrix> AggregateMatrix::Create(
    Dims dims, int64_t group_size, Provenance provenance,
    std::vector<double> counts) {
  if (group_size <= 0) {
    return absl::InvalidArgumentError("group size must be positive");
  }
  if (counts.size() != dims.cells()) {
    return absl::InvalidArgumentError(absl::StrCat(
        "expected ", dims.cells(), " counts, got ", counts.size()));
  }
  const bool integral = provenance.kind == Provenance::Kind::kRaw ||
                        provenance.has_dp();
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const double c = counts[i];
    if (!(c >= 0) || !std::isfinite(c)) {
      return absl::InvalidArgumentError(
          absl::StrCat("count at cell ", i, " is negative or not finite"));
    }
    if (integral && (!IsIntegral(c) || c > static_cast<double>(group_size))) {
      return absl::InvalidArgumentError(absl::StrCat(
          "count ", c, " at cell ", i, " is not an integer in [0, m]"));
    }
  }
  AggregateMatrix a(dims, group_size);
  a.provenance_ = provenance;
  a.counts_ = std::move(counts);
  return a;
}

double AggregateMatrix::Total() const {
  return std::accumulate(counts_.begin(), counts_.end(), 0.0);
}

void AccumulateTrace(const LocationTrace& trace, std::span<double> counts) {
  const Dims dims = trace.dims();
  for (const Visit& v : trace.visits()) counts[dims.Index(v.roi, v.epoch)] += 1.0;
}

absl::StatusOr<AggregateMatrix> Aggregate(
    std::span<const LocationTrace* const> traces) {
  if (traces.empty()) {
    return absl::InvalidArgumentError("cannot aggregate an empty group");
  }
  const Dims dims = traces.front()->dims();
  AggregateMatrix out(dims, static_cast<int64_t>(traces.size()));
  for (const LocationTrace* t : traces) {
    if (t->dims() != dims) {
      return absl::InvalidArgumentError("traces in a group have different dims");
    }
    AccumulateTrace(*t, out.mutable_counts());
  }
  return out;
}

absl::StatusOr<AggregateMatrix> Aggregate(std::span<const LocationTrace> traces) {
  std::vector<const LocationTrace*> refs;
  refs.reserve(traces.size());
  for (const LocationTrace& t : traces) refs.push_back(&t);
  return Aggregate(std::span<const LocationTrace* const>(refs));
}

absl::StatusOr<LocationTrace> PartialTrace(const LocationTrace& trace,
                                           double fraction, Rng& rng) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("fraction must lie in (0, 1], got ", fraction));
  }
  if (trace.empty()) {
    return absl::InvalidArgumentError("cannot take a partial empty trace");
  }
  const std::size_t n = trace.size();
  // The small epsilon keeps exact products such as 0.1 * 10 from rounding up.
  const auto keep = static_cast<std::size_t>(
      std::ceil(fraction * static_cast<double>(n) - 1e-9));
  const std::size_t k = std::clamp<std::size_t>(keep, 1, n);
  if (k == n) return trace;
  std::vector<Visit> kept;
  kept.reserve(k);
  for (std::size_t i : SampleWithoutReplacement(n, k, rng)) {
    kept.push_back(trace.visits()[i]);
  }
  return LocationTrace::FromVisits(trace.dims(), std::move(kept));
}

absl::StatusOr<Population> Population::Create(RoiGeometry geometry,
                                              int n_epochs, int epochs_per_day,
                                              std::vector<UserId> ids,
                                              std::vector<LocationTrace> traces) {
  if (ids.size() != traces.size()) {
    return absl::InvalidArgumentError("ids and traces differ in length");
  }
  if (n_epochs <= 0 || epochs_per_day <= 0) {
    return absl::InvalidArgumentError("epoch counts must be positive");
  }
  Population p;
  p.dims_ = Dims{static_cast<int>(geometry.size()), n_epochs};
  p.geometry_ = std::move(geometry);
  p.epochs_per_day_ = epochs_per_day;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (traces[i].dims() != p.dims_) {
      return absl::InvalidArgumentError(
          absl::StrCat("trace of user ", ids[i], " has mismatched dims"));
    }
    if (!p.index_.emplace(ids[i], i).second) {
      return absl::InvalidArgumentError(
          absl::StrCat("duplicate user id ", ids[i]));
    }
  }
  p.ids_ = std::move(ids);
  p.traces_ = std::move(traces);
  return p;
}

std::optional<std::size_t> Population::IndexOf(UserId id) const {
  auto it = index_.find(id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

absl::StatusOr<std::vector<std::size_t>> SampleGroup(
    const Population& population, int m,
    const std::unordered_set<UserId>& exclude, std::optional<UserId> include,
    Rng& rng) {
  if (m <= 0) return absl::InvalidArgumentError("group size must be positive");
  std::optional<std::size_t> include_index;
  if (include.has_value()) {
    include_index = population.IndexOf(*include);
    if (!include_index) {
      return absl::NotFoundError(absl::StrCat("unknown user ", *include));
    }
  }
  std::vector<std::size_t> eligible;
  eligible.reserve(population.size());
  for (std::size_t i = 0; i < population.size(); ++i) {
    if (include_index && i == *include_index) continue;
    if (exclude.contains(population.id(i))) continue;
    eligible.push_back(i);
  }
  const std::size_t need = static_cast<std::size_t>(m) - (include_index ? 1 : 0);
  if (eligible.size() < need) {
    return absl::FailedPreconditionError(
        absl::StrCat("need ", need, " eligible users, have ", eligible.size()));
  }
  std::vector<std::size_t> group;
  group.reserve(static_cast<std::size_t>(m));
  for (std::size_t pos : SampleWithoutReplacement(eligible.size(), need, rng)) {
    group.push_back(eligible[pos]);
  }
  if (include_index) group.push_back(*include_index);
  return group;
}

}  // namespace aggmia
