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

#ifndef AGGMIA_IO_H_
#define AGGMIA_IO_H_

#include <filesystem>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "aggmia/distributions.h"
#include "aggmia/estimation.h"
#include "aggmia/mobility.h"

namespace aggmia {

// Shortest decimal text that parses back to exactly `v`.
std::string FormatDouble(double v);

// Trace file: optional `# key=value` lines (n_epochs, epochs_per_day), an
// optional `user_id,roi_id,epoch_id` header, then one visit per line.
// Geometry file: optional `roi_id,x,y` header, then one ROI per line.
absl::Status WriteTraces(const Population& population, std::ostream& out);
absl::Status WriteGeometry(const RoiGeometry& geometry, std::ostream& out);

struct LoadOptions {
  // Overrides the file's n_epochs comment; without either, the largest
  // epoch index plus one.
  std::optional<int> n_epochs;
  std::optional<int> epochs_per_day;
};

struct LoadReport {
  // Repeated visit lines that were merged.
  int duplicate_visits = 0;
};

absl::StatusOr<RoiGeometry> ReadGeometry(std::istream& in);
// Users keep their order of first appearance.
absl::StatusOr<Population> ReadWorld(std::istream& traces, std::istream& geometry,
                                     const LoadOptions& options = {},
                                     LoadReport* report = nullptr);
absl::StatusOr<Population> LoadWorld(const std::filesystem::path& traces,
                                     const std::filesystem::path& geometry,
                                     const LoadOptions& options = {},
                                     LoadReport* report = nullptr);
absl::Status DumpWorld(const Population& population,
                       const std::filesystem::path& traces,
                       const std::filesystem::path& geometry);

// Aggregate file: `# key=value` header (n_rois, n_epochs, m, provenance,
// ssc_k, dp_epsilon, dp_sensitivity, dp_unit), a `roi_id,epoch_id,count`
// header, then the nonzero entries.
absl::Status WriteAggregate(const AggregateMatrix& a, std::ostream& out);

struct AggregateLoadReport {
  // Entries above m that were clamped to m (Raw and DP provenance only).
  int clamped_entries = 0;
};
absl::StatusOr<AggregateMatrix> ReadAggregate(std::istream& in,
                                              AggregateLoadReport* report = nullptr);

// Writes `index,probability` rows.
void WriteDistribution(const DiscreteDistribution& p, std::string_view index_name,
                       std::ostream& out);

// Marginal diagnostic: empirical and corrected vectors side by side, selected
// powers, and the mean-visits iterates.
void WriteMarginalDiagnostic(const MarginalEstimate& estimate, std::ostream& space,
                             std::ostream& time, std::ostream& summary);

// Edge list `u,v` of the adjacency graph.
void WriteGraph(const DelaunayGraph& graph, std::ostream& out);

// Reads a whole file; NotFound when it cannot be opened.
absl::StatusOr<std::string> ReadFile(const std::filesystem::path& path);
absl::Status WriteFile(const std::filesystem::path& path, std::string_view contents);

}  // namespace aggmia

#endif  // AGGMIA_IO_H_
