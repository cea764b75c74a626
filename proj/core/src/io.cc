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

#include "aggmia/io.h"

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_map>
#include <utility>
#include <vector>

#include "absl/strings/ascii.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_split.h"
#include "absl/strings/string_view.h"

namespace aggmia {
namespace {

std::string_view View(absl::string_view s) { return {s.data(), s.size()}; }

template <typename T>
bool ParseNumber(absl::string_view field, T* out) {
  std::string_view s = View(absl::StripAsciiWhitespace(field));
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), *out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

absl::Status LineError(absl::string_view file, int line, absl::string_view what) {
  return absl::InvalidArgumentError(absl::StrCat(file, " line ", line, ": ", what));
}

// Splits a `# key=value` comment; returns false for other comments.
bool ParseHeaderComment(absl::string_view line, std::string* key, std::string* value) {
  absl::string_view body = absl::StripAsciiWhitespace(line.substr(1));
  const std::size_t eq = body.find('=');
  if (eq == absl::string_view::npos) return false;
  *key = std::string(absl::StripAsciiWhitespace(body.substr(0, eq)));
  *value = std::string(absl::StripAsciiWhitespace(body.substr(eq + 1)));
  return true;
}

bool IsHeader(absl::string_view line, absl::string_view first_column) {
  std::vector<absl::string_view> f = absl::StrSplit(line, ',');
  return !f.empty() && absl::StripAsciiWhitespace(f[0]) == first_column;
}

std::string ProvenanceToken(Provenance::Kind kind) {
  switch (kind) {
    case Provenance::Kind::kRaw:
      return "raw";
    case Provenance::Kind::kSsc:
      return "ssc";
    case Provenance::Kind::kDp:
      return "dp";
    case Provenance::Kind::kDpSsc:
      return "dp+ssc";
  }
  return "raw";
}

}  // namespace

std::string FormatDouble(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

absl::Status WriteTraces(const Population& population, std::ostream& out) {
  out << "# n_epochs=" << population.dims().n_epochs << "\n";
  out << "# epochs_per_day=" << population.epochs_per_day() << "\n";
  out << "user_id,roi_id,epoch_id\n";
  for (std::size_t i = 0; i < population.size(); ++i) {
    const UserId id = population.id(i);
    for (const Visit& v : population.trace(i).visits()) {
      out << id << "," << v.roi << "," << v.epoch << "\n";
    }
  }
  if (!out) return absl::DataLossError("failed writing traces");
  return absl::OkStatus();
}

absl::Status WriteGeometry(const RoiGeometry& geometry, std::ostream& out) {
  out << "roi_id,x,y\n";
  for (std::size_t i = 0; i < geometry.size(); ++i) {
    out << i << "," << FormatDouble(geometry[i].x) << "," << FormatDouble(geometry[i].y)
        << "\n";
  }
  if (!out) return absl::DataLossError("failed writing geometry");
  return absl::OkStatus();
}

absl::StatusOr<RoiGeometry> ReadGeometry(std::istream& in) {
  std::map<int, Point> rows;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    absl::string_view s = absl::StripAsciiWhitespace(line);
    if (s.empty() || s.front() == '#') continue;
    if (IsHeader(s, "roi_id")) continue;
    std::vector<absl::string_view> f = absl::StrSplit(s, ',');
    int id = 0;
    Point p;
    if (f.size() != 3 || !ParseNumber(f[0], &id) || !ParseNumber(f[1], &p.x) ||
        !ParseNumber(f[2], &p.y)) {
      return LineError("geometry", line_no, "expected roi_id,x,y");
    }
    if (id < 0) return LineError("geometry", line_no, "negative roi id");
    if (!rows.emplace(id, p).second) {
      return LineError("geometry", line_no, absl::StrCat("duplicate roi ", id));
    }
  }
  std::vector<Point> points;
  points.reserve(rows.size());
  for (const auto& [id, p] : rows) {
    if (id != static_cast<int>(points.size())) {
      return absl::InvalidArgumentError(
          absl::StrCat("geometry roi ids must be 0..n-1; missing ", points.size()));
    }
    points.push_back(p);
  }
  return RoiGeometry::Create(std::move(points));
}

absl::StatusOr<Population> ReadWorld(std::istream& traces, std::istream& geometry_in,
                                     const LoadOptions& options, LoadReport* report) {
  absl::StatusOr<RoiGeometry> geometry = ReadGeometry(geometry_in);
  if (!geometry.ok()) return geometry.status();
  const int n_rois = static_cast<int>(geometry->size());

  std::optional<int> file_epochs, file_epochs_per_day;
  std::vector<UserId> ids;
  std::unordered_map<UserId, std::size_t> slot;
  std::vector<std::vector<Visit>> visits;
  int max_epoch = -1;
  std::string line;
  int line_no = 0;
  while (std::getline(traces, line)) {
    ++line_no;
    absl::string_view s = absl::StripAsciiWhitespace(line);
    if (s.empty()) continue;
    if (s.front() == '#') {
      std::string key, value;
      if (!ParseHeaderComment(s, &key, &value)) continue;
      int parsed = 0;
      if (key != "n_epochs" && key != "epochs_per_day") continue;
      if (!ParseNumber(absl::string_view(value), &parsed) || parsed <= 0) {
        return LineError("traces", line_no, absl::StrCat("invalid ", key));
      }
      (key == "n_epochs" ? file_epochs : file_epochs_per_day) = parsed;
      continue;
    }
    if (IsHeader(s, "user_id")) continue;
    std::vector<absl::string_view> f = absl::StrSplit(s, ',');
    UserId user = 0;
    Visit v;
    if (f.size() != 3 || !ParseNumber(f[0], &user) || !ParseNumber(f[1], &v.roi) ||
        !ParseNumber(f[2], &v.epoch)) {
      return LineError("traces", line_no, "expected user_id,roi_id,epoch_id");
    }
    if (v.roi < 0 || v.roi >= n_rois) {
      return absl::OutOfRangeError(absl::StrCat("traces line ", line_no, ": roi ",
                                                v.roi, " outside [0, ", n_rois, ")"));
    }
    if (v.epoch < 0) {
      return absl::OutOfRangeError(
          absl::StrCat("traces line ", line_no, ": negative epoch"));
    }
    max_epoch = std::max(max_epoch, v.epoch);
    auto [it, inserted] = slot.emplace(user, ids.size());
    if (inserted) {
      ids.push_back(user);
      visits.emplace_back();
    }
    visits[it->second].push_back(v);
  }
  if (ids.empty()) return absl::InvalidArgumentError("trace file has no visits");

  const int n_epochs = options.n_epochs.value_or(file_epochs.value_or(max_epoch + 1));
  if (max_epoch >= n_epochs) {
    return absl::OutOfRangeError(
        absl::StrCat("epoch ", max_epoch, " outside [0, ", n_epochs, ")"));
  }
  const int epochs_per_day =
      options.epochs_per_day.value_or(file_epochs_per_day.value_or(24));
  const Dims dims{n_rois, n_epochs};

  LoadReport local;
  std::vector<LocationTrace> built;
  built.reserve(ids.size());
  for (std::vector<Visit>& v : visits) {
    const std::size_t raw = v.size();
    absl::StatusOr<LocationTrace> t = LocationTrace::Create(dims, std::move(v));
    if (!t.ok()) return t.status();
    local.duplicate_visits += static_cast<int>(raw - t->size());
    built.push_back(*std::move(t));
  }
  if (report != nullptr) *report = local;
  return Population::Create(*std::move(geometry), n_epochs, epochs_per_day,
                            std::move(ids), std::move(built));
}

absl::StatusOr<Population> LoadWorld(const std::filesystem::path& traces,
                                     const std::filesystem::path& geometry,
                                     const LoadOptions& options, LoadReport* report) {
  std::ifstream t(traces);
  if (!t) return absl::NotFoundError(absl::StrCat("cannot open ", traces.string()));
  std::ifstream g(geometry);
  if (!g) return absl::NotFoundError(absl::StrCat("cannot open ", geometry.string()));
  return ReadWorld(t, g, options, report);
}

absl::Status DumpWorld(const Population& population,
                       const std::filesystem::path& traces,
                       const std::filesystem::path& geometry) {
  std::ostringstream t, g;
  if (absl::Status s = WriteTraces(population, t); !s.ok()) return s;
  if (absl::Status s = WriteGeometry(population.geometry(), g); !s.ok()) return s;
  if (absl::Status s = WriteFile(traces, t.str()); !s.ok()) return s;
  return WriteFile(geometry, g.str());
}

absl::Status WriteAggregate(const AggregateMatrix& a, std::ostream& out) {
  const Provenance& p = a.provenance();
  out << "# n_rois=" << a.dims().n_rois << "\n";
  out << "# n_epochs=" << a.dims().n_epochs << "\n";
  out << "# m=" << a.group_size() << "\n";
  out << "# provenance=" << ProvenanceToken(p.kind) << "\n";
  if (p.has_ssc()) out << "# ssc_k=" << p.ssc_k << "\n";
  if (p.has_dp()) {
    out << "# dp_epsilon=" << FormatDouble(p.epsilon) << "\n";
    out << "# dp_sensitivity=" << FormatDouble(p.sensitivity) << "\n";
    out << "# dp_unit=" << (p.unit == DpUnit::kUserDay ? "user_day" : "event") << "\n";
  }
  out << "roi_id,epoch_id,count\n";
  const Dims d = a.dims();
  for (int s = 0; s < d.n_rois; ++s) {
    for (int t = 0; t < d.n_epochs; ++t) {
      const double c = a.at(s, t);
      if (c != 0) out << s << "," << t << "," << FormatDouble(c) << "\n";
    }
  }
  if (!out) return absl::DataLossError("failed writing aggregate");
  return absl::OkStatus();
}

absl::StatusOr<AggregateMatrix> ReadAggregate(std::istream& in,
                                              AggregateLoadReport* report) {
  std::map<std::string, std::string> header;
  std::vector<std::pair<std::pair<int, int>, double>> entries;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    absl::string_view s = absl::StripAsciiWhitespace(line);
    if (s.empty()) continue;
    if (s.front() == '#') {
      std::string key, value;
      if (ParseHeaderComment(s, &key, &value)) header[key] = value;
      continue;
    }
    if (IsHeader(s, "roi_id")) continue;
    std::vector<absl::string_view> f = absl::StrSplit(s, ',');
    int roi = 0, epoch = 0;
    double count = 0;
    if (f.size() != 3 || !ParseNumber(f[0], &roi) || !ParseNumber(f[1], &epoch) ||
        !ParseNumber(f[2], &count)) {
      return LineError("aggregate", line_no, "expected roi_id,epoch_id,count");
    }
    entries.push_back({{roi, epoch}, count});
  }

  auto get_int = [&](const std::string& key, int64_t* out) -> absl::Status {
    auto it = header.find(key);
    if (it == header.end() || !ParseNumber(absl::string_view(it->second), out)) {
      return absl::InvalidArgumentError(
          absl::StrCat("aggregate header lacks a valid ", key));
    }
    return absl::OkStatus();
  };
  auto get_double = [&](const std::string& key, double* out) -> absl::Status {
    auto it = header.find(key);
    if (it == header.end() || !ParseNumber(absl::string_view(it->second), out)) {
      return absl::InvalidArgumentError(
          absl::StrCat("aggregate header lacks a valid ", key));
    }
    return absl::OkStatus();
  };
  int64_t n_rois = 0, n_epochs = 0, m = 0;
  for (auto [key, dst] : {std::pair{"n_rois", &n_rois}, std::pair{"n_epochs", &n_epochs},
                          std::pair{"m", &m}}) {
    if (absl::Status s = get_int(key, dst); !s.ok()) return s;
  }
  if (n_rois <= 0 || n_epochs <= 0 || m <= 0) {
    return absl::InvalidArgumentError("aggregate dims and m must be positive");
  }

  Provenance p;
  const std::string kind = header.count("provenance") ? header["provenance"] : "raw";
  if (kind == "raw") {
    p.kind = Provenance::Kind::kRaw;
  } else if (kind == "ssc") {
    p.kind = Provenance::Kind::kSsc;
  } else if (kind == "dp") {
    p.kind = Provenance::Kind::kDp;
  } else if (kind == "dp+ssc") {
    p.kind = Provenance::Kind::kDpSsc;
  } else {
    return absl::InvalidArgumentError(absl::StrCat("unknown provenance ", kind));
  }
  if (p.has_ssc()) {
    int64_t k = 0;
    if (absl::Status s = get_int("ssc_k", &k); !s.ok()) return s;
    p.ssc_k = static_cast<int>(k);
  }
  if (p.has_dp()) {
    if (absl::Status s = get_double("dp_epsilon", &p.epsilon); !s.ok()) return s;
    if (absl::Status s = get_double("dp_sensitivity", &p.sensitivity); !s.ok()) return s;
    const std::string unit = header.count("dp_unit") ? header["dp_unit"] : "event";
    if (unit != "event" && unit != "user_day") {
      return absl::InvalidArgumentError(absl::StrCat("unknown dp_unit ", unit));
    }
    p.unit = unit == "user_day" ? DpUnit::kUserDay : DpUnit::kEvent;
  }

  const Dims dims{static_cast<int>(n_rois), static_cast<int>(n_epochs)};
  std::vector<double> counts(dims.cells(), 0.0);
  AggregateLoadReport local;
  const bool bounded = p.kind == Provenance::Kind::kRaw || p.kind == Provenance::Kind::kDp;
  for (const auto& [cell, count] : entries) {
    const auto [roi, epoch] = cell;
    if (roi < 0 || roi >= dims.n_rois || epoch < 0 || epoch >= dims.n_epochs) {
      return absl::OutOfRangeError(
          absl::StrCat("aggregate entry (", roi, ",", epoch, ") outside dims"));
    }
    double c = count;
    if (bounded && c > static_cast<double>(m)) {
      c = static_cast<double>(m);
      ++local.clamped_entries;
    }
    counts[dims.Index(roi, epoch)] = c;
  }
  if (report != nullptr) *report = local;
  return AggregateMatrix::Create(dims, m, p, std::move(counts));
}

void WriteDistribution(const DiscreteDistribution& p, std::string_view index_name,
                       std::ostream& out) {
  out << index_name << ",probability\n";
  for (std::size_t i = 0; i < p.size(); ++i) out << i << "," << FormatDouble(p[i]) << "\n";
}

void WriteMarginalDiagnostic(const MarginalEstimate& estimate, std::ostream& space,
                             std::ostream& time, std::ostream& summary) {
  auto write_pair = [](const DiscreteDistribution& empirical,
                       const DiscreteDistribution& corrected, std::string_view name,
                       std::ostream& out) {
    out << name << ",uncorrected,corrected\n";
    for (std::size_t i = 0; i < empirical.size(); ++i) {
      out << i << "," << FormatDouble(empirical[i]) << "," << FormatDouble(corrected[i])
          << "\n";
    }
  };
  write_pair(estimate.empirical_space, estimate.marginals.space, "roi_id", space);
  write_pair(estimate.empirical_time, estimate.marginals.time, "epoch_id", time);

  const char* correction = "none";
  if (estimate.correction == MarginalCorrection::kLogCompression) {
    correction = "log_compression";
  } else if (estimate.correction == MarginalCorrection::kPowerTransform) {
    correction = "power_transform";
  }
  summary << "key,value\n";
  summary << "correction," << correction << "\n";
  if (estimate.space_power) {
    summary << "space_power," << FormatDouble(estimate.space_power->power) << "\n";
    summary << "space_power_converged," << estimate.space_power->converged << "\n";
  }
  if (estimate.time_power) {
    summary << "time_power," << FormatDouble(estimate.time_power->power) << "\n";
    summary << "time_power_converged," << estimate.time_power->converged << "\n";
  }
  const MeanVisitsEstimate& mv = estimate.mean_visits;
  summary << "mean_visits," << FormatDouble(mv.mean) << "\n";
  summary << "mean_visits_initial," << FormatDouble(mv.initial) << "\n";
  summary << "mean_visits_converged," << mv.converged << "\n";
  summary << "mean_visits_floored," << mv.floored << "\n";
  for (std::size_t i = 0; i < mv.iterates.size(); ++i) {
    summary << "mean_visits_iterate_" << i << "," << FormatDouble(mv.iterates[i]) << "\n";
  }
}

void WriteGraph(const DelaunayGraph& graph, std::ostream& out) {
  out << "u,v\n";
  for (const auto& [u, v] : graph.edges()) out << u << "," << v << "\n";
}

absl::StatusOr<std::string> ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot open ", path.string()));
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

absl::Status WriteFile(const std::filesystem::path& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) return absl::PermissionDeniedError(absl::StrCat("cannot write ", path.string()));
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) return absl::DataLossError(absl::StrCat("failed writing ", path.string()));
  return absl::OkStatus();
}

}  // namespace aggmia
