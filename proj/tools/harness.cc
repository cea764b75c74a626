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

#include "harness.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <sstream>
#include <utility>
#include <vector>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "aggmia/delaunay.h"
#include "aggmia/estimation.h"
#include "aggmia/evaluation.h"
#include "aggmia/io.h"
#include "aggmia/random.h"
#include "aggmia/world.h"

namespace aggmia::tools {
namespace {

namespace fs = std::filesystem;

enum SeedStream : uint64_t { kReleaseStream = 31, kDiagnoseStream = 32 };

CommandOutcome Fail(ExitCode code, absl::string_view message) {
  return {code, std::string(message)};
}

CommandOutcome Fail(ExitCode code, const absl::Status& status) {
  return {code, std::string(status.message())};
}

// Collects artifacts under one directory and writes the manifest last.
class RunOutput {
 public:
  RunOutput(std::string command, const ExperimentConfig& config)
      : command_(std::move(command)), config_(config), dir_(config.out_dir) {}

  absl::Status Open() {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) {
      return absl::PermissionDeniedError(
          absl::StrCat("cannot create ", dir_.string(), ": ", ec.message()));
    }
    return absl::OkStatus();
  }

  absl::Status Write(const std::string& name, const std::string& contents) {
    if (absl::Status s = WriteFile(dir_ / name, contents); !s.ok()) return s;
    artifacts_.emplace_back(name, Fnv1a64(contents));
    return absl::OkStatus();
  }

  void Note(std::string line) { notes_.push_back(std::move(line)); }

  absl::Status Finish() {
    std::string manifest = absl::StrCat("# aggmia run manifest\nrun.command = ",
                                        command_, "\n", RenderConfig(config_));
    for (const std::string& n : notes_) absl::StrAppend(&manifest, "# ", n, "\n");
    for (const auto& [name, hash] : artifacts_) {
      absl::StrAppend(&manifest, "# artifact ", name, " fnv1a64=",
                      absl::StrFormat("%016x", hash), "\n");
    }
    return WriteFile(dir_ / "manifest.txt", manifest);
  }

 private:
  std::string command_;
  ExperimentConfig config_;
  fs::path dir_;
  std::vector<std::pair<std::string, uint64_t>> artifacts_;
  std::vector<std::string> notes_;
};

std::string Csv(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    absl::StrAppend(&out, i ? "," : "", fields[i]);
  }
  return out + "\n";
}

std::string Metric(double v) { return std::isfinite(v) ? FormatDouble(v) : "nan"; }

CommandOutcome CmdWorld(const ExperimentConfig& config, std::ostream& log) {
  if (config.world_source != WorldSource::kSynthetic) {
    return Fail(ExitCode::kConfig, "the world command needs world.source = synthetic");
  }
  const WorldSpec spec = config.ResolvedWorld();
  absl::StatusOr<World> world = SynthesizeWorld(spec);
  if (!world.ok()) {
    return Fail(absl::IsInvalidArgument(world.status()) ? ExitCode::kConfig
                                                        : ExitCode::kRuntime,
                world.status());
  }
  RunOutput out("world", config);
  if (absl::Status s = out.Open(); !s.ok()) return Fail(ExitCode::kRuntime, s);
  std::ostringstream traces, geometry, space, time, graph;
  (void)WriteTraces(world->population, traces);
  (void)WriteGeometry(world->population.geometry(), geometry);
  WriteDistribution(world->truth.space, "roi_id", space);
  WriteDistribution(world->truth.time, "epoch_id", time);
  WriteGraph(world->truth.delaunay, graph);
  for (const auto& [name, body] :
       {std::pair{"traces.csv", traces.str()}, std::pair{"geometry.csv", geometry.str()},
        std::pair{"true_space.csv", space.str()}, std::pair{"true_time.csv", time.str()},
        std::pair{"true_graph.csv", graph.str()}}) {
    if (absl::Status s = out.Write(name, body); !s.ok()) return Fail(ExitCode::kRuntime, s);
  }
  out.Note(absl::StrCat("resolved world.seed = ", spec.seed));
  out.Note(absl::StrCat("true activity = ", world->truth.activity.ToString()));
  if (absl::Status s = out.Finish(); !s.ok()) return Fail(ExitCode::kRuntime, s);
  log << "wrote " << world->population.size() << " traces to " << config.out_dir << "\n";
  return {};
}

CommandOutcome CmdRelease(const ExperimentConfig& config, std::ostream& log) {
  const PrivacyConfig cfg = config.privacy();
  if (absl::Status s = cfg.Validate(); !s.ok()) return Fail(ExitCode::kConfig, s);
  absl::StatusOr<Population> population = LoadPopulation(config, log);
  if (!population.ok()) return Fail(ExitCode::kData, population.status());
  if (config.m < 1 || static_cast<std::size_t>(config.m) > population->size()) {
    return Fail(ExitCode::kConfig,
                absl::StrCat("m = ", config.m, " but the population has ",
                             population->size(), " users"));
  }
  Rng rng(DeriveSeed(config.seed, {kReleaseStream}));
  absl::StatusOr<std::vector<std::size_t>> group =
      SampleGroup(*population, static_cast<int>(config.m), {}, std::nullopt, rng);
  if (!group.ok()) return Fail(ExitCode::kRuntime, group.status());
  std::vector<const LocationTrace*> traces;
  std::vector<UserId> members;
  for (std::size_t i : *group) {
    traces.push_back(&population->trace(i));
    members.push_back(population->id(i));
  }
  std::sort(members.begin(), members.end());
  absl::StatusOr<AggregateMatrix> release =
      ReleaseGroup(traces, cfg, population->epochs_per_day(), rng);
  if (!release.ok()) return Fail(ExitCode::kRuntime, release.status());

  RunOutput out("release", config);
  if (absl::Status s = out.Open(); !s.ok()) return Fail(ExitCode::kRuntime, s);
  std::ostringstream aggregate, membership;
  (void)WriteAggregate(*release, aggregate);
  membership << "# ground truth for evaluation only; never an attack input\n";
  membership << "user_id\n";
  for (UserId id : members) membership << id << "\n";
  if (absl::Status s = out.Write("release.csv", aggregate.str()); !s.ok()) {
    return Fail(ExitCode::kRuntime, s);
  }
  if (absl::Status s = out.Write("membership.csv", membership.str()); !s.ok()) {
    return Fail(ExitCode::kRuntime, s);
  }
  if (absl::Status s = out.Finish(); !s.ok()) return Fail(ExitCode::kRuntime, s);
  log << "released " << cfg.ToString() << " aggregate of " << config.m << " users\n";
  return {};
}

CommandOutcome CmdAttack(const ExperimentConfig& config, std::ostream& log) {
  const std::vector<SweepPoint> points = ExpandSweep(config);
  std::vector<Adversary> adversaries;
  if (config.adversary != AdversaryChoice::kKnockKnock) {
    adversaries.push_back(Adversary::kZeroKnowledge);
  }
  if (config.adversary != AdversaryChoice::kZeroKnowledge) {
    adversaries.push_back(Adversary::kKnockKnock);
  }
  for (const SweepPoint& p : points) {
    for (Adversary a : adversaries) {
      if (absl::Status s = SpecForPoint(config, p, a).Validate(); !s.ok()) {
        return Fail(ExitCode::kConfig, s);
      }
    }
  }
  absl::StatusOr<Population> population = LoadPopulation(config, log);
  if (!population.ok()) return Fail(ExitCode::kData, population.status());

  RunOutput out("attack", config);
  if (absl::Status s = out.Open(); !s.ok()) return Fail(ExitCode::kRuntime, s);
  std::string sweep = Csv({"point", "adversary", "m", "ssc_k", "dp_epsilon", "dp_unit",
                           "p_fraction", "mode", "mean_auc", "se_auc", "mean_accuracy",
                           "se_accuracy", "n_targets", "failed"});
  std::string failures = Csv({"point", "adversary", "target_id", "error"});
  bool point_failed = false;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const SweepPoint& p = points[i];
    for (Adversary a : adversaries) {
      const ExperimentSpec spec = SpecForPoint(config, p, a);
      const std::string tag = absl::StrCat("point_", i, "_", ToString(a));
      log << tag << ": m=" << p.m << " " << p.cfg.ToString() << " p=" << p.p_fraction
          << " " << ToString(p.mode) << "\n";
      std::vector<std::string> row{
          absl::StrCat(i), ToString(a), absl::StrCat(p.m),
          p.cfg.ssc_k ? absl::StrCat(*p.cfg.ssc_k) : "none",
          p.cfg.dp ? FormatDouble(p.cfg.dp->epsilon) : "none",
          p.cfg.dp ? (p.cfg.dp->unit == DpUnit::kUserDay ? "user_day" : "event") : "none",
          FormatDouble(p.p_fraction), ToString(p.mode)};
      absl::StatusOr<AttackResult> result = RunExperiment(*population, spec);
      if (!result.ok()) {
        point_failed = true;
        log << "  failed: " << result.status().message() << "\n";
        absl::StrAppend(&failures, Csv({absl::StrCat(i), ToString(a), "",
                                        std::string(result.status().message())}));
        for (const char* v : {"nan", "nan", "nan", "nan"}) row.push_back(v);
        row.push_back(absl::StrCat(spec.n_targets));
        row.push_back(absl::StrCat(spec.n_targets));
        absl::StrAppend(&sweep, Csv(row));
        continue;
      }
      std::string per_target = Csv({"target_id", "auc", "accuracy"});
      std::string roc = Csv({"target_id", "fpr", "tpr"});
      for (const TargetResult& t : result->per_target) {
        if (t.error) {
          absl::StrAppend(&failures, Csv({absl::StrCat(i), ToString(a),
                                          absl::StrCat(t.target), *t.error}));
          continue;
        }
        absl::StrAppend(&per_target, Csv({absl::StrCat(t.target), Metric(t.auc),
                                          Metric(t.accuracy)}));
        for (const RocPoint& r : RocCurve(t.decision_values, t.labels)) {
          absl::StrAppend(&roc, Csv({absl::StrCat(t.target), FormatDouble(r.fpr),
                                     FormatDouble(r.tpr)}));
        }
      }
      absl::StrAppend(&per_target, Csv({"mean", Metric(result->mean_auc),
                                        Metric(result->mean_accuracy)}));
      absl::StrAppend(&per_target, Csv({"se", Metric(result->se_auc),
                                        Metric(result->se_accuracy)}));
      for (const auto& [name, body] : {std::pair{tag + ".csv", per_target},
                                       std::pair{tag + "_roc.csv", roc}}) {
        if (absl::Status s = out.Write(name, body); !s.ok()) {
          return Fail(ExitCode::kRuntime, s);
        }
      }
      log << "  mean AUC " << result->mean_auc << " +/- " << result->se_auc
          << ", accuracy " << result->mean_accuracy << " (" << result->failed
          << " failed)\n";
      row.push_back(Metric(result->mean_auc));
      row.push_back(Metric(result->se_auc));
      row.push_back(Metric(result->mean_accuracy));
      row.push_back(Metric(result->se_accuracy));
      row.push_back(absl::StrCat(result->per_target.size()));
      row.push_back(absl::StrCat(result->failed));
      absl::StrAppend(&sweep, Csv(row));
    }
  }
  if (absl::Status s = out.Write("sweep.csv", sweep); !s.ok()) {
    return Fail(ExitCode::kRuntime, s);
  }
  if (absl::Status s = out.Write("failures.csv", failures); !s.ok()) {
    return Fail(ExitCode::kRuntime, s);
  }
  if (absl::Status s = out.Finish(); !s.ok()) return Fail(ExitCode::kRuntime, s);
  if (point_failed) return Fail(ExitCode::kRuntime, "some sweep points failed");
  return {};
}

CommandOutcome CmdDiagnose(const ExperimentConfig& config, std::ostream& log) {
  const PrivacyConfig cfg = config.privacy();
  if (absl::Status s = cfg.Validate(); !s.ok()) return Fail(ExitCode::kConfig, s);
  if (config.input_aggregate.empty()) {
    return Fail(ExitCode::kConfig, "diagnose needs input.aggregate");
  }
  absl::StatusOr<std::string> text = ReadFile(config.input_aggregate);
  if (!text.ok()) return Fail(ExitCode::kData, text.status());
  std::istringstream in(*text);
  AggregateLoadReport load_report;
  absl::StatusOr<AggregateMatrix> aggregate = ReadAggregate(in, &load_report);
  if (!aggregate.ok()) return Fail(ExitCode::kData, aggregate.status());
  if (load_report.clamped_entries > 0) {
    log << "warning: clamped " << load_report.clamped_entries << " entries above m\n";
  }
  if (aggregate->provenance().kind != cfg.ToProvenance().kind) {
    return Fail(ExitCode::kConfig,
                absl::StrCat("aggregate provenance ", aggregate->provenance().ToString(),
                             " does not match the configured ", cfg.ToString()));
  }

  absl::StatusOr<RoiGeometry> geometry;
  int epochs_per_day = config.world.epochs_per_day;
  if (config.world_source == WorldSource::kFiles) {
    absl::StatusOr<std::string> g = ReadFile(config.geometry_path);
    if (!g.ok()) return Fail(ExitCode::kData, g.status());
    std::istringstream gin(*g);
    geometry = ReadGeometry(gin);
  } else {
    geometry = MakeLayout(config.ResolvedWorld());
  }
  if (!geometry.ok()) return Fail(ExitCode::kData, geometry.status());
  if (geometry->size() != static_cast<std::size_t>(aggregate->dims().n_rois)) {
    return Fail(ExitCode::kData, "geometry and aggregate disagree on the ROI count");
  }

  EstimationOptions options;
  options.mean_visits = config.mean_visits;
  options.mean_visits.generator = config.world.generator;
  options.power_tol_fraction = config.power_tol_fraction;
  options.max_power = config.max_power;
  const DelaunayGraph graph = BuildDelaunayOrPath(*geometry);
  if (graph.degenerate()) log << "warning: collinear ROIs, using a path graph\n";
  Rng rng(DeriveSeed(config.seed, {kDiagnoseStream}));
  absl::StatusOr<MarginalEstimate> estimate =
      EstimateAll(*aggregate, aggregate->group_size(), graph, cfg, epochs_per_day, rng,
                  options);
  if (!estimate.ok()) return Fail(ExitCode::kRuntime, estimate.status());
  if (!estimate->mean_visits.converged) log << "warning: mean visits did not converge\n";
  if (estimate->mean_visits.floored) log << "warning: mean visits hit the floor\n";
  for (const auto& sel : {estimate->space_power, estimate->time_power}) {
    if (sel && !sel->converged) log << "warning: power selection reached max_power\n";
  }

  RunOutput out("diagnose", config);
  if (absl::Status s = out.Open(); !s.ok()) return Fail(ExitCode::kRuntime, s);
  std::ostringstream space, time, summary;
  WriteMarginalDiagnostic(*estimate, space, time, summary);
  for (const auto& [name, body] : {std::pair{"diagnose_space.csv", space.str()},
                                   std::pair{"diagnose_time.csv", time.str()},
                                   std::pair{"diagnose_summary.csv", summary.str()}}) {
    if (absl::Status s = out.Write(name, body); !s.ok()) return Fail(ExitCode::kRuntime, s);
  }
  if (absl::Status s = out.Finish(); !s.ok()) return Fail(ExitCode::kRuntime, s);
  log << "estimated mean visits " << estimate->mean_visits.mean << "\n";
  return {};
}

}  // namespace

uint64_t Fnv1a64(std::string_view bytes) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

absl::StatusOr<ExperimentConfig> LoadConfig(const CommandOptions& options) {
  absl::StatusOr<std::string> text = ReadFile(options.config_path);
  if (!text.ok()) return absl::InvalidArgumentError(text.status().message());
  absl::StatusOr<ExperimentConfig> config = ParseConfig(*text);
  if (!config.ok()) return config.status();
  if (options.seed) config->seed = *options.seed;
  if (options.out_dir) config->out_dir = *options.out_dir;
  if (options.workers) config->workers = *options.workers;
  if (config->workers < 1) return absl::InvalidArgumentError("workers must be >= 1");
  return config;
}

absl::StatusOr<Population> LoadPopulation(const ExperimentConfig& config,
                                          std::ostream& log) {
  if (config.world_source == WorldSource::kSynthetic) {
    absl::StatusOr<World> world = SynthesizeWorld(config.ResolvedWorld());
    if (!world.ok()) return world.status();
    return std::move(world->population);
  }
  LoadOptions options;
  options.n_epochs = config.load_n_epochs;
  LoadReport report;
  absl::StatusOr<Population> population =
      LoadWorld(config.traces_path, config.geometry_path, options, &report);
  if (population.ok() && report.duplicate_visits > 0) {
    log << "warning: merged " << report.duplicate_visits << " duplicate visit lines\n";
  }
  return population;
}

CommandOutcome RunCommand(std::string_view command, const CommandOptions& options,
                          std::ostream& log) {
  absl::StatusOr<ExperimentConfig> config = LoadConfig(options);
  if (!config.ok()) return Fail(ExitCode::kConfig, config.status());
  if (command == "world") return CmdWorld(*config, log);
  if (command == "release") return CmdRelease(*config, log);
  if (command == "attack") return CmdAttack(*config, log);
  if (command == "diagnose") return CmdDiagnose(*config, log);
  return Fail(ExitCode::kConfig, absl::StrCat("unknown command ",
                                              absl::string_view(command.data(),
                                                                command.size())));
}

}  // namespace aggmia::tools
