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

#include "config.h"

#include <functional>
#include <set>
#include <utility>

#include "absl/status/status.h"
#include "absl/strings/ascii.h"
#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_join.h"
#include "absl/strings/str_split.h"
#include "absl/strings/string_view.h"

namespace aggmia::tools {
namespace {

using absl::string_view;

absl::Status BadValue(string_view key, string_view value) {
  return absl::InvalidArgumentError(
      absl::StrCat("invalid value '", value, "' for ", key));
}

template <typename T>
bool ParseScalar(string_view v, T* out) {
  if constexpr (std::is_floating_point_v<T>) {
    return absl::SimpleAtod(v, out) && std::isfinite(*out);
  } else {
    return absl::SimpleAtoi(v, out);
  }
}

template <typename T>
std::string RenderScalar(T v) {
  if constexpr (std::is_floating_point_v<T>) {
    return FormatDouble(v);
  } else {
    return absl::StrCat(v);
  }
}

struct Field {
  std::string key;
  std::function<absl::Status(string_view, ExperimentConfig&)> parse;
  std::function<std::string(const ExperimentConfig&)> render;
};

// `get` maps a config (const or not) to the member it edits.
template <typename Get>
Field Scalar(std::string key, Get get) {
  return {key,
          [key, get](string_view v, ExperimentConfig& c) {
            if (!ParseScalar(v, &get(c))) return BadValue(key, v);
            return absl::OkStatus();
          },
          [get](const ExperimentConfig& c) { return RenderScalar(get(c)); }};
}

template <typename Get>
Field Optional(std::string key, Get get) {
  return {key,
          [key, get](string_view v, ExperimentConfig& c) {
            if (v == "none") {
              get(c).reset();
              return absl::OkStatus();
            }
            typename std::remove_reference_t<decltype(get(c))>::value_type x{};
            if (!ParseScalar(v, &x)) return BadValue(key, v);
            get(c) = x;
            return absl::OkStatus();
          },
          [get](const ExperimentConfig& c) {
            return get(c).has_value() ? RenderScalar(*get(c)) : std::string("none");
          }};
}

template <typename E, typename Get>
Field Enum(std::string key, std::vector<std::pair<std::string, E>> names, Get get) {
  return {key,
          [key, names, get](string_view v, ExperimentConfig& c) {
            for (const auto& [name, e] : names) {
              if (v == name) {
                get(c) = e;
                return absl::OkStatus();
              }
            }
            return BadValue(key, v);
          },
          [names, get](const ExperimentConfig& c) {
            for (const auto& [name, e] : names) {
              if (get(c) == e) return name;
            }
            return std::string("?");
          }};
}

Field Text(std::string key, std::string ExperimentConfig::*member) {
  return {key,
          [member](string_view v, ExperimentConfig& c) {
            c.*member = std::string(v);
            return absl::OkStatus();
          },
          [member](const ExperimentConfig& c) { return c.*member; }};
}

// Comma-separated list; `parse_one` handles one trimmed element.
template <typename T, typename Get, typename ParseOne, typename RenderOne>
Field List(std::string key, Get get, ParseOne parse_one, RenderOne render_one) {
  return {key,
          [key, get, parse_one](string_view v, ExperimentConfig& c) {
            std::vector<T> out;
            if (!absl::StripAsciiWhitespace(v).empty()) {
              for (string_view item : absl::StrSplit(v, ',')) {
                item = absl::StripAsciiWhitespace(item);
                T x{};
                if (!parse_one(item, &x)) return BadValue(key, item);
                out.push_back(x);
              }
            }
            get(c) = std::move(out);
            return absl::OkStatus();
          },
          [get, render_one](const ExperimentConfig& c) {
            std::vector<std::string> parts;
            for (const T& x : get(c)) parts.push_back(render_one(x));
            return absl::StrJoin(parts, ",");
          }};
}

template <typename T>
bool ParseOptionalItem(string_view v, std::optional<T>* out) {
  if (v == "none") {
    out->reset();
    return true;
  }
  T x{};
  if (!ParseScalar(v, &x)) return false;
  *out = x;
  return true;
}

template <typename T>
std::string RenderOptionalItem(const std::optional<T>& v) {
  return v ? RenderScalar(*v) : std::string("none");
}

const std::vector<std::pair<std::string, SamplingMode>>& ModeNames() {
  static const auto* names = new std::vector<std::pair<std::string, SamplingMode>>{
      {"paired", SamplingMode::kPaired}, {"independent", SamplingMode::kIndependent}};
  return *names;
}

const std::vector<Field>& Fields() {
  using C = ExperimentConfig;
  static const auto* fields = new std::vector<Field>{
      Enum<WorldSource>("world.source",
                        {{"synthetic", WorldSource::kSynthetic},
                         {"files", WorldSource::kFiles}},
                        [](auto& c) -> auto& { return c.world_source; }),
      Text("world.traces", &C::traces_path),
      Text("world.geometry", &C::geometry_path),
      Optional("world.load_n_epochs", [](auto& c) -> auto& { return c.load_n_epochs; }),
      Scalar("world.n_rois", [](auto& c) -> auto& { return c.world.n_rois; }),
      Scalar("world.grid_cols", [](auto& c) -> auto& { return c.world.grid_cols; }),
      Scalar("world.n_epochs", [](auto& c) -> auto& { return c.world.n_epochs; }),
      Scalar("world.population", [](auto& c) -> auto& { return c.world.population; }),
      Enum<RoiLayout>("world.layout",
                      {{"grid", RoiLayout::kGrid}, {"uniform", RoiLayout::kUniform}},
                      [](auto& c) -> auto& { return c.world.layout; }),
      Enum<SpaceShape>("world.space",
                       {{"uniform", SpaceShape::kUniform}, {"zipf", SpaceShape::kZipf}},
                       [](auto& c) -> auto& { return c.world.space; }),
      Scalar("world.zipf_a", [](auto& c) -> auto& { return c.world.zipf_a; }),
      Enum<TimeShape>("world.time",
                      {{"uniform", TimeShape::kUniform}, {"diurnal", TimeShape::kDiurnal}},
                      [](auto& c) -> auto& { return c.world.time; }),
      Scalar("world.diurnal_period",
             [](auto& c) -> auto& { return c.world.diurnal_period; }),
      Scalar("world.diurnal_amplitude",
             [](auto& c) -> auto& { return c.world.diurnal_amplitude; }),
      Scalar("world.diurnal_floor", [](auto& c) -> auto& { return c.world.diurnal_floor; }),
      Enum<ActivityModel::Family>(
          "world.activity",
          {{"exponential", ActivityModel::Family::kExponential},
           {"lognormal", ActivityModel::Family::kLogNormal}},
          [](auto& c) -> auto& { return c.world.activity.family; }),
      Scalar("world.activity_mean", [](auto& c) -> auto& { return c.world.activity.mean; }),
      Scalar("world.activity_sigma",
             [](auto& c) -> auto& { return c.world.activity.log_sigma; }),
      Scalar("world.epochs_per_day", [](auto& c) -> auto& { return c.world.epochs_per_day; }),
      Scalar("world.subgraph_size",
             [](auto& c) -> auto& { return c.world.generator.subgraph_size; }),
      {"world.seed",
       [](string_view v, C& c) {
         if (v == "auto") {
           c.world_seed_set = false;
           return absl::OkStatus();
         }
         if (!absl::SimpleAtoi(v, &c.world.seed)) return BadValue("world.seed", v);
         c.world_seed_set = true;
         return absl::OkStatus();
       },
       [](const C& c) {
         return c.world_seed_set ? absl::StrCat(c.world.seed) : std::string("auto");
       }},
      Scalar("m", [](auto& c) -> auto& { return c.m; }),
      Optional("ssc_k", [](auto& c) -> auto& { return c.ssc_k; }),
      Optional("dp_epsilon", [](auto& c) -> auto& { return c.dp_epsilon; }),
      Scalar("dp_sensitivity", [](auto& c) -> auto& { return c.dp_sensitivity; }),
      Enum<DpUnit>("dp_unit",
                   {{"event", DpUnit::kEvent}, {"user_day", DpUnit::kUserDay}},
                   [](auto& c) -> auto& { return c.dp_unit; }),
      Enum<AdversaryChoice>("adversary",
                            {{"zk", AdversaryChoice::kZeroKnowledge},
                             {"kk", AdversaryChoice::kKnockKnock},
                             {"both", AdversaryChoice::kBoth}},
                            [](auto& c) -> auto& { return c.adversary; }),
      Enum<SamplingMode>("sampling", ModeNames(), [](auto& c) -> auto& { return c.mode; }),
      Scalar("n_train", [](auto& c) -> auto& { return c.n_train; }),
      Scalar("n_val", [](auto& c) -> auto& { return c.n_val; }),
      Scalar("n_test", [](auto& c) -> auto& { return c.n_test; }),
      Scalar("n_targets", [](auto& c) -> auto& { return c.n_targets; }),
      Scalar("p_fraction", [](auto& c) -> auto& { return c.p_fraction; }),
      Scalar("ref_size", [](auto& c) -> auto& { return c.ref_size; }),
      Scalar("synthetic_ref_size", [](auto& c) -> auto& { return c.synthetic_ref_size; }),
      Scalar("min_target_visits", [](auto& c) -> auto& { return c.min_target_visits; }),
      Scalar("l1_strength", [](auto& c) -> auto& { return c.train.l1_strength; }),
      Scalar("max_epochs", [](auto& c) -> auto& { return c.train.max_epochs; }),
      Scalar("train_tolerance", [](auto& c) -> auto& { return c.train.tolerance; }),
      Scalar("mean_tol", [](auto& c) -> auto& { return c.mean_visits.tol; }),
      Scalar("mean_max_iter", [](auto& c) -> auto& { return c.mean_visits.max_iter; }),
      Enum<MeanUpdateRule>("mean_update",
                           {{"previous", MeanUpdateRule::kFromPrevious},
                            {"initial", MeanUpdateRule::kFromInitial}},
                           [](auto& c) -> auto& { return c.mean_visits.rule; }),
      Scalar("mean_floor", [](auto& c) -> auto& { return c.mean_visits.floor; }),
      Scalar("power_tol_fraction", [](auto& c) -> auto& { return c.power_tol_fraction; }),
      Scalar("max_power", [](auto& c) -> auto& { return c.max_power; }),
      List<int64_t>(
          "sweep.m", [](auto& c) -> auto& { return c.sweep.m; },
          [](string_view v, int64_t* x) { return ParseScalar(v, x); },
          [](int64_t x) { return RenderScalar(x); }),
      List<std::optional<int>>(
          "sweep.k", [](auto& c) -> auto& { return c.sweep.k; },
          ParseOptionalItem<int>, RenderOptionalItem<int>),
      List<std::optional<double>>(
          "sweep.epsilon", [](auto& c) -> auto& { return c.sweep.epsilon; },
          ParseOptionalItem<double>, RenderOptionalItem<double>),
      List<double>(
          "sweep.p_fraction", [](auto& c) -> auto& { return c.sweep.p_fraction; },
          [](string_view v, double* x) { return ParseScalar(v, x); },
          [](double x) { return RenderScalar(x); }),
      List<SamplingMode>(
          "sweep.mode", [](auto& c) -> auto& { return c.sweep.mode; },
          [](string_view v, SamplingMode* x) {
            for (const auto& [name, e] : ModeNames()) {
              if (v == name) {
                *x = e;
                return true;
              }
            }
            return false;
          },
          [](SamplingMode x) { return ToString(x); }),
      Text("input.aggregate", &C::input_aggregate),
      Scalar("seed", [](auto& c) -> auto& { return c.seed; }),
      Text("out_dir", &C::out_dir),
      Scalar("workers", [](auto& c) -> auto& { return c.workers; }),
  };
  return *fields;
}

}  // namespace

PrivacyConfig ExperimentConfig::privacy() const {
  PrivacyConfig cfg;
  cfg.ssc_k = ssc_k;
  if (dp_epsilon) cfg.dp = DpParams{*dp_epsilon, dp_sensitivity, dp_unit};
  return cfg;
}

WorldSpec ExperimentConfig::ResolvedWorld() const {
  WorldSpec w = world;
  if (!world_seed_set) w.seed = seed;
  return w;
}

absl::StatusOr<ExperimentConfig> ParseConfig(std::string_view text) {
  ExperimentConfig config;
  std::set<std::string> seen;
  int line_no = 0;
  for (string_view line : absl::StrSplit(string_view(text.data(), text.size()), '\n')) {
    ++line_no;
    line = absl::StripAsciiWhitespace(line);
    if (line.empty() || line.front() == '#') continue;
    const std::size_t eq = line.find('=');
    if (eq == string_view::npos) {
      return absl::InvalidArgumentError(
          absl::StrCat("config line ", line_no, ": expected key = value"));
    }
    const std::string key(absl::StripAsciiWhitespace(line.substr(0, eq)));
    const string_view value = absl::StripAsciiWhitespace(line.substr(eq + 1));
    if (!seen.insert(key).second) {
      return absl::InvalidArgumentError(
          absl::StrCat("config line ", line_no, ": repeated key ", key));
    }
    if (key == "run.command") continue;
    bool known = false;
    for (const Field& f : Fields()) {
      if (f.key != key) continue;
      known = true;
      if (absl::Status s = f.parse(value, config); !s.ok()) {
        return absl::InvalidArgumentError(
            absl::StrCat("config line ", line_no, ": ", s.message()));
      }
    }
    if (!known) {
      return absl::InvalidArgumentError(
          absl::StrCat("config line ", line_no, ": unknown key ", key));
    }
  }
  return config;
}

std::string RenderConfig(const ExperimentConfig& config) {
  std::string out;
  for (const Field& f : Fields()) absl::StrAppend(&out, f.key, " = ", f.render(config), "\n");
  return out;
}

std::vector<SweepPoint> ExpandSweep(const ExperimentConfig& config) {
  const SweepAxes& s = config.sweep;
  const std::vector<int64_t> ms = s.m.empty() ? std::vector<int64_t>{config.m} : s.m;
  const std::vector<std::optional<int>> ks =
      s.k.empty() ? std::vector<std::optional<int>>{config.ssc_k} : s.k;
  const std::vector<std::optional<double>> eps =
      s.epsilon.empty() ? std::vector<std::optional<double>>{config.dp_epsilon}
                        : s.epsilon;
  const std::vector<double> ps =
      s.p_fraction.empty() ? std::vector<double>{config.p_fraction} : s.p_fraction;
  const std::vector<SamplingMode> modes =
      s.mode.empty() ? std::vector<SamplingMode>{config.mode} : s.mode;

  std::vector<SweepPoint> points;
  for (int64_t m : ms) {
    for (const std::optional<int>& k : ks) {
      for (const std::optional<double>& e : eps) {
        for (double p : ps) {
          for (SamplingMode mode : modes) {
            SweepPoint point;
            point.m = m;
            point.cfg.ssc_k = k;
            if (e) point.cfg.dp = DpParams{*e, config.dp_sensitivity, config.dp_unit};
            point.p_fraction = p;
            point.mode = mode;
            points.push_back(point);
          }
        }
      }
    }
  }
  return points;
}

ExperimentSpec SpecForPoint(const ExperimentConfig& config, const SweepPoint& point,
                            Adversary adversary) {
  ExperimentSpec spec;
  spec.m = point.m;
  spec.cfg = point.cfg;
  spec.adversary = adversary;
  spec.n_targets = config.n_targets;
  spec.n_test = config.n_test;
  spec.p_fraction = point.p_fraction;
  spec.ref_size = config.ref_size;
  spec.min_target_visits = config.min_target_visits;
  spec.seed = config.seed;
  spec.workers = config.workers;
  spec.attack.n_train = config.n_train;
  spec.attack.n_val = config.n_val;
  spec.attack.mode = point.mode;
  spec.attack.synthetic_ref_size = config.synthetic_ref_size;
  spec.attack.train = config.train;
  spec.attack.estimation.mean_visits = config.mean_visits;
  spec.attack.estimation.mean_visits.generator = config.world.generator;
  spec.attack.estimation.power_tol_fraction = config.power_tol_fraction;
  spec.attack.estimation.max_power = config.max_power;
  spec.attack.generator = config.world.generator;
  return spec;
}

}  // namespace aggmia::tools
