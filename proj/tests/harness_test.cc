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
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "absl/strings/str_split.h"
#include "aggmia/io.h"
#include "config.h"
#include "gtest/gtest.h"
#include "test_util.h"

namespace aggmia::tools {
namespace {

namespace fs = std::filesystem;

constexpr char kTinyWorld[] =
    "world.n_rois = 36\n"
    "world.grid_cols = 6\n"
    "world.n_epochs = 24\n"
    "world.population = 300\n"
    "world.activity = exponential\n"
    "world.activity_mean = 8\n"
    "seed = 5\n";

class HarnessTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("aggmia_harness_" +
            std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string WriteConfig(const std::string& name, const std::string& body) {
    const fs::path p = dir_ / name;
    std::ofstream(p) << body;
    return p.string();
  }

  CommandOutcome Run(const std::string& command, const std::string& config,
                     const fs::path& out) {
    CommandOptions options;
    options.config_path = config;
    options.out_dir = out.string();
    std::ostringstream log;
    CommandOutcome outcome = RunCommand(command, options, log);
    log_ = log.str();
    return outcome;
  }

  static std::string Slurp(const fs::path& p) {
    absl::StatusOr<std::string> s = ReadFile(p);
    EXPECT_TRUE(s.ok()) << s.status();
    return s.ok() ? *s : "";
  }

  static AggregateMatrix LoadRelease(const fs::path& p) {
    std::istringstream in(Slurp(p));
    absl::StatusOr<AggregateMatrix> a = ReadAggregate(in);
    EXPECT_TRUE(a.ok()) << a.status();
    return *a;
  }

  // Artifacts keyed by file name. The manifest records out_dir, so it is left
  // out.
  static std::map<std::string, std::string> Artifacts(const fs::path& dir) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::directory_iterator(dir)) {
      if (e.path().filename() == "manifest.txt") continue;
      out[e.path().filename().string()] = Slurp(e.path());
    }
    return out;
  }

  fs::path dir_;
  std::string log_;
};

TEST(ConfigTest, RenderParseRoundTrip) {
  auto config = ParseConfig(
      "m = 250\nssc_k = 3\ndp_epsilon = 0.5\ndp_unit = user_day\nadversary = both\n"
      "sweep.k = none,0,2\nsweep.epsilon = 0.1,none\nsampling = independent\n"
      "world.seed = 9\nworld.activity = lognormal\n");
  ASSERT_OK(config);
  EXPECT_EQ(config->m, 250);
  EXPECT_EQ(config->sweep.k.size(), 3u);
  EXPECT_FALSE(config->sweep.k[0].has_value());
  auto again = ParseConfig(RenderConfig(*config));
  ASSERT_OK(again);
  EXPECT_EQ(RenderConfig(*again), RenderConfig(*config));
  EXPECT_EQ(ExpandSweep(*again).size(), 6u);
}

TEST(ConfigTest, RejectsUnknownAndRepeatedKeys) {
  auto unknown = ParseConfig("m = 3\nfoo = 1\n");
  ASSERT_FALSE(unknown.ok());
  EXPECT_NE(unknown.status().message().find("line 2"), std::string_view::npos);
  EXPECT_FALSE(ParseConfig("m = 3\nm = 4\n").ok());
  EXPECT_FALSE(ParseConfig("m = many\n").ok());
  EXPECT_FALSE(ParseConfig("just text\n").ok());
}

TEST_F(HarnessTest, WorldWritesFilesAndRerunsIdentically) {
  const std::string config = WriteConfig("world.cfg", kTinyWorld);
  ASSERT_EQ(Run("world", config, dir_ / "a").code, ExitCode::kOk) << log_;
  ASSERT_EQ(Run("world", config, dir_ / "b").code, ExitCode::kOk) << log_;
  const auto a = Artifacts(dir_ / "a");
  EXPECT_TRUE(a.contains("traces.csv"));
  EXPECT_TRUE(a.contains("geometry.csv"));
  EXPECT_EQ(a, Artifacts(dir_ / "b"));
  auto pop = LoadWorld(dir_ / "a" / "traces.csv", dir_ / "a" / "geometry.csv");
  ASSERT_OK(pop);
  EXPECT_EQ(pop->size(), 300u);
}

TEST_F(HarnessTest, MalformedConfigIsAConfigError) {
  const std::string config = WriteConfig("bad.cfg", "world.n_rois = lots\n");
  const CommandOutcome outcome = Run("world", config, dir_ / "out");
  EXPECT_EQ(outcome.code, ExitCode::kConfig);
  EXPECT_EQ(static_cast<int>(outcome.code), 2);
  EXPECT_NE(outcome.message.find("world.n_rois"), std::string::npos);
  EXPECT_EQ(Run("world", (dir_ / "missing.cfg").string(), dir_ / "out").code,
            ExitCode::kConfig);
  EXPECT_EQ(Run("bogus", WriteConfig("ok.cfg", kTinyWorld), dir_ / "out").code,
            ExitCode::kConfig);
}

TEST_F(HarnessTest, RawReleaseOfEveryoneIsTheFullAggregate) {
  const std::string config = WriteConfig("r.cfg", std::string(kTinyWorld) + "m = 300\n");
  ASSERT_EQ(Run("release", config, dir_ / "out").code, ExitCode::kOk) << log_;
  auto world = SynthesizeWorld(ParseConfig(kTinyWorld)->ResolvedWorld());
  ASSERT_OK(world);
  auto full = Aggregate(world->population.traces());
  ASSERT_OK(full);
  const AggregateMatrix released = LoadRelease(dir_ / "out" / "release.csv");
  EXPECT_TRUE(std::ranges::equal(released.counts(), full->counts()));
  const std::string members = Slurp(dir_ / "out" / "membership.csv");
  EXPECT_EQ(std::count(members.begin(), members.end(), '\n'), 302);
}

TEST_F(HarnessTest, SuppressedAndNoisyReleasesKeepTheirContracts) {
  const std::string ssc =
      WriteConfig("s.cfg", std::string(kTinyWorld) + "m = 100\nssc_k = 1\n");
  ASSERT_EQ(Run("release", ssc, dir_ / "ssc").code, ExitCode::kOk) << log_;
  for (double c : LoadRelease(dir_ / "ssc" / "release.csv").counts()) EXPECT_NE(c, 1.0);

  const std::string dp =
      WriteConfig("d.cfg", std::string(kTinyWorld) + "m = 100\ndp_epsilon = 1\n");
  ASSERT_EQ(Run("release", dp, dir_ / "dp").code, ExitCode::kOk) << log_;
  const AggregateMatrix a = LoadRelease(dir_ / "dp" / "release.csv");
  double total = 0;
  for (double c : a.counts()) {
    EXPECT_EQ(c, std::floor(c));
    EXPECT_GE(c, 0);
    EXPECT_LE(c, 100);
    total += c;
  }
  EXPECT_GT(total, 0);
}

TEST_F(HarnessTest, OversizedGroupIsRejected) {
  const std::string config = WriteConfig("big.cfg", std::string(kTinyWorld) + "m = 301\n");
  const CommandOutcome outcome = Run("release", config, dir_ / "out");
  EXPECT_NE(outcome.code, ExitCode::kOk);
  EXPECT_NE(outcome.message.find("301"), std::string::npos);
}

TEST_F(HarnessTest, SuppressionSweepEmitsOneRowPerPointAndReplaysFromManifest) {
  const std::string config = WriteConfig(
      "sweep.cfg", std::string(kTinyWorld) +
                       "adversary = kk\nm = 20\nsweep.k = 0,1,2,3,4,5\n"
                       "n_train = 40\nn_val = 10\nn_test = 10\nn_targets = 2\n"
                       "ref_size = 150\nmin_target_visits = 3\nmax_epochs = 200\n");
  ASSERT_EQ(Run("attack", config, dir_ / "a").code, ExitCode::kOk) << log_;
  const std::string sweep = Slurp(dir_ / "a" / "sweep.csv");
  std::vector<std::string> rows = absl::StrSplit(sweep, '\n', absl::SkipEmpty());
  ASSERT_EQ(rows.size(), 7u);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const std::vector<std::string> f = absl::StrSplit(rows[i], ',');
    EXPECT_EQ(f[3], std::to_string(i - 1));
    EXPECT_EQ(f.back(), "0");
  }

  ASSERT_EQ(Run("attack", (dir_ / "a" / "manifest.txt").string(), dir_ / "b").code,
            ExitCode::kOk)
      << log_;
  EXPECT_EQ(Artifacts(dir_ / "a"), Artifacts(dir_ / "b"));
}

TEST_F(HarnessTest, DiagnoseDispatchesOnProvenance) {
  struct Case {
    std::string extra;
    std::string correction;
  };
  for (const Case& c : {Case{"", "none"}, Case{"ssc_k = 1\n", "log_compression"},
                        Case{"dp_epsilon = 1\n", "power_transform"}}) {
    const std::string base = std::string(kTinyWorld) + "m = 150\n" + c.extra;
    const fs::path rel = dir_ / ("rel_" + c.correction);
    ASSERT_EQ(Run("release", WriteConfig("r.cfg", base), rel).code, ExitCode::kOk) << log_;
    const fs::path out = dir_ / ("diag_" + c.correction);
    const std::string diag = WriteConfig(
        "d.cfg", base + "input.aggregate = " + (rel / "release.csv").string() + "\n");
    ASSERT_EQ(Run("diagnose", diag, out).code, ExitCode::kOk) << log_;

    const std::string summary = Slurp(out / "diagnose_summary.csv");
    EXPECT_NE(summary.find("correction," + c.correction), std::string::npos) << summary;
    std::vector<std::string> lines =
        absl::StrSplit(Slurp(out / "diagnose_space.csv"), '\n', absl::SkipEmpty());
    ASSERT_EQ(lines.size(), 37u);
    bool any_change = false;
    for (std::size_t i = 1; i < lines.size(); ++i) {
      std::vector<std::string> f = absl::StrSplit(lines[i], ',');
      any_change |= f[1] != f[2];
    }
    if (c.correction == "none") EXPECT_FALSE(any_change);
    if (c.correction == "log_compression") EXPECT_TRUE(any_change);
    if (c.correction == "power_transform") {
      const std::size_t at = summary.find("space_power,");
      ASSERT_NE(at, std::string::npos);
      EXPECT_GE(std::stod(summary.substr(at + 12)), 1.0);
    }
  }
}

TEST_F(HarnessTest, DiagnoseRejectsMismatchedProvenance) {
  const std::string base = std::string(kTinyWorld) + "m = 50\n";
  ASSERT_EQ(Run("release", WriteConfig("r.cfg", base), dir_ / "rel").code, ExitCode::kOk);
  const std::string diag = WriteConfig(
      "d.cfg", base + "ssc_k = 2\ninput.aggregate = " +
                   (dir_ / "rel" / "release.csv").string() + "\n");
  EXPECT_EQ(Run("diagnose", diag, dir_ / "out").code, ExitCode::kConfig);
}

}  // namespace
}  // namespace aggmia::tools
