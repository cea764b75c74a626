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

#include <sstream>
#include <string>
#include <vector>

#include "aggmia/privacy.h"
#include "gtest/gtest.h"
#include "test_util.h"

namespace aggmia {
namespace {

AggregateMatrix RandomAggregate(Dims dims, int64_t m, Rng& rng) {
  std::vector<double> c(dims.cells());
  for (double& x : c) x = rng.Uniform() < 0.3 ? static_cast<double>(rng.UniformInt(m + 1)) : 0;
  return *AggregateMatrix::Create(dims, m, Provenance{}, std::move(c));
}

TEST(FormatDoubleTest, ShortestRoundTrip) {
  Rng rng(1);
  for (int i = 0; i < 1000; ++i) {
    const double v = rng.StandardNormal() * std::pow(10.0, rng.UniformInt(20) - 10.0);
    EXPECT_EQ(std::stod(FormatDouble(v)), v);
  }
  EXPECT_EQ(FormatDouble(0.1), "0.1");
  EXPECT_EQ(FormatDouble(3), "3");
}

TEST(AggregateFileTest, RoundTripsEveryProvenance) {
  Rng rng(2);
  const AggregateMatrix raw = RandomAggregate({7, 11}, 9, rng);
  PrivacyConfig both = PrivacyConfig::Dp(0.7, 20, DpUnit::kUserDay);
  both.ssc_k = 2;
  for (const PrivacyConfig& cfg :
       {PrivacyConfig::Raw(), PrivacyConfig::Ssc(3), PrivacyConfig::Dp(1.5), both}) {
    auto released = ApplyPipeline(raw, cfg, rng);
    ASSERT_OK(released);
    std::ostringstream out;
    ASSERT_OK_STATUS(WriteAggregate(*released, out));
    std::istringstream in(out.str());
    auto back = ReadAggregate(in);
    ASSERT_OK(back);
    EXPECT_EQ(*back, *released) << cfg.ToString();
  }
}

TEST(AggregateFileTest, ClampsCountsAboveGroupSize) {
  std::istringstream in(
      "# n_rois=2\n# n_epochs=2\n# m=3\n# provenance=raw\n"
      "roi_id,epoch_id,count\n0,0,5\n1,1,2\n");
  AggregateLoadReport report;
  auto a = ReadAggregate(in, &report);
  ASSERT_OK(a);
  EXPECT_EQ(report.clamped_entries, 1);
  EXPECT_EQ(a->at(0, 0), 3);
  EXPECT_EQ(a->at(1, 1), 2);
}

TEST(AggregateFileTest, RejectsMalformedInput) {
  auto read = [](const std::string& text) {
    std::istringstream in(text);
    return ReadAggregate(in);
  };
  const std::string header = "# n_rois=2\n# n_epochs=2\n# m=3\n# provenance=raw\n";
  EXPECT_FALSE(read("").ok());
  EXPECT_FALSE(read(header + "0,0\n").ok());
  EXPECT_FALSE(read(header + "2,0,1\n").ok());
  EXPECT_FALSE(read(header + "0,0,1.5\n").ok());
  EXPECT_FALSE(read("# n_rois=2\n# n_epochs=2\n# m=3\n# provenance=fancy\n").ok());
  EXPECT_FALSE(read("# n_rois=2\n# n_epochs=2\n# m=3\n# provenance=ssc\n").ok());
}

TEST(GeometryFileTest, RoundTripAndErrors) {
  const RoiGeometry g = testing::Geometry({{0.5, -1.25}, {3, 4}, {1e-7, 2}});
  std::ostringstream out;
  ASSERT_OK_STATUS(WriteGeometry(g, out));
  std::istringstream in(out.str());
  auto back = ReadGeometry(in);
  ASSERT_OK(back);
  EXPECT_EQ(*back, g);
  std::istringstream gap("0,0,0\n1,1,0\n3,0,1\n");
  EXPECT_FALSE(ReadGeometry(gap).ok());
  std::istringstream dup("0,0,0\n1,1,0\n1,0,1\n");
  EXPECT_FALSE(ReadGeometry(dup).ok());
}

TEST(DiagnosticTest, WritesBothVectorsAndSummary) {
  MarginalEstimate est;
  est.empirical_space = *DiscreteDistribution::FromWeights({1, 3});
  est.empirical_time = *DiscreteDistribution::FromWeights({1, 1, 2});
  est.marginals.space = est.empirical_space;
  est.marginals.time = est.empirical_time;
  est.space_power = PowerSelection{2.5, 0.01, true};
  est.time_power = PowerSelection{1.0, 0.02, true};
  est.correction = MarginalCorrection::kPowerTransform;
  est.mean_visits.iterates = {4, 3.5};
  est.mean_visits.mean = 3.5;
  std::ostringstream space, time, summary;
  WriteMarginalDiagnostic(est, space, time, summary);
  EXPECT_EQ(space.str(), "roi_id,uncorrected,corrected\n0,0.25,0.25\n1,0.75,0.75\n");
  EXPECT_NE(time.str().find("epoch_id,uncorrected,corrected\n"), std::string::npos);
  EXPECT_NE(summary.str().find("space_power,2.5"), std::string::npos);
  EXPECT_NE(summary.str().find("correction,power"), std::string::npos);
}

TEST(FileTest, MissingFileIsNotFound) {
  EXPECT_EQ(ReadFile("/nonexistent/aggmia/file").status().code(),
            absl::StatusCode::kNotFound);
}

}  // namespace
}  // namespace aggmia
