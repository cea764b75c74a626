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

#include "aggmia/random.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include "gtest/gtest.h"
#include "test_util.h"

namespace aggmia {
namespace {

using testing::ChiSquare;
using testing::ChiSquareCritical;

TEST(RngTest, SameSeedSameStream) {
  Rng a(42), b(42), c(43);
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const uint64_t x = a.NextU64();
    EXPECT_EQ(x, b.NextU64());
    differs |= x != c.NextU64();
  }
  EXPECT_TRUE(differs);
}

TEST(RngTest, DeriveSeedSeparatesPaths) {
  EXPECT_EQ(DeriveSeed(1, {2, 3}), DeriveSeed(1, {2, 3}));
  EXPECT_NE(DeriveSeed(1, {2, 3}), DeriveSeed(1, {3, 2}));
  EXPECT_NE(DeriveSeed(1, {2}), DeriveSeed(1, {2, 0}));
  EXPECT_NE(DeriveSeed(1, {2}), DeriveSeed(2, {2}));
}

TEST(RngTest, UniformStaysInRange) {
  Rng rng(1);
  for (int i = 0; i < 100000; ++i) {
    const double u = rng.Uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    const double o = rng.OpenUniform();
    ASSERT_GT(o, 0.0);
    ASSERT_LT(o, 1.0);
  }
}

TEST(RngTest, UniformIntIsUniform) {
  Rng rng(5);
  constexpr int kBins = 7;
  constexpr int kDraws = 70000;
  std::vector<double> counts(kBins, 0.0);
  for (int i = 0; i < kDraws; ++i) counts[rng.UniformInt(kBins)] += 1;
  std::vector<double> expected(kBins, double(kDraws) / kBins);
  EXPECT_LT(ChiSquare(counts, expected), ChiSquareCritical(kBins - 1, 0.01));
}

TEST(RngTest, ExponentialMean) {
  Rng rng(9);
  constexpr int kDraws = 200000;
  double sum = 0;
  for (int i = 0; i < kDraws; ++i) sum += rng.Exponential(3.0);
  // sd of the mean is 3 / sqrt(n).
  EXPECT_NEAR(sum / kDraws, 3.0, 4 * 3.0 / std::sqrt(kDraws));
}

TEST(RngTest, LaplacePassesKolmogorovSmirnov) {
  constexpr int kDraws = 100000;
  constexpr double kScale = 2.0;
  Rng rng(17);
  std::vector<double> x(kDraws);
  for (double& v : x) v = rng.Laplace(kScale);
  std::sort(x.begin(), x.end());
  double d = 0;
  for (int i = 0; i < kDraws; ++i) {
    const double cdf = x[i] < 0 ? 0.5 * std::exp(x[i] / kScale)
                                : 1 - 0.5 * std::exp(-x[i] / kScale);
    d = std::max({d, cdf - double(i) / kDraws, double(i + 1) / kDraws - cdf});
  }
  // Asymptotic critical value of the KS statistic at the 0.01 level.
  EXPECT_LT(d, 1.6276 / std::sqrt(double(kDraws)));
}

TEST(RngTest, LaplaceFromBitsScalesLinearly) {
  Rng rng(2);
  for (int i = 0; i < 100; ++i) {
    const uint64_t bits = rng.NextU64();
    EXPECT_DOUBLE_EQ(LaplaceFromBits(bits, 3.0), 3.0 * LaplaceFromBits(bits, 1.0));
  }
}

TEST(AliasTableTest, MatchesWeights) {
  const std::vector<double> w{1, 0, 3, 6};
  AliasTable table(w);
  Rng rng(3);
  constexpr int kDraws = 100000;
  std::vector<double> counts(w.size(), 0.0);
  for (int i = 0; i < kDraws; ++i) counts[table.Sample(rng)] += 1;
  EXPECT_EQ(counts[1], 0);
  const std::vector<double> obs{counts[0], counts[2], counts[3]};
  const std::vector<double> expected{kDraws * 0.1, kDraws * 0.3, kDraws * 0.6};
  EXPECT_LT(ChiSquare(obs, expected), ChiSquareCritical(2, 0.01));
}

TEST(SampleLinearTest, MatchesWeights) {
  const std::vector<double> w{2, 1, 1};
  Rng rng(4);
  constexpr int kDraws = 40000;
  std::vector<double> counts(3, 0.0);
  for (int i = 0; i < kDraws; ++i) counts[SampleLinear(w, rng)] += 1;
  const std::vector<double> expected{kDraws * 0.5, kDraws * 0.25, kDraws * 0.25};
  EXPECT_LT(ChiSquare(counts, expected), ChiSquareCritical(2, 0.01));
}

TEST(SampleWithoutReplacementTest, SortedDistinctAndUniformOverSubsets) {
  Rng rng(8);
  std::map<std::vector<std::size_t>, double> seen;
  constexpr int kDraws = 20000;
  for (int i = 0; i < kDraws; ++i) {
    std::vector<std::size_t> s = SampleWithoutReplacement(5, 2, rng);
    ASSERT_EQ(s.size(), 2u);
    ASSERT_LT(s[0], s[1]);
    ASSERT_LT(s[1], 5u);
    seen[s] += 1;
  }
  ASSERT_EQ(seen.size(), 10u);
  std::vector<double> obs, expected;
  for (const auto& [subset, c] : seen) {
    obs.push_back(c);
    expected.push_back(kDraws / 10.0);
  }
  EXPECT_LT(ChiSquare(obs, expected), ChiSquareCritical(9, 0.01));
}

TEST(SampleWithoutReplacementTest, FullAndEmpty) {
  Rng rng(1);
  EXPECT_EQ(SampleWithoutReplacement(4, 4, rng), (std::vector<std::size_t>{0, 1, 2, 3}));
  EXPECT_TRUE(SampleWithoutReplacement(4, 0, rng).empty());
}

}  // namespace
}  // namespace aggmia
