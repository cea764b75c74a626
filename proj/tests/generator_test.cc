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

#include "aggmia/generator.h"

#include <algorithm>
#include <set>
#include <vector>

#include "gtest/gtest.h"
#include "test_util.h"

namespace aggmia {
namespace {

using testing::ChiSquare;
using testing::ChiSquareCritical;

DiscreteDistribution Dist(std::vector<double> w) {
  auto d = DiscreteDistribution::FromWeights(std::move(w));
  EXPECT_TRUE(d.ok()) << d.status();
  return *d;
}

MarginalSet GridMarginals(int n_rois, int cols, int n_epochs, double mean) {
  std::vector<double> space(n_rois), time(n_epochs);
  for (int i = 0; i < n_rois; ++i) space[i] = 1.0 / (1 + i % 7);
  for (int t = 0; t < n_epochs; ++t) time[t] = 1.0 + (t % 5);
  return MarginalSet{Dist(space), Dist(time), ActivityModel::Exponential(mean),
                     *BuildDelaunay(testing::GridGeometry(n_rois, cols))};
}

TEST(GeneratorTest, DegenerateMarginalsGiveSingleVisit) {
  MarginalSet m{DiscreteDistribution::Uniform(1), DiscreteDistribution::Uniform(1),
                ActivityModel::Exponential(1e-6), DelaunayGraph::FromEdges(1, {})};
  Rng rng(1);
  for (int i = 0; i < 20; ++i) {
    auto t = GenerateTrace(m, rng);
    ASSERT_OK(t);
    ASSERT_EQ(t->size(), 1u);
    EXPECT_EQ(t->visits()[0], (Visit{0, 0}));
  }
}

TEST(GeneratorTest, VisitsStayInSubgraph) {
  auto gen = TraceGenerator::Create(GridMarginals(64, 8, 24, 30));
  ASSERT_OK(gen);
  Rng rng(2);
  for (int i = 0; i < 500; ++i) {
    const TraceGenerator::Sample s = gen->GenerateDetailed(rng);
    const std::set<int> sub(s.subgraph.begin(), s.subgraph.end());
    EXPECT_LE(sub.size(), 10u);
    EXPECT_TRUE(sub.contains(s.origin));
    EXPECT_LE(s.trace.size(), static_cast<std::size_t>(s.drawn_visits));
    EXPECT_GE(s.trace.size(), 1u);
    for (const Visit& v : s.trace.visits()) EXPECT_TRUE(sub.contains(v.roi));
  }
}

TEST(GeneratorTest, PooledTimeMarginalAndActivityMean) {
  const MarginalSet m = GridMarginals(100, 10, 50, 10);
  auto gen = TraceGenerator::Create(m);
  ASSERT_OK(gen);
  Rng rng(3);
  std::vector<double> time(50, 0.0);
  double drawn = 0;
  constexpr int kTraces = 10000;
  for (int i = 0; i < kTraces; ++i) {
    const TraceGenerator::Sample s = gen->GenerateDetailed(rng);
    drawn += s.drawn_visits;
    for (const Visit& v : s.trace.visits()) time[v.epoch] += 1;
  }
  EXPECT_LT(TotalVariation(Dist(time), m.time), 0.02);
  EXPECT_NEAR(drawn / kTraces, 10.0, 0.5);
}

TEST(GeneratorTest, ReferenceOfOneAndDeterminism) {
  const MarginalSet m = GridMarginals(30, 6, 12, 5);
  Rng rng(4);
  auto one = GenerateReference(m, 1, rng);
  ASSERT_OK(one);
  EXPECT_EQ(one->size(), 1u);
  EXPECT_FALSE(one->traces[0].empty());
  EXPECT_FALSE(GenerateReference(m, 0, rng).ok());
  Rng a(9), b(9);
  EXPECT_EQ(GenerateReference(m, 200, a)->traces, GenerateReference(m, 200, b)->traces);
}

TEST(GeneratorTest, TracesAreIndexedSubstreams) {
  auto gen = TraceGenerator::Create(GridMarginals(30, 6, 12, 5));
  Rng rng(5);
  const uint64_t key = Rng(5).NextKey();
  const std::vector<LocationTrace> pool = GenerateTraces(*gen, 50, rng);
  Rng sub(DeriveSeed(key, {37}));
  EXPECT_EQ(gen->Generate(sub), pool[37]);
}

TEST(GeneratorTest, OriginsFollowSpaceMarginal) {
  const MarginalSet m = GridMarginals(20, 5, 10, 3);
  auto gen = TraceGenerator::Create(m);
  Rng rng(6);
  constexpr int kTraces = 5000;
  std::vector<double> counts(20, 0.0), expected(20);
  for (int i = 0; i < kTraces; ++i) counts[gen->GenerateDetailed(rng).origin] += 1;
  for (int i = 0; i < 20; ++i) expected[i] = kTraces * m.space[i];
  EXPECT_LT(ChiSquare(counts, expected), ChiSquareCritical(19, 0.01));
}

TEST(GeneratorTest, RejectsMismatchedGraph) {
  MarginalSet m = GridMarginals(20, 5, 10, 3);
  m.delaunay = DelaunayGraph::FromEdges(3, {{0, 1}, {1, 2}});
  EXPECT_FALSE(TraceGenerator::Create(m).ok());
}

}  // namespace
}  // namespace aggmia
