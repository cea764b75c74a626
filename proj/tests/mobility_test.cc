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
#include <map>
#include <unordered_set>
#include <vector>

#include "gtest/gtest.h"
#include "test_util.h"

namespace aggmia {
namespace {

using testing::ChiSquare;
using testing::ChiSquareCritical;
using testing::RandomTrace;
using testing::Trace;

constexpr Dims kDims{4, 4};

TEST(RoiGeometryTest, Validates) {
  EXPECT_FALSE(RoiGeometry::Create({{0, 0}, {1, 1}}).ok());
  EXPECT_FALSE(RoiGeometry::Create({{0, 0}, {1, 1}, {0, 0}}).ok());
  EXPECT_FALSE(RoiGeometry::Create({{0, 0}, {1, 1}, {NAN, 0}}).ok());
  EXPECT_TRUE(RoiGeometry::Create({{0, 0}, {1, 1}, {1, 0}}).ok());
}

TEST(LocationTraceTest, SortsDedupsAndRangeChecks) {
  auto t = LocationTrace::Create(kDims, {{2, 1}, {0, 3}, {2, 1}});
  ASSERT_OK(t);
  ASSERT_EQ(t->size(), 2u);
  EXPECT_EQ(t->visits()[0], (Visit{0, 3}));
  EXPECT_TRUE(t->Contains({2, 1}));
  EXPECT_FALSE(t->Contains({1, 2}));
  EXPECT_EQ(LocationTrace::Create(kDims, {{4, 0}}).status().code(),
            absl::StatusCode::kOutOfRange);
  EXPECT_EQ(LocationTrace::Create(kDims, {{0, -1}}).status().code(),
            absl::StatusCode::kOutOfRange);
}

TEST(AggregateTest, SingleTraceIsItsBinaryMatrix) {
  const LocationTrace t = Trace(kDims, {{0, 1}, {3, 3}});
  auto a = Aggregate(std::span<const LocationTrace>(&t, 1));
  ASSERT_OK(a);
  EXPECT_EQ(a->group_size(), 1);
  EXPECT_EQ(a->provenance().kind, Provenance::Kind::kRaw);
  for (int s = 0; s < 4; ++s) {
    for (int e = 0; e < 4; ++e) EXPECT_EQ(a->at(s, e), t.Contains({s, e}) ? 1 : 0);
  }
}

TEST(AggregateTest, DisjointTracesGiveTheirUnion) {
  const std::vector<LocationTrace> traces{Trace(kDims, {{0, 0}, {1, 1}}),
                                          Trace(kDims, {{2, 2}})};
  auto a = Aggregate(traces);
  ASSERT_OK(a);
  EXPECT_EQ(a->Total(), 3);
  for (double c : a->counts()) EXPECT_TRUE(c == 0 || c == 1);
  EXPECT_EQ(a->at(2, 2), 1);
}

TEST(AggregateTest, MatchesPerCellRecount) {
  Rng rng(11);
  std::vector<LocationTrace> traces;
  for (int i = 0; i < 3; ++i) traces.push_back(RandomTrace(kDims, 0.4, rng));
  auto a = Aggregate(traces);
  ASSERT_OK(a);
  for (int s = 0; s < 4; ++s) {
    for (int e = 0; e < 4; ++e) {
      int count = 0;
      for (const LocationTrace& t : traces) count += t.Contains({s, e});
      EXPECT_EQ(a->at(s, e), count);
    }
  }
}

TEST(AggregateTest, RejectsEmptyAndMismatchedInput) {
  EXPECT_FALSE(Aggregate(std::span<const LocationTrace>()).ok());
  const std::vector<LocationTrace> traces{Trace(kDims, {{0, 0}}),
                                          Trace(Dims{4, 5}, {{0, 0}})};
  EXPECT_EQ(Aggregate(traces).status().code(), absl::StatusCode::kInvalidArgument);
}

TEST(AggregateTest, IsLinearAndSumsVisits) {
  Rng rng(12);
  const Dims dims{6, 9};
  std::vector<LocationTrace> all;
  for (int i = 0; i < 12; ++i) all.push_back(RandomTrace(dims, 0.2, rng));
  const std::vector<LocationTrace> left(all.begin(), all.begin() + 5);
  const std::vector<LocationTrace> right(all.begin() + 5, all.end());
  auto a = Aggregate(all), l = Aggregate(left), r = Aggregate(right);
  ASSERT_OK(a);
  double visits = 0;
  for (const LocationTrace& t : all) visits += t.size();
  EXPECT_EQ(a->Total(), visits);
  for (std::size_t i = 0; i < dims.cells(); ++i) {
    EXPECT_EQ(a->counts()[i], l->counts()[i] + r->counts()[i]);
  }
  // Removing one member subtracts exactly its trace.
  const std::vector<LocationTrace> without(all.begin() + 1, all.end());
  auto w = Aggregate(without);
  for (int s = 0; s < dims.n_rois; ++s) {
    for (int e = 0; e < dims.n_epochs; ++e) {
      EXPECT_EQ(a->at(s, e) - w->at(s, e), all[0].Contains({s, e}) ? 1 : 0);
    }
  }
}

TEST(AggregateMatrixTest, CreateValidatesByProvenance) {
  Provenance raw;
  EXPECT_FALSE(AggregateMatrix::Create({1, 2}, 3, raw, {1.5, 0}).ok());
  EXPECT_FALSE(AggregateMatrix::Create({1, 2}, 3, raw, {4, 0}).ok());
  EXPECT_FALSE(AggregateMatrix::Create({1, 2}, 3, raw, {-1, 0}).ok());
  EXPECT_TRUE(AggregateMatrix::Create({1, 2}, 3, raw, {3, 0}).ok());
  Provenance ssc;
  ssc.kind = Provenance::Kind::kSsc;
  ssc.ssc_k = 1;
  EXPECT_FALSE(AggregateMatrix::Create({1, 2}, 3, ssc, {1}).ok());
}

TEST(PartialTraceTest, FourVisitsAtTenPercentKeepsOne) {
  Rng rng(1);
  const LocationTrace t = Trace(kDims, {{0, 0}, {1, 1}, {2, 2}, {3, 3}});
  auto p = PartialTrace(t, 0.1, rng);
  ASSERT_OK(p);
  ASSERT_EQ(p->size(), 1u);
  EXPECT_TRUE(t.Contains(p->visits()[0]));
}

TEST(PartialTraceTest, FullFractionIsIdentity) {
  Rng rng(2);
  const LocationTrace t = RandomTrace({5, 5}, 0.3, rng);
  auto p = PartialTrace(t, 1.0, rng);
  ASSERT_OK(p);
  EXPECT_EQ(*p, t);
}

TEST(PartialTraceTest, SizeIsCeilingOfFraction) {
  Rng rng(3);
  for (int n = 1; n <= 30; ++n) {
    std::vector<Visit> v;
    for (int i = 0; i < n; ++i) v.push_back({i % 6, i / 6});
    const LocationTrace t = Trace({6, 6}, v);
    for (double f : {0.01, 0.1, 0.25, 0.3, 0.5, 0.7, 0.99, 1.0}) {
      auto p = PartialTrace(t, f, rng);
      ASSERT_OK(p);
      EXPECT_EQ(p->size(), static_cast<std::size_t>(std::ceil(f * n - 1e-9)))
          << "n=" << n << " f=" << f;
      for (const Visit& x : p->visits()) EXPECT_TRUE(t.Contains(x));
    }
  }
}

TEST(PartialTraceTest, UniformOverSubsets) {
  std::vector<Visit> v;
  for (int i = 0; i < 10; ++i) v.push_back({i % 4, i / 4});
  const LocationTrace t = Trace(kDims, v);
  Rng rng(4);
  std::map<std::vector<Visit>, double> counts;
  constexpr int kDraws = 24000;
  for (int i = 0; i < kDraws; ++i) {
    auto p = PartialTrace(t, 0.25, rng);
    ASSERT_EQ(p->size(), 3u);
    counts[std::vector<Visit>(p->visits().begin(), p->visits().end())] += 1;
  }
  ASSERT_EQ(counts.size(), 120u);
  std::vector<double> obs, expected;
  for (const auto& [k, c] : counts) {
    obs.push_back(c);
    expected.push_back(kDraws / 120.0);
  }
  EXPECT_LT(ChiSquare(obs, expected), ChiSquareCritical(119, 0.01));
}

TEST(PartialTraceTest, RejectsBadInput) {
  Rng rng(5);
  const LocationTrace t = Trace(kDims, {{0, 0}});
  EXPECT_FALSE(PartialTrace(t, 0.0, rng).ok());
  EXPECT_FALSE(PartialTrace(t, 1.5, rng).ok());
  EXPECT_FALSE(PartialTrace(LocationTrace::FromVisits(kDims, {}), 0.5, rng).ok());
}

Population MakePopulation(int n, uint64_t seed) {
  Rng rng(seed);
  std::vector<UserId> ids;
  std::vector<LocationTrace> traces;
  for (int i = 0; i < n; ++i) {
    ids.push_back(1000 + i);
    traces.push_back(RandomTrace(kDims, 0.3, rng));
  }
  auto p = Population::Create(testing::GridGeometry(4, 2), 4, 2, ids, traces);
  EXPECT_TRUE(p.ok()) << p.status();
  return *p;
}

TEST(PopulationTest, RejectsDuplicateIdsAndBadDims) {
  const std::vector<LocationTrace> traces{Trace(kDims, {{0, 0}}), Trace(kDims, {{1, 1}})};
  EXPECT_FALSE(
      Population::Create(testing::GridGeometry(4, 2), 4, 2, {1, 1}, traces).ok());
  EXPECT_FALSE(
      Population::Create(testing::GridGeometry(4, 2), 5, 2, {1, 2}, traces).ok());
  auto p = Population::Create(testing::GridGeometry(4, 2), 4, 2, {7, 9}, traces);
  ASSERT_OK(p);
  EXPECT_EQ(p->IndexOf(9), 1u);
  EXPECT_FALSE(p->IndexOf(8).has_value());
}

TEST(SampleGroupTest, WholePopulation) {
  const Population pop = MakePopulation(20, 1);
  Rng rng(2);
  auto g = SampleGroup(pop, 20, {}, std::nullopt, rng);
  ASSERT_OK(g);
  std::vector<std::size_t> sorted = *g;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < 20; ++i) EXPECT_EQ(sorted[i], i);
}

TEST(SampleGroupTest, IncludeWithSizeOne) {
  const Population pop = MakePopulation(20, 1);
  Rng rng(3);
  auto g = SampleGroup(pop, 1, {}, 1007, rng);
  ASSERT_OK(g);
  ASSERT_EQ(g->size(), 1u);
  EXPECT_EQ(pop.id((*g)[0]), 1007);
}

TEST(SampleGroupTest, RespectsExclusionAndRejectsShortfall) {
  const Population pop = MakePopulation(10, 1);
  std::unordered_set<UserId> exclude{1000, 1001, 1002};
  Rng rng(4);
  for (int i = 0; i < 50; ++i) {
    auto g = SampleGroup(pop, 5, exclude, 1001, rng);
    ASSERT_OK(g);
    EXPECT_EQ(pop.id(g->back()), 1001);
    for (std::size_t j = 0; j + 1 < g->size(); ++j) {
      EXPECT_FALSE(exclude.contains(pop.id((*g)[j])));
    }
  }
  EXPECT_EQ(SampleGroup(pop, 8, exclude, std::nullopt, rng).status().code(),
            absl::StatusCode::kFailedPrecondition);
}

TEST(SampleGroupTest, InclusionFrequency) {
  const Population pop = MakePopulation(100, 1);
  Rng rng(5);
  constexpr int kDraws = 5000;
  std::vector<int> hits(100, 0);
  for (int i = 0; i < kDraws; ++i) {
    auto g = SampleGroup(pop, 10, {}, std::nullopt, rng);
    ASSERT_OK(g);
    for (std::size_t j : *g) ++hits[j];
  }
  const double sd = std::sqrt(kDraws * 0.1 * 0.9);
  for (int h : hits) EXPECT_NEAR(h, kDraws * 0.1, 3.5 * sd);
}

}  // namespace
}  // namespace aggmia
