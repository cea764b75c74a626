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

#include <vector>

#include "aggmia/classifier.h"
#include "aggmia/delaunay.h"
#include "aggmia/evaluation.h"
#include "aggmia/generator.h"
#include "aggmia/privacy.h"
#include "aggmia/world.h"
#include "benchmark/benchmark.h"

namespace aggmia {
namespace {

const World& BenchWorld() {
  static const World* world = [] {
    WorldSpec spec;
    spec.n_rois = 100;
    spec.grid_cols = 10;
    spec.population = 2000;
    return new World(*SynthesizeWorld(spec));
  }();
  return *world;
}

void BM_GenerateTraces(benchmark::State& state) {
  auto gen = TraceGenerator::Create(BenchWorld().truth);
  Rng rng(1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(GenerateTraces(*gen, static_cast<int>(state.range(0)), rng));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_GenerateTraces)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_Delaunay(benchmark::State& state) {
  Rng rng(2);
  std::vector<Point> pts;
  for (int i = 0; i < state.range(0); ++i) pts.push_back({rng.Uniform(), rng.Uniform()});
  for (auto _ : state) benchmark::DoNotOptimize(DelaunayTriangulate(pts));
}
BENCHMARK(BM_Delaunay)->Arg(100)->Arg(500)->Arg(2000);

// Training on m = 100 raw releases with the target added to half of them.
void BM_TrainClassifier(benchmark::State& state) {
  const Population& pop = BenchWorld().population;
  const int n = static_cast<int>(state.range(0));
  Rng rng(3);
  std::vector<LabeledAggregate> train;
  for (int i = 0; i < n; ++i) {
    auto group = SampleGroup(pop, 100, {0}, std::nullopt, rng);
    std::vector<const LocationTrace*> traces;
    for (std::size_t u : *group) traces.push_back(&pop.trace(u));
    const bool in = i % 2 == 0;
    if (in) traces.back() = &pop.trace(0);
    train.push_back({*ReleaseGroup(traces, PrivacyConfig::Dp(1.0), 24, rng), in});
  }
  for (auto _ : state) benchmark::DoNotOptimize(TrainClassifier(train));
}
BENCHMARK(BM_TrainClassifier)->Arg(100)->Arg(400)->Unit(benchmark::kMillisecond);

void BM_Auc(benchmark::State& state) {
  Rng rng(4);
  std::vector<double> s(state.range(0));
  std::vector<bool> y(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    s[i] = rng.StandardNormal();
    y[i] = i % 2 == 0;
  }
  for (auto _ : state) benchmark::DoNotOptimize(Auc(s, y));
}
BENCHMARK(BM_Auc)->Arg(100)->Arg(10000);

}  // namespace
}  // namespace aggmia

BENCHMARK_MAIN();
