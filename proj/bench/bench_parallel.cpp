// Copyright 2026 The uavh Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at

//     https://www.apache.org/licenses/LICENSE-2.0

// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


// Serial reference versus OpenMP kernel for the two data-parallel stages:
// the ray-traced LoS-probability sweep over cities and the Monte-Carlo loop
// over city realizations.

#include <benchmark/benchmark.h>

#include "uavh/citygen.hpp"
#include "uavh/harness.hpp"

namespace {

using uavh::CityParams;
using uavh::ExperimentConfig;

void BM_LosSweepSerial(benchmark::State& state) {
  const int cities = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(uavh::sample_los_probability_serial(CityParams{}, cities, 7));
  }
  state.SetItemsProcessed(state.iterations() * cities);
}

void BM_LosSweepParallel(benchmark::State& state) {
  const int cities = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(uavh::sample_los_probability(CityParams{}, cities, 7));
  }
  state.SetItemsProcessed(state.iterations() * cities);
}

ExperimentConfig small_experiment(int realizations) {
  ExperimentConfig cfg;
  cfg.fit_channel = false;
  cfg.realizations = realizations;
  cfg.durations = {10.6};
  cfg.schemes = {"PLB", "ACS", "JA", "OJA"};
  return cfg;
}

void BM_MonteCarloSerial(benchmark::State& state) {
  const ExperimentConfig cfg = small_experiment(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(uavh::run_monte_carlo_serial(cfg));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_MonteCarloParallel(benchmark::State& state) {
  const ExperimentConfig cfg = small_experiment(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(uavh::run_monte_carlo(cfg));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

BENCHMARK(BM_LosSweepSerial)->Arg(20)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_LosSweepParallel)->Arg(20)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MonteCarloSerial)->Arg(8)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MonteCarloParallel)->Arg(8)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
