// Copyright 2026 The mfjump Authors
// SPDX-License-Identifier: Apache-2.0
#include <benchmark/benchmark.h>

#include <numeric>
#include <random>
#include <vector>

#include "mfjump/mckean_limit.hpp"
#include "mfjump/metrics.hpp"
#include "mfjump/model_zoo.hpp"
#include "mfjump/particle_system.hpp"

namespace {

using namespace mfjump;

std::vector<std::uint64_t> ids_for(std::size_t n) {
  std::vector<std::uint64_t> ids(n);
  std::iota(ids.begin(), ids.end(), 0);
  return ids;
}

void BM_StepX(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto spec = build_model("lipschitz-demo");
  const DriverBundle drv(1, 0);
  const auto ids = ids_for(n);
  auto st = make_state(drv, sample_initial(drv, 1, -1.0, 1.0, ids), 1, ids);
  for (auto _ : state) step_X(st, spec, 0.01, drv);
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_StepX)->RangeMultiplier(4)->Range(64, 4096);

void BM_StepY(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto spec = build_model("lipschitz-demo");
  const DriverBundle drv(1, 0);
  const auto ids = ids_for(n);
  auto st = make_state(drv, sample_initial(drv, 1, -1.0, 1.0, ids), 1, ids);
  for (auto _ : state) step_Y(st, spec, 0.01, drv);
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_StepY)->RangeMultiplier(4)->Range(64, 4096);

void BM_NeuronalEventDriven(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto spec = build_model("neuronal");
  const auto ids = ids_for(n);
  SimOptions o;
  o.horizon = 1.0;
  o.dt = 0.1;
  o.event_driven = true;
  std::uint64_t r = 0;
  for (auto _ : state) {
    const DriverBundle drv(2, r++);
    const auto x0 = sample_initial(drv, 1, 0.0, 1.0, ids);
    benchmark::DoNotOptimize(simulate(SystemKind::X, spec, x0, o, drv, ids));
  }
}
BENCHMARK(BM_NeuronalEventDriven)->RangeMultiplier(4)->Range(64, 1024);

void BM_W1Assignment(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  std::vector<double> a(2 * n), b(2 * n);
  for (auto& v : a) v = g(rng);
  for (auto& v : b) v = g(rng);
  for (auto _ : state) benchmark::DoNotOptimize(w1_assignment(a, b, 2, n));
}
BENCHMARK(BM_W1Assignment)->RangeMultiplier(2)->Range(32, 512);

void BM_W1Sorted(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g;
  std::vector<double> a(n), b(n);
  for (auto& v : a) v = g(rng);
  for (auto& v : b) v = g(rng);
  for (auto _ : state) benchmark::DoNotOptimize(w1_1d(a, b));
}
BENCHMARK(BM_W1Sorted)->RangeMultiplier(8)->Range(512, 1 << 18);

void BM_PicardIterate(benchmark::State& state) {
  const auto m = static_cast<std::size_t>(state.range(0));
  const auto spec = build_model("lipschitz-demo");
  LimitConfig cfg;
  cfg.sim.horizon = 1.0;
  cfg.sim.dt = 0.01;
  const auto f0 = initial_flow(spec, m, cfg, 5);
  for (auto _ : state) benchmark::DoNotOptimize(picard_iterate(f0, spec, cfg, 5));
}
BENCHMARK(BM_PicardIterate)->Arg(1024)->Arg(4096)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
