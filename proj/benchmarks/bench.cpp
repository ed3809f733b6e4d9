#include <benchmark/benchmark.h>

#include <cmath>

#include "occupancy/moments.hpp"
#include "occupancy/rng.hpp"
#include "occupancy/sampler.hpp"

using namespace occupancy;

static void BM_PhiPoissonPowerLaw(benchmark::State& state) {
  const auto m = FrequencyModel::power_law(0.5);
  const double t = std::pow(10.0, state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(phi_poisson(m, t));
}
BENCHMARK(BM_PhiPoissonPowerLaw)->Arg(3)->Arg(5)->Arg(7);

static void BM_VarPoissonGeometric(benchmark::State& state) {
  const auto m = FrequencyModel::geometric(0.5);
  const double t = std::pow(10.0, state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(var_poisson(m, t));
}
BENCHMARK(BM_VarPoissonGeometric)->Arg(3)->Arg(6);

static void BM_SamplerThroughput(benchmark::State& state) {
  const auto m = FrequencyModel::power_law(0.5);
  Rng rng = Rng::stream(1, 1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(run_fixed(m, static_cast<std::uint64_t>(state.range(0)), rng));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SamplerThroughput)->Arg(10000)->Arg(100000);

BENCHMARK_MAIN();
