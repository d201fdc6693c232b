#include "polyberg/bergman.hpp"
#include "polyberg/toeplitz.hpp"

#include <benchmark/benchmark.h>

using namespace polyberg;

static void BM_BuildBank(benchmark::State& state) {
    const ConformalMap map = ConformalMap::solve(unit_square());
    const WhitneyDecomposition d = whitney_decompose(map.polygon(), static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(build_whitney_bank(map, d, 6));
}
BENCHMARK(BM_BuildBank)->DenseRange(4, 7)->Unit(benchmark::kMillisecond);

static void BM_ApplyGeneralized(benchmark::State& state) {
    const ConformalMap map = ConformalMap::solve(unit_square());
    const WhitneyBank bank = build_whitney_bank(map, whitney_decompose(map.polygon(), 6), 6);
    const AnalyticFunction f = AnalyticFunction::polynomial({0.0, 0.0, 1.0});
    const Symbol a = Symbol::coordinate_sum();
    for (auto _ : state) benchmark::DoNotOptimize(apply_generalized(a, f, map, bank, Complex(0.4, 0.6)));
}
BENCHMARK(BM_ApplyGeneralized)->Unit(benchmark::kMillisecond);

static void BM_Kernel(benchmark::State& state) {
    const ConformalMap map = ConformalMap::solve(l_shape());
    const KernelContext ctx(map);
    for (auto _ : state) benchmark::DoNotOptimize(kernel(ctx, Complex(0.3, 0.4), Complex(1.5, 0.5)));
}
BENCHMARK(BM_Kernel);

BENCHMARK_MAIN();
