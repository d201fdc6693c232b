#include "polyberg/geometry.hpp"

#include <benchmark/benchmark.h>

using namespace polyberg;

static void BM_WhitneyUnitSquare(benchmark::State& state) {
    const Polygon p = unit_square();
    for (auto _ : state) benchmark::DoNotOptimize(whitney_decompose(p, static_cast<int>(state.range(0))));
}
BENCHMARK(BM_WhitneyUnitSquare)->DenseRange(4, 8)->Unit(benchmark::kMillisecond);

static void BM_WhitneyLShape(benchmark::State& state) {
    const Polygon p = l_shape();
    for (auto _ : state) benchmark::DoNotOptimize(whitney_decompose(p, static_cast<int>(state.range(0))));
}
BENCHMARK(BM_WhitneyLShape)->DenseRange(4, 8)->Unit(benchmark::kMillisecond);

static void BM_Invariants(benchmark::State& state) {
    const Polygon p = random_star_polygon(7, 11);
    const WhitneyDecomposition d = whitney_decompose(p, 6);
    for (auto _ : state) benchmark::DoNotOptimize(check_whitney_invariants(d, p, 1000, 1));
}
BENCHMARK(BM_Invariants)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
