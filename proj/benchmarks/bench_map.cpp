#include "polyberg/scmap.hpp"

#include <benchmark/benchmark.h>

using namespace polyberg;

static void BM_SolveRegular(benchmark::State& state) {
    const Polygon p = regular_polygon(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(solve_parameter_problem(p));
}
BENCHMARK(BM_SolveRegular)->DenseRange(3, 8)->Unit(benchmark::kMillisecond);

static void BM_SolveLShape(benchmark::State& state) {
    const Polygon p = l_shape();
    for (auto _ : state) benchmark::DoNotOptimize(solve_parameter_problem(p));
}
BENCHMARK(BM_SolveLShape)->Unit(benchmark::kMillisecond);

static void BM_Psi(benchmark::State& state) {
    const ConformalMap map = ConformalMap::solve(l_shape());
    Complex z(0.3, -0.4);
    for (auto _ : state) {
        benchmark::DoNotOptimize(map.psi(z));
        z = Complex(-z.imag(), z.real());
    }
}
BENCHMARK(BM_Psi);

static void BM_PhiJet(benchmark::State& state) {
    const ConformalMap map = ConformalMap::solve(l_shape());
    Complex w(0.5, 1.5);
    for (auto _ : state) {
        benchmark::DoNotOptimize(map.jet(w));
        w = Complex(w.imag(), w.real());
    }
}
BENCHMARK(BM_PhiJet);

BENCHMARK_MAIN();
