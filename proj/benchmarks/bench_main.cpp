#include <benchmark/benchmark.h>

#include <cmath>
#include <random>

#include "frontlab/banded.hpp"
#include "frontlab/dispersion.hpp"
#include "frontlab/front.hpp"
#include "frontlab/polynomial.hpp"
#include "frontlab/simulator.hpp"

using namespace frontlab;

namespace {

BandedMatrix<double> diagonally_dominant(int n, int half) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    BandedMatrix<double> A(n, half, half);
    for (int i = 0; i < n; ++i)
        for (int j = std::max(0, i - half); j <= std::min(n - 1, i + half); ++j) A(i, j) = i == j ? 4.0 * half : dist(rng);
    return A;
}

void BM_BandedFactor(benchmark::State& state) {
    const auto A = diagonally_dominant(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
    for (auto _ : state) {
        BandedLU<double> lu(A);
        benchmark::DoNotOptimize(lu.pivot_ratio());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_BandedFactor)->Args({17000, 2})->Args({17000, 3})->Args({4000, 5});

void BM_BandedSolve(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const BandedLU<double> lu(diagonally_dominant(n, static_cast<int>(state.range(1))));
    std::vector<double> b(static_cast<std::size_t>(n), 1.0);
    for (auto _ : state) {
        std::vector<double> x = b;
        lu.solve_in_place(x);
        benchmark::DoNotOptimize(x.data());
    }
    state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_BandedSolve)->Args({17000, 2})->Args({17000, 3});

void BM_CompanionRoots(benchmark::State& state) {
    const ModelSpec spec = models::efkpp(0.1);
    const auto coeffs = dispersion_polynomial(spec, 2.0, 0.5, Side::leading_edge);
    for (auto _ : state) benchmark::DoNotOptimize(poly::roots(coeffs));
}
BENCHMARK(BM_CompanionRoots);

void BM_DoubleRoot(benchmark::State& state) {
    const ModelSpec spec = models::efkpp(0.1);
    for (auto _ : state) benchmark::DoNotOptimize(find_double_root(spec).c_star);
}
BENCHMARK(BM_DoubleRoot)->Unit(benchmark::kMillisecond);

void BM_SimulatorStep(benchmark::State& state) {
    const ModelSpec spec = state.range(0) == 1 ? models::fkpp() : models::efkpp(0.1);
    SimConfig c;
    Simulator sim(spec, c);
    SimState s = sim.initial_state();
    for (auto _ : state) sim.step(s);
    state.SetItemsProcessed(state.iterations() * c.n);
}
BENCHMARK(BM_SimulatorStep)->Arg(1)->Arg(2)->Unit(benchmark::kMicrosecond);

void BM_FrontSolve(benchmark::State& state) {
    const ModelSpec spec = models::fkpp();
    const PinchResult pinch = find_double_root(spec);
    for (auto _ : state) benchmark::DoNotOptimize(solve_front(spec, pinch, -40.0, 60.0, static_cast<int>(state.range(0))).a_coeff);
}
BENCHMARK(BM_FrontSolve)->Arg(1000)->Arg(4000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
