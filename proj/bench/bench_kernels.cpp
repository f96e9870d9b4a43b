#include <benchmark/benchmark.h>

#include "qlab/invariants.hpp"
#include "qlab/phase_ensemble.hpp"
#include "qlab/projection_qa.hpp"

using namespace qlab;

namespace {

Exec exec_of(const benchmark::State& state) { return state.range(0) == 0 ? Exec::serial : Exec::parallel; }

const Hamiltonian& oscillator(int dim) {
    static const Hamiltonian one{1, 1.0, potential::Harmonic{1.0}};
    static const Hamiltonian two{2, 1.0, potential::Harmonic{1.0}};
    return dim == 1 ? one : two;
}

void BM_Liouville(benchmark::State& state) {
    const PhaseGrid grid(16.0, 128, 16.0, 128);
    const PhaseDensity rho0 = phase_gaussian(grid, 1.0, 0.0, 0.7, 0.7);
    CharacteristicOptions opts;
    opts.dt = 1e-2;
    opts.exec = exec_of(state);
    for (auto _ : state) benchmark::DoNotOptimize(evolve_liouville(oscillator(1), rho0, 0.5, opts).values.data());
}

void BM_QaSeeds(benchmark::State& state) {
    const Grid grid = Grid::square(12.0, 64);
    QaOptions opts;
    opts.dt = 1e-2;
    opts.snapshot_every = 10;
    opts.exec = exec_of(state);
    const InitialMomentum m0 = linear_momentum({0.2, -0.1}, {0.3, 0.0, 0.0, 0.3});
    for (auto _ : state)
        benchmark::DoNotOptimize(evolve_canonical_condition(oscillator(2), grid, m0, 0.5, opts).snapshots.size());
}

void BM_MonteCarlo(benchmark::State& state) {
    CharacteristicOptions opts;
    opts.dt = 1e-2;
    opts.exec = exec_of(state);
    for (auto _ : state)
        benchmark::DoNotOptimize(monte_carlo_moments(oscillator(1), 1.0, 0.0, 0.7, 0.7, 1.0, 20000, 7, opts).mean_q);
}

void BM_ContourAdvection(benchmark::State& state) {
    AdvectOptions opts;
    opts.dt = 1e-2;
    opts.exec = exec_of(state);
    const FlowField rotation = [](const Vec& x, double) -> std::optional<Vec> { return Vec{-x[1], x[0]}; };
    const Contour c0 = circle_contour({0.0, 0.0}, 1.0, 4096);
    for (auto _ : state) benchmark::DoNotOptimize(advect_contour(rotation, c0, 1.0, opts).points.size());
}

}  // namespace

BENCHMARK(BM_Liouville)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_QaSeeds)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MonteCarlo)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ContourAdvection)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
