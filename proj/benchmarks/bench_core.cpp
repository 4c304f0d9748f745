#include <benchmark/benchmark.h>

#include <cmath>

#include "fragdiff/evolution.hpp"
#include "fragdiff/stationary.hpp"

using namespace fragdiff;

namespace {

OperatorBundle mitosis(std::size_t n) {
    return OperatorBundle(build_mesh(40.0, n), RateModel::constant(1.0),
                          DaughterKernel::power_law(0.0));
}

OperatorBundle linear_rate(std::size_t n) {
    return OperatorBundle(build_mesh(20.0, n), RateModel::power(1.0),
                          DaughterKernel::power_law(0.0));
}

void birth_apply(benchmark::State& state) {
    const auto bundle = mitosis(static_cast<std::size_t>(state.range(0)));
    const State f = State::sample(bundle.mesh_ptr(), [](double x) { return std::exp(-x); });
    std::vector<double> out(bundle.size());
    for (auto _ : state) {
        bundle.birth().apply(f.values(), out);
        benchmark::DoNotOptimize(out.data());
    }
    state.SetComplexityN(state.range(0));
}
BENCHMARK(birth_apply)->RangeMultiplier(4)->Range(256, 16384)->Complexity(benchmark::oN);

void steady_solve(benchmark::State& state) {
    const auto bundle = mitosis(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(solve_steady(bundle).residual_x1);
    }
}
BENCHMARK(steady_solve)->RangeMultiplier(4)->Range(256, 4096)->Unit(benchmark::kMillisecond);

void imex_step(benchmark::State& state) {
    const auto bundle = mitosis(static_cast<std::size_t>(state.range(0)));
    const Stepper stepper(bundle, 1e-4, Scheme::imex_euler);
    State f = State::sample(bundle.mesh_ptr(), [](double x) { return std::exp(-x); });
    for (auto _ : state) {
        f = stepper.advance(f);
    }
}
BENCHMARK(imex_step)->Arg(2048);

void implicit_step(benchmark::State& state) {
    const auto bundle = linear_rate(static_cast<std::size_t>(state.range(0)));
    const Stepper stepper(bundle, 0.01, Scheme::fully_implicit);
    State f = State::sample(bundle.mesh_ptr(), [](double x) { return std::exp(-x); });
    for (auto _ : state) {
        f = stepper.advance(f);
    }
}
BENCHMARK(implicit_step)->Arg(1024);

}  // namespace

BENCHMARK_MAIN();
