// Hot paths: one propagation, one spectrum, one fit, one threshold-map cell.

#include "dualprobe/master_equation.hpp"
#include "dualprobe/metrics.hpp"
#include "dualprobe/propagator.hpp"
#include "dualprobe/spectral.hpp"

#include <benchmark/benchmark.h>

#include <cmath>

using namespace dualprobe;

namespace {

const SystemParams kEqual{1000.0, 0.0, std::sqrt(0.5), std::sqrt(0.5)};

Superoperator weak_generator(const StateSpace& space) {
  return redfield_generator(kEqual, coupling_from_rates({0.1, 0.05}), space, SecularMode::None);
}

void BM_GeneratorRestricted(benchmark::State& state) {
  const auto space = StateSpace::single_excitation();
  for (auto _ : state) benchmark::DoNotOptimize(weak_generator(space));
}
BENCHMARK(BM_GeneratorRestricted)->Unit(benchmark::kMicrosecond);

void BM_GeneratorFull(benchmark::State& state) {
  const auto space = StateSpace::three_spin();
  for (auto _ : state) benchmark::DoNotOptimize(weak_generator(space));
}
BENCHMARK(BM_GeneratorFull)->Unit(benchmark::kMillisecond);

void BM_Evolve(benchmark::State& state) {
  const auto space = state.range(0) ? StateSpace::three_spin() : StateSpace::single_excitation();
  const auto gen = weak_generator(space);
  const auto rho0 = space.pure_product_state({Site::Q1});
  for (auto _ : state) benchmark::DoNotOptimize(evolve(gen, rho0, 100.0, 4096));
}
BENCHMARK(BM_Evolve)->Arg(0)->Arg(1)->ArgNames({"full"})->Unit(benchmark::kMillisecond);

Spectrum weak_spectrum() {
  const auto space = StateSpace::single_excitation();
  const auto traj = evolve(weak_generator(space), space.pure_product_state({Site::Q1}), 200.0, 8192);
  return one_sided_fourier(traj.sz_q1, linear_grid(0.0, 6.0, 4096), traj.asymptote->sz[0]);
}

void BM_OneSidedFourier(benchmark::State& state) {
  const auto space = StateSpace::single_excitation();
  const auto traj = evolve(weak_generator(space), space.pure_product_state({Site::Q1}), 200.0, 8192);
  const auto omegas = linear_grid(0.0, 6.0, 4096);
  for (auto _ : state) benchmark::DoNotOptimize(one_sided_fourier(traj.sz_q1, omegas));
}
BENCHMARK(BM_OneSidedFourier)->Unit(benchmark::kMillisecond);

void BM_FitPeaks(benchmark::State& state) {
  const auto spectrum = weak_spectrum();
  for (auto _ : state) benchmark::DoNotOptimize(fit_peaks(spectrum));
}
BENCHMARK(BM_FitPeaks)->Unit(benchmark::kMillisecond);

void BM_StrengthCell(benchmark::State& state) {
  const auto strength = redfield_strength(kEqual, StateSpace::single_excitation());
  const double gamma_1 = static_cast<double>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(strength(gamma_1, 1.0));
}
BENCHMARK(BM_StrengthCell)->Arg(2)->Arg(12)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
