// Serial reference kernels against their OpenMP counterparts.

#include <omp.h>

#include <cmath>
#include <vector>

#include <benchmark/benchmark.h>

#include "seqmon/model.hpp"
#include "seqmon/montecarlo.hpp"
#include "seqmon/solvers.hpp"

using namespace seqmon;

namespace {

const std::array<ExtendedSystem, 2>& damping_systems() {
  static const std::array<ExtendedSystem, 2> sys = [] {
    const HypothesisPair p = preset_damping(100, 440, 10, 1, 1);
    return std::array<ExtendedSystem, 2>{build_steady_extended(p, 0), build_steady_extended(p, 1)};
  }();
  return sys;
}

SprtBatchSpec spec(int n) {
  SprtBatchSpec s;
  s.thresholds = {std::log(19.0), std::log(19.0)};
  s.n_traj = n;
  s.seed = 3;
  return s;
}

void BM_SprtSerial(benchmark::State& state) {
  const SprtBatchSpec s = spec(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(run_sprt_batch_serial(damping_systems(), s));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_SprtParallel(benchmark::State& state) {
  const SprtBatchSpec s = spec(static_cast<int>(state.range(0)));
  const int threads = std::max(2, omp_get_max_threads());
  for (auto _ : state) benchmark::DoNotOptimize(run_sprt_batch_parallel(damping_systems(), s, threads));
  state.SetItemsProcessed(state.iterations() * state.range(0));
  state.counters["threads"] = threads;
}

void BM_FixedSerial(benchmark::State& state) {
  const std::vector<double> times{0.1, 0.2, 0.3};
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state)
    benchmark::DoNotOptimize(run_fixed_ensemble_serial(damping_systems(), times, n, 1e-4, 5, InitPolicy::SteadyState));
  state.SetItemsProcessed(state.iterations() * n);
}

void BM_FixedParallel(benchmark::State& state) {
  const std::vector<double> times{0.1, 0.2, 0.3};
  const int n = static_cast<int>(state.range(0));
  const int threads = std::max(2, omp_get_max_threads());
  for (auto _ : state)
    benchmark::DoNotOptimize(
        run_fixed_ensemble_parallel(damping_systems(), times, n, 1e-4, 5, InitPolicy::SteadyState, threads));
  state.SetItemsProcessed(state.iterations() * n);
  state.counters["threads"] = threads;
}

}  // namespace

BENCHMARK(BM_SprtSerial)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SprtParallel)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_FixedSerial)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_FixedParallel)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
