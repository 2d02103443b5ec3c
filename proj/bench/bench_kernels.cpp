#include <benchmark/benchmark.h>

#include "randlyap/chain.hpp"
#include "randlyap/circle_map.hpp"
#include "randlyap/lyapunov.hpp"
#include "randlyap/regions.hpp"

using namespace randlyap;

namespace {

Exec exec_of(const benchmark::State& st) { return st.range(0) ? Exec::parallel : Exec::serial; }

void BM_LyapunovNorm(benchmark::State& st) {
  CircleMap map(Fourier::sine(), 10.0, 0.0);
  NoiseModel noise{0.01, 1, 0};
  for (auto _ : st) {
    auto e = estimate_le_norm(map, noise, {0.1, 0.2}, 20000, {16, 25, exec_of(st)});
    benchmark::DoNotOptimize(e.lambda_hat);
  }
}

void BM_ProjectiveMeasure(benchmark::State& st) {
  CircleMap map(Fourier::sine(), 10.0, 0.0);
  NoiseModel noise{0.01, 1, 0};
  for (auto _ : st) {
    auto m = empirical_proj_measure(map, noise, {{0.1, 0.2}, 0.3}, 1000, 400000, {32, 32, 32, 64}, exec_of(st));
    benchmark::DoNotOptimize(m.total());
  }
}

void BM_Stationarity(benchmark::State& st) {
  CircleMap map(Fourier::sine(), 10.0, 0.0);
  NoiseModel noise{0.01, 1, 0};
  for (auto _ : st) {
    auto r = stationarity_test(map, noise, 400000, {32, 32}, 2, exec_of(st));
    benchmark::DoNotOptimize(r.chi2);
  }
}

void BM_WordLemmas(benchmark::State& st) {
  CircleMap map(Fourier::sine(), 10000.0, 0.0);
  CriticalData crit = find_critical_sets(map);
  RegionParams params{0.01, 0.125, 0.5, GNVersion::thm2};
  for (auto _ : st) {
    auto r = verify_word_lemmas(map, crit, params, WordCase::f, 20000, 1, exec_of(st));
    benchmark::DoNotOptimize(r.tested);
  }
}

void BM_GNComplement(benchmark::State& st) {
  CircleMap map(Fourier::sine(), 100.0, 0.25);
  CriticalData crit = find_critical_sets(map);
  RegionParams params{0.05, 0.125, 0.5, GNVersion::thm2};
  for (auto _ : st) {
    double f = gn_complement_fraction(map, crit, params, 0.001, 8, 200000, 1, exec_of(st));
    benchmark::DoNotOptimize(f);
  }
}

}  // namespace

BENCHMARK(BM_LyapunovNorm)->Arg(0)->Arg(1)->ArgName("parallel")->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_ProjectiveMeasure)->Arg(0)->Arg(1)->ArgName("parallel")->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_Stationarity)->Arg(0)->Arg(1)->ArgName("parallel")->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_WordLemmas)->Arg(0)->Arg(1)->ArgName("parallel")->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_GNComplement)->Arg(0)->Arg(1)->ArgName("parallel")->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
