#include <benchmark/benchmark.h>

#include <cmath>
#include <map>
#include <numbers>

#include "lle/bloch.hpp"
#include "lle/dense_eigen.hpp"
#include "lle/evolution.hpp"
#include "lle/fft.hpp"
#include "lle/spectral.hpp"
#include "lle/waves.hpp"

namespace {

using namespace lle;

const WaveProfile& wave(std::size_t n) {
  static std::map<std::size_t, WaveProfile> cache;
  auto it = cache.find(n);
  if (it == cache.end()) {
    WaveParameters p;
    p.period = 2 * std::numbers::pi;
    it = cache.emplace(n, construct_wave(p, n, {0.6, 0.3, 1.0})).first;
  }
  return it->second;
}

void BM_Fft(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  CVec x(n, cd(1.0, 0.5));
  for (auto _ : state) benchmark::DoNotOptimize(fft_forward(x));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Fft)->RangeMultiplier(4)->Range(256, 65536)->Complexity(benchmark::oNLogN);

void BM_CoupledStep(benchmark::State& state) {
  const auto m = static_cast<std::size_t>(state.range(0));
  const WaveProfile& w = wave(128);
  ToothPerturbation tp;
  tp.knocked_out_cells = {m / 2};
  tp.smoothing_width = 0.5;
  tp.depth = 0.05;
  CoupledIntegrator integ(w.params, initial_state(w, make_tooth_data(w, tp, m), 0.01), {0.01});
  for (auto _ : state) integ.step();
  state.SetItemsProcessed(state.iterations() * static_cast<long>(m * 128));
}
BENCHMARK(BM_CoupledStep)->Arg(8)->Arg(64)->Unit(benchmark::kMicrosecond);

void BM_BlochAssemble(benchmark::State& state) {
  const WaveProfile& w = wave(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(assemble_bloch(w, 0.1));
}
BENCHMARK(BM_BlochAssemble)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_BlochEigen(benchmark::State& state) {
  const WaveProfile& w = wave(static_cast<std::size_t>(state.range(0)));
  const auto m = assemble_bloch(w, 0.1);
  for (auto _ : state) benchmark::DoNotOptimize(eigen_decompose(m.matrix, false));
}
BENCHMARK(BM_BlochEigen)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_Compose(benchmark::State& state) {
  const WaveProfile& w = wave(128);
  const PeriodicGrid full = w.grid().with_cells(16);
  ScalarField shift(full);
  for (std::size_t i = 0; i < full.num_points(); ++i) shift[i] = 0.1 * std::sin(full.x(i) / 16);
  const auto method = state.range(0) == 0 ? EvaluationMethod::Exact : EvaluationMethod::Local;
  for (auto _ : state) benchmark::DoNotOptimize(compose(w.profile, full, shift, 0.0, method));
}
BENCHMARK(BM_Compose)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
