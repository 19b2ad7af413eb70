#include <benchmark/benchmark.h>

#include <cmath>

#include "upsq/chain_model.hpp"
#include "upsq/homodyne.hpp"
#include "upsq/spectrum_fit.hpp"

using namespace upsq;

namespace {

const ChainModel kModel = ChainModel::make(0.73, 60e6, 40e6, 0.77);

void BM_EvaluateSpectrum(benchmark::State& state) {
  double f = 1e6;
  for (auto _ : state) {
    benchmark::DoNotOptimize(evaluate_spectrum(kModel, f));
    f = f < 50e6 ? f + 1e3 : 1e6;
  }
}
BENCHMARK(BM_EvaluateSpectrum);

void BM_SpectrumTrace(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(spectrum_trace(kModel, 1e6, 50e6, n));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SpectrumTrace)->Arg(500)->Arg(5000);

void BM_FitSpectrum(benchmark::State& state) {
  const auto truth = spectrum_trace(kModel, 1e6, 50e6, static_cast<std::size_t>(state.range(0)));
  const auto init = ChainModel::make(0.8, 50e6, 45e6, 0.7);
  for (auto _ : state) benchmark::DoNotOptimize(fit_spectrum(truth.squeezed, truth.antisqueezed, init));
}
BENCHMARK(BM_FitSpectrum)->Arg(100)->Arg(500)->Unit(benchmark::kMillisecond);

void BM_SampleQuadratures(benchmark::State& state) {
  HomodyneRun run{QuadraturePair::from_db(-5.55, 17.94), LinearRamp::spanning(0.0, 3.14159), 1'000'000, 42};
  const auto threads = static_cast<unsigned>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(sample_quadratures(run, threads));
  state.SetItemsProcessed(state.iterations() * 1'000'000);
}
BENCHMARK(BM_SampleQuadratures)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();

}  // namespace

BENCHMARK_MAIN();
