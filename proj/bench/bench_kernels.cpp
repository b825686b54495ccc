#include <benchmark/benchmark.h>

#include "ptlab/ptnorm.hpp"
#include "ptlab/spectra.hpp"

using namespace ptlab;

namespace {

// Arg(0): parallel, Arg(1): serial reference.
void BM_SpectrumScan(benchmark::State& state) {
  const bool serial = state.range(0) == 1;
  for (auto _ : state) {
    auto rows = serial ? spectrum_scan_serial(2.0, 3.0, 0.125, 4) : spectrum_scan(2.0, 3.0, 0.125, 4);
    benchmark::DoNotOptimize(rows);
  }
  state.SetLabel(serial ? "serial" : "parallel");
}
BENCHMARK(BM_SpectrumScan)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

const SpectralBasis& basis() {
  static const SpectralBasis b = build_basis(3.0, 8, basis_config(8));
  return b;
}

void BM_BuildCKernel(benchmark::State& state) {
  const bool serial = state.range(0) == 1;
  const SpectralBasis& b = basis();
  for (auto _ : state) {
    auto k = serial ? build_c_kernel_serial(b.pairs, b.contour) : build_c_kernel(b.pairs, b.contour);
    benchmark::DoNotOptimize(k);
  }
  state.SetLabel(serial ? "serial" : "parallel");
}
BENCHMARK(BM_BuildCKernel)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_ApplyKernel(benchmark::State& state) {
  const bool serial = state.range(0) == 1;
  const SpectralBasis& b = basis();
  const SampledKernel k = build_c_kernel(b.pairs, b.contour);
  const Sampled f = sample([](cplx x) { return std::exp(-x * x); }, b.contour);
  for (auto _ : state) {
    auto out = serial ? apply_kernel_serial(k, f, b.contour) : apply_kernel(k, f, b.contour);
    benchmark::DoNotOptimize(out);
  }
  state.SetLabel(serial ? "serial" : "parallel");
}
BENCHMARK(BM_ApplyKernel)->Arg(0)->Arg(1)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
