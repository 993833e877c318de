// OpenMP kernels against the serial reference, on sizes the pipeline sees.
#include <benchmark/benchmark.h>

#include <random>

#include "mexpr/kernels.hpp"

using namespace mexpr;

namespace {

RasterImage noise(int w, int h, int channels, unsigned seed) {
  RasterImage img(w, h, channels, 0);
  std::mt19937 rng(seed);
  for (auto& v : img.pixels()) v = static_cast<std::uint8_t>(rng());
  return img;
}

// Arg(0): source side resized up to 512 (the extract direction).
template <auto Resize>
void BM_Resize(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  const RasterImage src = noise(side, side, 3, 1);
  RasterImage dst(512, 512, 3, 0);
  for (auto _ : state) {
    Resize(view(src), mutable_view(dst));
    benchmark::DoNotOptimize(dst.pixels().data());
  }
  state.SetItemsProcessed(state.iterations() * 512 * 512);
}

// Arg(0): feather width.
template <auto Paste>
void BM_Paste(benchmark::State& state) {
  const RasterImage face = noise(512, 512, 3, 2);
  RasterImage panel = noise(512, 512, 3, 3);
  for (auto _ : state) {
    Paste(view(face), mutable_view(panel), static_cast<int>(state.range(0)));
    benchmark::DoNotOptimize(panel.pixels().data());
  }
  state.SetItemsProcessed(state.iterations() * 512 * 512);
}

template <auto Diff>
void BM_AbsDiff(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  const RasterImage a = noise(side, side, 3, 4), b = noise(side, side, 3, 5);
  for (auto _ : state) benchmark::DoNotOptimize(Diff(view(a), view(b)));
  state.SetItemsProcessed(state.iterations() * side * side);
}

}  // namespace

BENCHMARK(BM_Resize<kernels::resize_bilinear>)->Arg(64)->Arg(300)->Arg(1024);
BENCHMARK(BM_Resize<reference::resize_bilinear>)->Arg(64)->Arg(300)->Arg(1024);
BENCHMARK(BM_Paste<kernels::paste>)->Arg(0)->Arg(8);
BENCHMARK(BM_Paste<reference::paste>)->Arg(0)->Arg(8);
BENCHMARK(BM_AbsDiff<kernels::abs_diff_sum>)->Arg(512)->Arg(2048);
BENCHMARK(BM_AbsDiff<reference::abs_diff_sum>)->Arg(512)->Arg(2048);

BENCHMARK_MAIN();
