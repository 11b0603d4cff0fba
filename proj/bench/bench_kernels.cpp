#include <benchmark/benchmark.h>

#include "ghostscope/bame.hpp"
#include "ghostscope/rfsim.hpp"

using namespace ghostscope;

namespace {

// Small enough that the literal reference sums finish in a few seconds.
RadarConfig small_radar() {
  RadarConfig r;
  r.n_tx = 4;
  r.n_rx = 4;
  r.n_samples = 64;
  return r;
}

const AngleGrid kSmallGrid{0.0, 2.0, 90};

RadarCube make_cube(const RadarConfig& r) {
  const PathComponent p[2] = {{1.2, 60.0, 60.0, 1.0}, {1.7, 40.0, 110.0, 0.25}};
  return rfsim::synthesize_cube(p, r, 1);
}

void BM_RangeFft(benchmark::State& st) {
  const auto cube = make_cube(RadarConfig{});
  for (auto _ : st) benchmark::DoNotOptimize(bame::range_fft(cube));
}

void BM_RangeDftReference(benchmark::State& st) {
  const auto cube = make_cube(small_radar());
  for (auto _ : st) benchmark::DoNotOptimize(bame::reference::range_dft(cube));
}

void BM_RangeFftSmall(benchmark::State& st) {
  const auto cube = make_cube(small_radar());
  for (auto _ : st) benchmark::DoNotOptimize(bame::range_fft(cube));
}

void BM_BiAngular(benchmark::State& st) {
  const auto spec = bame::range_fft(make_cube(RadarConfig{}));
  for (auto _ : st) benchmark::DoNotOptimize(bame::bi_angular_cube(spec));
}

void BM_BiAngularSmall(benchmark::State& st) {
  const auto spec = bame::range_fft(make_cube(small_radar()));
  for (auto _ : st) benchmark::DoNotOptimize(bame::bi_angular_cube(spec, kSmallGrid));
}

void BM_BiAngularReference(benchmark::State& st) {
  const auto spec = bame::range_fft(make_cube(small_radar()));
  for (auto _ : st) benchmark::DoNotOptimize(bame::reference::bi_angular_cube(spec, kSmallGrid));
}

void BM_VirtualArray(benchmark::State& st) {
  const auto spec = bame::range_fft(make_cube(RadarConfig{}));
  for (auto _ : st) benchmark::DoNotOptimize(bame::virtual_array_map(spec));
}

void BM_VirtualArraySmall(benchmark::State& st) {
  const auto spec = bame::range_fft(make_cube(small_radar()));
  for (auto _ : st) benchmark::DoNotOptimize(bame::virtual_array_map(spec, kSmallGrid));
}

void BM_VirtualArrayReference(benchmark::State& st) {
  const auto spec = bame::range_fft(make_cube(small_radar()));
  for (auto _ : st) benchmark::DoNotOptimize(bame::reference::virtual_array_map(spec, kSmallGrid));
}

void BM_Cfar3d(benchmark::State& st) {
  const auto cube = bame::bi_angular_cube(bame::range_fft(make_cube(RadarConfig{})));
  for (auto _ : st) benchmark::DoNotOptimize(bame::cfar_3d_scan(cube, {}));
}

void BM_Cfar3dSmall(benchmark::State& st) {
  const auto cube = bame::bi_angular_cube(bame::range_fft(make_cube(small_radar())), kSmallGrid);
  for (auto _ : st) benchmark::DoNotOptimize(bame::cfar_3d_scan(cube, {}));
}

void BM_Cfar3dReference(benchmark::State& st) {
  const auto cube = bame::bi_angular_cube(bame::range_fft(make_cube(small_radar())), kSmallGrid);
  for (auto _ : st) benchmark::DoNotOptimize(bame::reference::cfar_3d_exceedances(cube, {}));
}

}  // namespace

BENCHMARK(BM_RangeFft)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RangeFftSmall)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_RangeDftReference)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_BiAngular)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BiAngularSmall)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BiAngularReference)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_VirtualArray)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_VirtualArraySmall)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_VirtualArrayReference)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Cfar3d)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Cfar3dSmall)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Cfar3dReference)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
