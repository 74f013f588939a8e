#include <benchmark/benchmark.h>

#include <homi/shape.h>

namespace {

homi::ObjectCloud cloud(int n) {
  homi::Rng rng = homi::make_rng(2);
  return homi::sample_surface(homi::Primitive::box(homi::Vec3(0.04, 0.05, 0.06)), "box", n, rng);
}

void BM_BpsEncode(benchmark::State& state) {
  const homi::BasisPointSet basis = homi::sample_basis(1);
  const homi::ObjectCloud c = cloud(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(homi::bps_encode(c, basis));
  }
}
BENCHMARK(BM_BpsEncode)->Arg(1000)->Arg(10000);

void BM_BpsEncodeBrute(benchmark::State& state) {
  const homi::BasisPointSet basis = homi::sample_basis(1);
  const homi::ObjectCloud c = cloud(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(homi::bps_encode_brute(c, basis));
  }
}
BENCHMARK(BM_BpsEncodeBrute)->Arg(1000)->Arg(10000);

} // namespace

BENCHMARK_MAIN();
