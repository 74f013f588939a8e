#include <vector>

#include <benchmark/benchmark.h>

#include <homi/geom.h>

namespace {

void BM_Kabsch(benchmark::State& state) {
  const auto n = static_cast<size_t>(state.range(0));
  homi::Rng rng = homi::make_rng(1);
  const homi::Mat3 r = homi::random_rotation(rng);
  std::vector<homi::Vec3> src(n);
  std::vector<homi::Vec3> dst(n);
  for (size_t i = 0; i < n; ++i) {
    src[i] = homi::Vec3(homi::normal(rng), homi::normal(rng), homi::normal(rng));
    dst[i] = r * src[i];
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(homi::kabsch(src, dst));
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_Kabsch)->Arg(5)->Arg(100)->Arg(10000);

} // namespace

BENCHMARK_MAIN();
