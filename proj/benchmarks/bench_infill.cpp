#include <benchmark/benchmark.h>

#include <homi/infill.h>

namespace {

void BM_Infill(benchmark::State& state) {
  const homi::Skeleton skel = homi::Skeleton::preset(state.range(1) == 0 ? "toy9" : "paper55");
  const homi::InfillModel model(homi::InfillSpec::for_skeleton(skel, 1));
  Eigen::VectorXd first = Eigen::VectorXd::Zero(skel.motion_rows());
  for (int j = 0; j < skel.joint_count(); ++j) {
    first.segment<6>(6 * j) << 1, 0, 0, 0, 1, 0;
  }
  Eigen::VectorXd last = first;
  last.tail<3>() << 1.0, 0.5, 0.0;
  const homi::TemporalCoordinates tau = homi::make_tau(homi::TauKind::kUniform, static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(homi::infill(model, first, last, tau));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Infill)->Args({64, 0})->Args({512, 0})->Args({64, 1});

} // namespace

BENCHMARK_MAIN();
