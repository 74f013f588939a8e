#include <benchmark/benchmark.h>

#include <homi/motion.h>

namespace {

void BM_ForwardKinematics(benchmark::State& state) {
  const homi::Skeleton skel = homi::Skeleton::preset(state.range(0) == 0 ? "toy9" : "paper55");
  homi::Rng rng = homi::make_rng(3);
  Eigen::VectorXd pose(6 * skel.joint_count());
  for (int j = 0; j < skel.joint_count(); ++j) {
    pose.segment<6>(6 * j) = homi::matrix_to_rot6d(homi::random_rotation(rng));
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(homi::forward_kinematics(skel, pose, homi::Vec3::Zero()));
  }
}
BENCHMARK(BM_ForwardKinematics)->Arg(0)->Arg(1);

} // namespace

BENCHMARK_MAIN();
