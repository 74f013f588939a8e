#pragma once

#include <cmath>
#include <vector>

#include <Eigen/Core>

#include <homi/geom.h>
#include <homi/motion.h>
#include <homi/rng.h>
#include <homi/skeleton.h>

namespace homi::test {

/// Chain of `bones` unit bones along +x. All required tags sit on the root
/// with zero offsets; `generic` holds extra generic markers per joint.
inline Skeleton chain_skeleton(int bones, const std::vector<std::pair<int, Vec3>>& generic = {}) {
  std::vector<std::string> names;
  std::vector<int> parents;
  std::vector<Vec3> offsets;
  for (int j = 0; j <= bones; ++j) {
    names.push_back("j" + std::to_string(j));
    parents.push_back(j - 1);
    offsets.push_back(j == 0 ? Vec3::Zero() : Vec3(1, 0, 0));
  }
  std::vector<Marker> markers;
  for (MarkerTag tag :
       {MarkerTag::kPalm, MarkerTag::kTip1, MarkerTag::kTip2, MarkerTag::kTip3, MarkerTag::kTip4, MarkerTag::kTip5}) {
    markers.push_back({0, Vec3::Zero(), tag});
  }
  for (int k = 0; k < 8; ++k) {
    markers.push_back({0, Vec3::Zero(), MarkerTag::kFoot});
  }
  for (const auto& [joint, offset] : generic) {
    markers.push_back({joint, offset, MarkerTag::kGeneric});
  }
  return Skeleton("chain", names, parents, offsets, markers);
}

/// Random rotation of bounded angle, for poses that stay well inside the
/// valid 6D domain.
inline Mat3 small_rotation(Rng& rng, double max_angle) {
  Vec3 axis(normal(rng), normal(rng), normal(rng));
  axis.normalize();
  return axis_angle(axis, uniform(rng, -max_angle, max_angle));
}

/// Pose vector (6J) of random joint rotations.
inline Eigen::VectorXd random_pose(int joints, Rng& rng, double max_angle = 1.0) {
  Eigen::VectorXd p(6 * joints);
  for (int j = 0; j < joints; ++j) {
    p.segment<6>(6 * j) = matrix_to_rot6d(small_rotation(rng, max_angle));
  }
  return p;
}

/// Motion column [pose; root].
inline Eigen::VectorXd random_frame(int joints, Rng& rng, double max_angle = 1.0) {
  Eigen::VectorXd f(6 * joints + 3);
  f << random_pose(joints, rng, max_angle), uniform(rng, -1, 1), uniform(rng, -1, 1), uniform(rng, 0.5, 1.5);
  return f;
}

/// Motion of `frames` copies of one frame.
inline MotionImage constant_motion(const Skeleton& skel, const Eigen::VectorXd& frame, int frames, double fps = 30.0) {
  MotionImage m(skel.name(), skel.joint_count(), frames, fps);
  for (int n = 0; n < frames; ++n) {
    m.data.col(n) = frame;
  }
  return m;
}

inline Eigen::VectorXd identity_frame(int joints, const Vec3& root = Vec3::Zero()) {
  Eigen::VectorXd f(6 * joints + 3);
  for (int j = 0; j < joints; ++j) {
    f.segment<6>(6 * j) << 1, 0, 0, 0, 1, 0;
  }
  f.tail<3>() = root;
  return f;
}

inline Mat3 rot_z(double angle) {
  return axis_angle(Vec3::UnitZ(), angle);
}

} // namespace homi::test
