#pragma once

#include <vector>

#include <homi/geom.h>
#include <homi/metrics.h>
#include <homi/motion.h>
#include <homi/objmotion.h>
#include <homi/shape.h>

namespace homi::test {

/// A box held by six hand markers that sit on its faces, carried along a
/// path while turning `angle` rad about a tilted axis. The hand follows the
/// box exactly, so the generating trajectory is the ground truth.
struct RotatingGrasp {
  Primitive box = Primitive::box(Vec3(0.04, 0.03, 0.06));
  std::vector<Vec3> local;
  ObjectMotion truth;
  PointSequence hand;
  GraspFrame grasp;
};

inline RotatingGrasp rotating_grasp(int frames = 40, double angle = 1.2) {
  RotatingGrasp g;
  // Palm on the -y face, fingertips on the +y face and the x sides.
  g.local = {
      Vec3(0.00, -0.03, 0.01),
      Vec3(0.02, 0.03, 0.03),
      Vec3(-0.01, 0.03, 0.04),
      Vec3(0.04, 0.00, 0.02),
      Vec3(-0.04, 0.01, -0.02),
      Vec3(0.01, 0.03, -0.03),
  };
  const Vec3 axis = Vec3(0.3, -0.5, 1.0).normalized();
  const Mat3 r0 = axis_angle(Vec3::UnitX(), 0.4);
  const Vec3 t0(0.45, -0.1, 0.9);
  g.truth.name = "box";
  g.hand = PointSequence(6, frames);
  for (int n = 0; n < frames; ++n) {
    const double u = static_cast<double>(n) / (frames - 1);
    ObjectPose pose;
    pose.rot = axis_angle(axis, angle * u) * r0;
    pose.t = t0 + Vec3(0.1 * u, 0.25 * u, 0.3 * u * u);
    g.truth.poses.push_back(pose);
    for (int i = 0; i < 6; ++i) {
      g.hand.set(i, n, pose.to_world(g.local[static_cast<size_t>(i)]));
    }
  }
  for (int i = 0; i < 6; ++i) {
    g.grasp.v_f[static_cast<size_t>(i)] = g.hand.at(i, 0);
  }
  g.grasp.object_pose_1 = g.truth.poses.front();
  return g;
}

} // namespace homi::test
