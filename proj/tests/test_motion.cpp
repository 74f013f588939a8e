#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include <homi/error.h>
#include <homi/infill.h>
#include <homi/motion.h>
#include <homi/synth.h>

#include "support.h"

namespace homi {
namespace {

TEST(ForwardKinematics, IdentityPoseAccumulatesOffsets) {
  const Skeleton skel = Skeleton::preset("toy9");
  const Eigen::VectorXd f = test::identity_frame(skel.joint_count());
  const PoseState st = forward_kinematics(skel, f.head(6 * skel.joint_count()), Vec3::Zero());
  for (int j = 0; j < skel.joint_count(); ++j) {
    Vec3 expect = Vec3::Zero();
    for (int k = j; k > 0; k = skel.parents()[k]) {
      expect += skel.offsets()[k];
    }
    EXPECT_LT((st.position[j] - expect).norm(), 1e-15) << skel.joint_names()[j];
  }
}

TEST(ForwardKinematics, TranslationEquivariance) {
  Rng rng = make_rng(2);
  for (const char* name : {"toy9", "paper55"}) {
    const Skeleton skel = Skeleton::preset(name);
    for (int trial = 0; trial < 20; ++trial) {
      const Eigen::VectorXd pose = test::random_pose(skel.joint_count(), rng);
      const Vec3 root(normal(rng), normal(rng), normal(rng));
      const Vec3 d(normal(rng), normal(rng), normal(rng));
      const PoseState a = forward_kinematics(skel, pose, root);
      const PoseState b = forward_kinematics(skel, pose, root + d);
      for (int j = 0; j < skel.joint_count(); ++j) {
        EXPECT_LT((b.position[j] - a.position[j] - d).norm(), 1e-9);
      }
    }
  }
}

TEST(ForwardKinematics, RotationEquivarianceAboutRoot) {
  Rng rng = make_rng(3);
  const Skeleton skel = Skeleton::preset("paper55");
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::VectorXd pose = test::random_pose(skel.joint_count(), rng);
    const Vec3 root(normal(rng), normal(rng), normal(rng));
    const Mat3 r = random_rotation(rng);
    Eigen::VectorXd rotated = pose;
    rotated.head<6>() = matrix_to_rot6d(r * rot6d_to_matrix(Vec6(pose.head<6>())));
    const auto a = markers(skel, pose, root);
    const auto b = markers(skel, rotated, root);
    ASSERT_EQ(a.size(), b.size());
    for (size_t m = 0; m < a.size(); ++m) {
      EXPECT_LT((b[m].position - (root + r * (a[m].position - root))).norm(), 1e-9);
    }
  }
}

TEST(ForwardKinematics, TwoBoneChainQuarterTurn) {
  const Skeleton skel = test::chain_skeleton(2);
  Eigen::VectorXd pose = test::identity_frame(3).head(18);
  pose.head<6>() = matrix_to_rot6d(test::rot_z(std::numbers::pi / 2));
  const PoseState st = forward_kinematics(skel, pose, Vec3::Zero());
  EXPECT_LT((st.position[2] - Vec3(0, 2, 0)).norm(), 1e-15);
}

TEST(Markers, ZeroOffsetsCoincideWithJoints) {
  const Skeleton skel = test::chain_skeleton(2, {{1, Vec3::Zero()}, {2, Vec3::Zero()}});
  Rng rng = make_rng(4);
  const Eigen::VectorXd pose = test::random_pose(3, rng);
  const PoseState st = forward_kinematics(skel, pose, Vec3(1, 2, 3));
  const auto& ids = skel.generic_marker_ids();
  ASSERT_EQ(ids.size(), 2u);
  EXPECT_EQ(marker_position(skel, st, ids[0]), st.position[1]);
  EXPECT_EQ(marker_position(skel, st, ids[1]), st.position[2]);
}

TEST(Markers, Paper55Counts) {
  const Skeleton skel = Skeleton::preset("paper55");
  EXPECT_EQ(skel.joint_count(), 55);
  EXPECT_EQ(skel.generic_marker_ids().size(), 99u);
  EXPECT_EQ(skel.foot_marker_ids().size(), 8u);
  const Eigen::VectorXd f = test::identity_frame(55);
  const auto all = markers(skel, f.head(330), Vec3::Zero());
  EXPECT_EQ(all.size(), 99u + 6u + 8u);
  int hand = 0;
  for (const auto& m : all) {
    hand += m.tag != MarkerTag::kGeneric && m.tag != MarkerTag::kFoot;
  }
  EXPECT_EQ(hand, 6);
}

TEST(Markers, MotionImageShape) {
  const Skeleton skel = Skeleton::preset("paper55");
  const MotionImage m(skel.name(), skel.joint_count(), 64, 30.0);
  EXPECT_EQ(m.data.rows(), 333);
  EXPECT_EQ(m.data.cols(), 64);
}

TEST(RootLerp, Examples) {
  const Vec3 a(0, 0, 0);
  const Vec3 b(2, 0, 0);
  const Eigen::Matrix3Xd two = root_lerp(a, b, TemporalCoordinates{{0.0, 1.0}});
  EXPECT_EQ(Vec3(two.col(0)), a);
  EXPECT_EQ(Vec3(two.col(1)), b);
  const Eigen::Matrix3Xd three = root_lerp(a, b, TemporalCoordinates{{0.0, 0.5, 1.0}});
  EXPECT_EQ(Vec3(three.col(1)), Vec3(1, 0, 0));
  EXPECT_THROW(root_lerp(a, b, TemporalCoordinates{}), Error);
}

TEST(RootLerp, GeometricTauGivesGeometricSteps) {
  const TemporalCoordinates tau = make_tau(TauKind::kGeometric, 20, 0.8);
  const Vec3 a(0.5, -1, 0.2);
  const Vec3 b(2.5, 1, 0.7);
  const Eigen::Matrix3Xd t = root_lerp(a, b, tau);
  for (int k = 1; k + 1 < tau.size(); ++k) {
    const double prev = (t.col(k) - t.col(k - 1)).norm();
    const double next = (t.col(k + 1) - t.col(k)).norm();
    EXPECT_NEAR(next / prev, 0.8, 1e-9);
  }
}

PointSequence foot_sequence(const std::vector<Vec3>& base, int frames, const Vec3& velocity) {
  PointSequence s(static_cast<int>(base.size()), frames);
  for (int n = 0; n < frames; ++n) {
    for (int k = 0; k < s.points(); ++k) {
      s.set(k, n, base[static_cast<size_t>(k)] + n * velocity);
    }
  }
  return s;
}

TEST(ContactLabels, StaticOnGroundAndRaised) {
  std::vector<Vec3> ground;
  std::vector<Vec3> raised;
  for (int k = 0; k < 8; ++k) {
    ground.emplace_back(0.1 * k, 0.0, 0.01);
    raised.emplace_back(0.1 * k, 0.0, 1.01);
  }
  EXPECT_TRUE(contact_labels(foot_sequence(ground, 10, Vec3::Zero()), 30.0).c.all());
  EXPECT_FALSE(contact_labels(foot_sequence(raised, 10, Vec3::Zero()), 30.0).c.any());
  // Sliding at 0.3 m/s is too fast for contact.
  EXPECT_FALSE(contact_labels(foot_sequence(ground, 10, Vec3(0.01, 0, 0)), 30.0).c.any());
}

TEST(ContactLabels, WalkMatchesGeneratorStance) {
  const Skeleton skel = Skeleton::preset("toy9");
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const LabeledClip clip = gen_clip(skel, Scenario::sample(ScenarioKind::kWalkCycle, seed));
    const ContactLabels c = contact_labels(marker_sequence(skel, clip.motion, skel.foot_marker_ids()), clip.motion.fps);
    ASSERT_EQ(c.c.rows(), clip.stance.rows());
    ASSERT_EQ(c.c.cols(), clip.stance.cols());
    const double agree = (c.c == clip.stance).cast<double>().mean();
    EXPECT_GE(agree, 0.95) << "seed " << seed;
    // Alternating stance: each foot is both planted and lifted at times.
    EXPECT_TRUE(clip.stance.row(0).any());
    EXPECT_FALSE(clip.stance.row(0).all());
  }
}

TEST(ContactLabels, InvariantToHorizontalTranslation) {
  const Skeleton skel = Skeleton::preset("toy9");
  const LabeledClip clip = gen_clip(skel, Scenario::sample(ScenarioKind::kWalkCycle, 9));
  MotionImage shifted = clip.motion;
  for (int n = 0; n < shifted.frames(); ++n) {
    shifted.set_root(n, shifted.root(n) + Vec3(3.7, -12.25, 0.0));
  }
  const auto a = contact_labels(marker_sequence(skel, clip.motion, skel.foot_marker_ids()), 30.0);
  const auto b = contact_labels(marker_sequence(skel, shifted, skel.foot_marker_ids()), 30.0);
  EXPECT_TRUE((a.c == b.c).all());
}

class BlendTest : public ::testing::Test {
 protected:
  Skeleton skel = Skeleton::preset("toy9");
  Rng rng = make_rng(7);
};

TEST_F(BlendTest, FixedPointWhenEndpointsAgree) {
  const Eigen::VectorXd f = test::random_frame(skel.joint_count(), rng);
  const MotionImage m = test::constant_motion(skel, f, 20);
  const MotionImage out = blend_endpoints(m, f, f, 5);
  EXPECT_LT((out.data - m.data).cwiseAbs().maxCoeff(), 1e-12);
}

TEST_F(BlendTest, WindowOneReplacesOnlyEndpoints) {
  MotionImage m(skel.name(), skel.joint_count(), 12, 30.0);
  for (int n = 0; n < 12; ++n) {
    m.data.col(n) = test::random_frame(skel.joint_count(), rng);
  }
  const Eigen::VectorXd a = test::random_frame(skel.joint_count(), rng);
  const Eigen::VectorXd b = test::random_frame(skel.joint_count(), rng);
  const MotionImage out = blend_endpoints(m, a, b, 1);
  EXPECT_EQ(out.data.col(0), a);
  EXPECT_EQ(out.data.col(11), b);
  EXPECT_EQ(out.data.middleCols(1, 10), m.data.middleCols(1, 10));
}

TEST_F(BlendTest, EasedFramesFollowTheGeodesic) {
  const int J = skel.joint_count();
  const Eigen::VectorXd net = test::random_frame(J, rng);
  const Eigen::VectorXd first = test::random_frame(J, rng);
  const Eigen::VectorXd last = test::random_frame(J, rng);
  const MotionImage m = test::constant_motion(skel, net, 30);
  const int w = 5;
  const MotionImage out = blend_endpoints(m, first, last, w);
  EXPECT_EQ(out.data.col(0), first);
  EXPECT_EQ(out.data.col(29), last);
  for (int i = 1; i < w; ++i) {
    const double u = static_cast<double>(i) / w;
    for (int j = 0; j < J; ++j) {
      // Eigen's own slerp as the oracle.
      const Quat qa(rot6d_to_matrix(Vec6(first.segment<6>(6 * j))));
      const Quat qb(rot6d_to_matrix(Vec6(net.segment<6>(6 * j))));
      const Mat3 expect = qa.slerp(u, qb).toRotationMatrix();
      EXPECT_LT((rot6d_to_matrix(out.rot6(j, i)) - expect).norm(), 1e-9);
    }
    EXPECT_LT((out.root(i) - ((1 - u) * first.tail<3>() + u * net.tail<3>())).norm(), 1e-12);
  }
  for (int n = w; n < 30 - w; ++n) {
    EXPECT_EQ(out.data.col(n), m.data.col(n));
  }
}

TEST_F(BlendTest, Idempotent) {
  MotionImage m(skel.name(), skel.joint_count(), 16, 30.0);
  for (int n = 0; n < 16; ++n) {
    m.data.col(n) = test::random_frame(skel.joint_count(), rng);
  }
  const Eigen::VectorXd a = test::random_frame(skel.joint_count(), rng);
  const Eigen::VectorXd b = test::random_frame(skel.joint_count(), rng);
  const MotionImage once = blend_endpoints(m, a, b, 5);
  const MotionImage twice = blend_endpoints(once, a, b, 5);
  EXPECT_LT((once.data - twice.data).cwiseAbs().maxCoeff(), 1e-12);
}

TEST_F(BlendTest, WindowTooLarge) {
  const Eigen::VectorXd f = test::identity_frame(skel.joint_count());
  const MotionImage m = test::constant_motion(skel, f, 10);
  try {
    blend_endpoints(m, f, f, 5);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kWindowTooLarge);
  }
}

TEST(MotionImageValidate, RejectsDegenerateColumns) {
  const Skeleton skel = Skeleton::preset("toy9");
  MotionImage m = test::constant_motion(skel, test::identity_frame(skel.joint_count()), 4);
  EXPECT_NO_THROW(m.validate());
  m.data.block<6, 1>(0, 2).setZero();
  EXPECT_THROW(m.validate(), Error);
}

} // namespace
} // namespace homi
