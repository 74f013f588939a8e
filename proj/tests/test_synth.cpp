#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include <homi/error.h>
#include <homi/metrics.h>
#include <homi/synth.h>

namespace homi {
namespace {

template <typename F>
void expect_code(ErrorCode code, F&& f) {
  try {
    f();
    FAIL() << "no throw";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), code);
  }
}

class SynthTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    skel_ = new Skeleton(Skeleton::preset("toy9"));
    clips_ = new std::vector<LabeledClip>(gen_dataset(*skel_, 12, 5));
  }
  static void TearDownTestSuite() {
    delete clips_;
    delete skel_;
  }
  static Skeleton* skel_;
  static std::vector<LabeledClip>* clips_;
};

Skeleton* SynthTest::skel_ = nullptr;
std::vector<LabeledClip>* SynthTest::clips_ = nullptr;

TEST(OffsetRule, LiftAtMeanShape) {
  const ObjectOffset o = offset_rule(0, Eigen::VectorXd::Zero(kBetaSize));
  EXPECT_EQ(o.t_off, Vec3(0, 0, 0.3));
  EXPECT_LT((rot6d_to_matrix(o.r_off) - Mat3::Identity()).norm(), 1e-15);
}

TEST(OffsetRule, LinearInBeta) {
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(kBetaSize);
  beta[0] = 0.5;
  beta[1] = -1.0;
  beta[2] = 0.25;
  EXPECT_LT((offset_rule(0, beta).t_off - Vec3(0, 0, 0.4)).norm(), 1e-15);
  EXPECT_LT((offset_rule(1, beta).t_off - Vec3(0.05, 0.25, 0.0625)).norm(), 1e-15);
  EXPECT_LT((offset_rule(2, beta).t_off - Vec3(0.0625, -0.14, -0.1)).norm(), 1e-15);
  EXPECT_DOUBLE_EQ(offset_rule_yaw(1, beta), 0.2);
  const Mat3 r = rot6d_to_matrix(offset_rule(1, beta).r_off);
  EXPECT_LT((r - axis_angle(Vec3::UnitZ(), 0.2)).norm(), 1e-12);
  // Components past the first three have no effect.
  Eigen::VectorXd tail = beta;
  tail.tail(7).setConstant(0.9);
  for (int task = 0; task < kTaskCount; ++task) {
    EXPECT_EQ(offset_rule(task, tail).t_off, offset_rule(task, beta).t_off);
  }
  expect_code(ErrorCode::kInvalidArgument, [&] { offset_rule(3, beta); });
}

TEST(Downsample, StridesAndErrors) {
  MotionImage m("toy9", 2, 128, 120.0);
  for (int n = 0; n < 128; ++n) {
    m.data.col(n).setConstant(n);
  }
  const MotionImage d = downsample(m, 120.0, 30.0);
  ASSERT_EQ(d.frames(), 32);
  EXPECT_EQ(d.fps, 30.0);
  EXPECT_EQ(d.skeleton, "toy9");
  for (int n = 0; n < 32; ++n) {
    EXPECT_EQ(d.data(0, n), 4.0 * n);
  }
  EXPECT_EQ(downsample(m, 30.0, 30.0).data, m.data);
  expect_code(ErrorCode::kNonIntegerStride, [&] { downsample(m, 120.0, 50.0); });
}

TEST(WindowDataset, StartsAndCounts) {
  MotionImage a("toy9", 9, 64, 30.0);
  MotionImage b("toy9", 9, 96, 30.0);
  for (int n = 0; n < 96; ++n) {
    b.data.col(n).setConstant(n);
  }
  const std::vector<MotionImage> clips{a, b};
  const auto w = window_dataset(clips);
  ASSERT_EQ(w.size(), 4u);
  EXPECT_EQ(w[0].clip, 0);
  EXPECT_EQ(w[0].start, 0);
  EXPECT_EQ(w[1].start, 0);
  EXPECT_EQ(w[2].start, 16);
  EXPECT_EQ(w[3].start, 32);
  for (const TrainingWindow& t : w) {
    EXPECT_EQ(t.motion.frames(), 64);
    EXPECT_EQ(t.motion.fps, 30.0);
    EXPECT_EQ(t.motion.skeleton, "toy9");
  }
  EXPECT_EQ(w[3].motion.data(0, 0), 32.0);
  EXPECT_EQ(w[3].context.theta_first, b.pose(32));
  EXPECT_EQ(w[3].context.theta_last, b.pose(95));
  EXPECT_EQ(w[3].context.d_first_to_last, b.root(95) - b.root(32));
  const std::vector<MotionImage> short_clip{MotionImage("toy9", 9, 63, 30.0)};
  expect_code(ErrorCode::kClipTooShort, [&] { window_dataset(short_clip); });
}

TEST_F(SynthTest, DeterministicBySeed) {
  for (ScenarioKind kind : {ScenarioKind::kReachPass, ScenarioKind::kWalkCycle}) {
    const Scenario s = Scenario::sample(kind, 77);
    LabeledClip a;
    try {
      a = gen_clip(*skel_, s);
    } catch (const Error&) {
      continue;
    }
    const LabeledClip b = gen_clip(*skel_, Scenario::sample(kind, 77));
    EXPECT_EQ(a.motion.data, b.motion.data);
    EXPECT_TRUE((a.stance == b.stance).all());
    EXPECT_EQ(a.grasp_frame, b.grasp_frame);
    EXPECT_EQ(a.cloud.points, b.cloud.points);
  }
}

TEST_F(SynthTest, ClipInvariants) {
  ASSERT_EQ(clips_->size(), 12u);
  for (size_t k = 0; k < clips_->size(); ++k) {
    const LabeledClip& c = (*clips_)[k];
    EXPECT_EQ(c.scenario.kind, static_cast<ScenarioKind>(k % 4));
    EXPECT_EQ(c.motion.fps, kDatasetFps);
    EXPECT_GE(c.motion.frames(), 64);
    EXPECT_NO_THROW(c.motion.validate());
    EXPECT_EQ(c.stance.cols(), c.motion.frames());
    if (!c.has_object) {
      EXPECT_EQ(c.scenario.kind, ScenarioKind::kWalkCycle);
      continue;
    }
    EXPECT_GE(c.grasp_frame, 1);
    EXPECT_LT(c.grasp_frame, c.manipulation_end);
    EXPECT_LT(c.manipulation_end, c.motion.frames());
    EXPECT_EQ(c.object_motion.frames(), c.motion.frames());
    // Offset recoverable from the end poses.
    const ObjectPose& p0 = c.object_motion.poses.front();
    const ObjectPose& p1 = c.object_motion.poses.back();
    EXPECT_LT((p1.t - p0.t - c.offset.t_off).norm(), 1e-12);
    EXPECT_LT((p1.rot * p0.rot.transpose() - rot6d_to_matrix(c.offset.r_off)).norm(), 1e-12);
    // Object at rest before the grasp and after the release.
    for (int n = 0; n <= c.grasp_frame; ++n) {
      EXPECT_EQ(c.object_motion.poses[static_cast<size_t>(n)].t, p0.t);
    }
    for (int n = c.manipulation_end; n < c.motion.frames(); ++n) {
      EXPECT_EQ(c.object_motion.poses[static_cast<size_t>(n)].t, p1.t);
    }
    // Offset follows the rule up to the seeded noise.
    const ObjectOffset rule = offset_rule(c.scenario.task(), c.scenario.beta);
    EXPECT_LT((c.offset.t_off - rule.t_off).cwiseAbs().maxCoeff(), 6 * kOffsetNoise);
  }
}

TEST_F(SynthTest, GraspPhaseContactIsConstant) {
  for (const LabeledClip& c : *clips_) {
    if (!c.has_object) {
      continue;
    }
    const PointSequence hand = hand_marker_sequence(*skel_, c.motion);
    const auto objs = sdf_sequence(c.scenario.object, c.object_motion);
    const FrameSummary cr = contact_ratio(hand, objs);
    const FrameSummary pen = interpenetration_depth(hand, objs);
    for (int n = c.grasp_frame; n <= c.manipulation_end; ++n) {
      EXPECT_NEAR(cr.per_frame[static_cast<size_t>(n)], cr.per_frame[static_cast<size_t>(c.grasp_frame)], 1e-9);
      EXPECT_NEAR(pen.per_frame[static_cast<size_t>(n)], pen.per_frame[static_cast<size_t>(c.grasp_frame)], 1e-9);
    }
  }
}

TEST_F(SynthTest, InfeasibleScenario) {
  Scenario s = Scenario::sample(ScenarioKind::kReachLift, 1);
  s.duration = 1.0;
  expect_code(ErrorCode::kInfeasibleScenario, [&] { gen_clip(*skel_, s); });
}

TEST(ScenarioNames, RoundTrip) {
  for (ScenarioKind k :
       {ScenarioKind::kReachLift, ScenarioKind::kReachPass, ScenarioKind::kReachPlace, ScenarioKind::kWalkCycle}) {
    EXPECT_EQ(scenario_kind_from_string(to_string(k)), k);
  }
  EXPECT_EQ(task_of(ScenarioKind::kWalkCycle), -1);
  EXPECT_THROW(scenario_kind_from_string("juggle"), Error);
}

} // namespace
} // namespace homi
