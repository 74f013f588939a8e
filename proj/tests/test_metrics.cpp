#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include <homi/error.h>
#include <homi/metrics.h>

#include "fixtures.h"
#include "support.h"

namespace homi {
namespace {

PointSequence random_sequence(Rng& rng, int points, int frames, double scale = 1.0) {
  PointSequence s(points, frames);
  for (int n = 0; n < frames; ++n) {
    for (int i = 0; i < points; ++i) {
      s.set(i, n, scale * Vec3(normal(rng), normal(rng), normal(rng)));
    }
  }
  return s;
}

constexpr double kAnchorAb = 8.942104123861;
constexpr double kAnchorBa = 8.529426108499;

template <typename F>
void expect_code(ErrorCode code, F&& f) {
  try {
    f();
    FAIL() << "no throw";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), code);
  }
}

TEST(Ade, WorkedExample) {
  PointSequence a(2, 2);
  PointSequence b(2, 2);
  b.set(0, 0, Vec3(3, 4, 0));
  b.set(1, 1, Vec3(0, 0, 1));
  EXPECT_DOUBLE_EQ(ade(a, b), (5.0 + 1.0) / 4.0);
}

TEST(Ade, DoubleLoopOracleAndSymmetry) {
  Rng rng = make_rng(1);
  const PointSequence a = random_sequence(rng, 7, 13);
  const PointSequence b = random_sequence(rng, 7, 13);
  double sum = 0.0;
  for (int n = 0; n < 13; ++n) {
    for (int i = 0; i < 7; ++i) {
      sum += (a.at(i, n) - b.at(i, n)).norm();
    }
  }
  EXPECT_NEAR(ade(a, b), sum / (7 * 13), 1e-13);
  EXPECT_DOUBLE_EQ(ade(a, b), ade(b, a));
  EXPECT_EQ(ade(a, a), 0.0);
  expect_code(ErrorCode::kShapeMismatch, [&] { ade(a, PointSequence(7, 12)); });
}

TEST(Skating, StaticAndSliding) {
  PointSequence foot(2, 10);
  EXPECT_EQ(skating_ratio(foot, 30.0), 0.0);
  for (int n = 0; n < 10; ++n) {
    foot.set(0, n, Vec3(0.01 * n, 0, 0.02));
  }
  EXPECT_EQ(skating_ratio(foot, 30.0), 1.0);
  // Same slide lifted above the height threshold.
  for (int n = 0; n < 10; ++n) {
    foot.set(0, n, Vec3(0.01 * n, 0, 0.2));
  }
  EXPECT_EQ(skating_ratio(foot, 30.0), 0.0);
}

TEST(Skating, InjectedSlips) {
  const int frames = 31;
  for (int k : {1, 3, 7}) {
    PointSequence foot(1, frames);
    double x = 0.0;
    for (int n = 0; n < frames; ++n) {
      if (n > 0 && n <= k) {
        x += 0.01;
      }
      foot.set(0, n, Vec3(x, 0, 0));
    }
    EXPECT_DOUBLE_EQ(skating_ratio(foot, 30.0), static_cast<double>(k) / (frames - 1));
  }
}

TEST(Skating, ThresholdScalesWithFrameRate) {
  // 4 mm per frame slips at 30 fps but not at 15 fps.
  PointSequence foot(1, 5);
  for (int n = 0; n < 5; ++n) {
    foot.set(0, n, Vec3(0.004 * n, 0, 0));
  }
  EXPECT_EQ(skating_ratio(foot, 30.0), 1.0);
  EXPECT_EQ(skating_ratio(foot, 15.0), 0.0);
}

// Real-arithmetic periodogram, written without complex numbers.
Eigen::VectorXd periodogram(const Eigen::VectorXd& x) {
  const int n = static_cast<int>(x.size());
  Eigen::VectorXd p(n / 2 + 1);
  for (int k = 0; k <= n / 2; ++k) {
    double re = 0.0;
    double im = 0.0;
    for (int i = 0; i < n; ++i) {
      const double w = 2.0 * std::numbers::pi * k * i / n;
      re += x[i] * std::cos(w);
      im -= x[i] * std::sin(w);
    }
    p[k] = re * re + im * im + 1e-8;
  }
  return p / p.sum();
}

TEST(PowerDistribution, MatchesPeriodogramAndPeaksAtTheTone) {
  Rng rng = make_rng(2);
  for (int n : {8, 9, 32, 61}) {
    Eigen::VectorXd x(n);
    for (int i = 0; i < n; ++i) {
      x[i] = normal(rng);
    }
    const Eigen::VectorXd p = power_distribution(x);
    ASSERT_EQ(p.size(), n / 2 + 1);
    EXPECT_NEAR(p.sum(), 1.0, 1e-12);
    EXPECT_LT((p - periodogram(x)).cwiseAbs().maxCoeff(), 1e-10) << n;
  }
  Eigen::VectorXd tone(64);
  for (int i = 0; i < 64; ++i) {
    tone[i] = std::sin(2.0 * std::numbers::pi * 5 * i / 64);
  }
  Eigen::Index peak = 0;
  power_distribution(tone).maxCoeff(&peak);
  EXPECT_EQ(peak, 5);
  EXPECT_GT(power_distribution(tone)[5], 0.999);
}

PointSequence sinusoid(int points, int frames) {
  PointSequence s(points, frames);
  for (int n = 0; n < frames; ++n) {
    for (int i = 0; i < points; ++i) {
      const double w = 2.0 * std::numbers::pi * (i + 1) * n / frames;
      s.set(i, n, Vec3(std::sin(w), std::cos(w), 0.5 * std::sin(2 * w)));
    }
  }
  return s;
}

TEST(Pskl, SelfIsZero) {
  Rng rng = make_rng(3);
  const PointSequence a = random_sequence(rng, 4, 40);
  const PsklResult r = psklj(a, a, 30.0);
  EXPECT_EQ(r.ab, 0.0);
  EXPECT_EQ(r.ba, 0.0);
}

TEST(Pskl, SmoothVersusNoiseIsLargeBothWays) {
  Rng rng = make_rng(4);
  const PointSequence smooth = sinusoid(3, 64);
  const PointSequence noise = random_sequence(rng, 3, 64, 0.1);
  const PsklResult r = psklj(smooth, noise, 30.0);
  EXPECT_GT(r.ab, 0.1);
  EXPECT_GT(r.ba, 0.1);
  EXPECT_NE(r.ab, r.ba);
  const PsklResult swapped = psklj(noise, smooth, 30.0);
  EXPECT_DOUBLE_EQ(swapped.ab, r.ba);
  EXPECT_DOUBLE_EQ(swapped.ba, r.ab);
  // Regression anchors for this fixed input.
  EXPECT_NEAR(r.ab, kAnchorAb, 1e-9);
  EXPECT_NEAR(r.ba, kAnchorBa, 1e-9);
}

TEST(Pskl, InvariantToTranslationAndRateForPositions) {
  Rng rng = make_rng(5);
  const PointSequence a = random_sequence(rng, 2, 20);
  const PointSequence b = random_sequence(rng, 2, 20);
  PointSequence shifted = a;
  for (int n = 0; n < 20; ++n) {
    for (int i = 0; i < 2; ++i) {
      shifted.set(i, n, a.at(i, n) + Vec3(0, 0, 0.3 * n));
    }
  }
  // A linear drift has zero acceleration.
  const PsklResult r1 = psklj(a, b, 30.0);
  const PsklResult r2 = psklj(shifted, b, 60.0);
  EXPECT_NEAR(r1.ab, r2.ab, 1e-9);
  EXPECT_NEAR(r1.ba, r2.ba, 1e-9);
}

TEST(Pskl, Errors) {
  const PointSequence a(2, 7);
  expect_code(ErrorCode::kTooShort, [&] { psklj(a, a, 30.0); });
  expect_code(ErrorCode::kShapeMismatch, [&] { psklj(PointSequence(2, 8), PointSequence(3, 8), 30.0); });
}

TEST(Apd, Examples) {
  std::vector<Eigen::VectorXd> tri{Eigen::Vector2d(0, 0), Eigen::Vector2d(3, 0), Eigen::Vector2d(0, 4)};
  EXPECT_DOUBLE_EQ(apd(tri), 4.0);
  std::vector<Eigen::VectorXd> two{Eigen::Vector3d(1, 1, 1), Eigen::Vector3d(1, 1, 3.5)};
  EXPECT_DOUBLE_EQ(apd(two), 2.5);
  std::vector<Eigen::VectorXd> same(5, Eigen::Vector3d(1, 2, 3));
  EXPECT_EQ(apd(same), 0.0);
  std::vector<Eigen::VectorXd> one{Eigen::Vector2d(0, 0)};
  expect_code(ErrorCode::kInvalidArgument, [&] { apd(one); });
}

TEST(InterpolationBaseline, KeepsEndpointsAndHalvesTheTurn) {
  const Skeleton skel = test::chain_skeleton(2);
  MotionImage gt(skel.name(), skel.joint_count(), 9, 30.0);
  for (int n = 0; n < 9; ++n) {
    for (int j = 0; j < skel.joint_count(); ++j) {
      gt.set_rot6(j, n, matrix_to_rot6d(test::rot_z(0.1 * n * (j + 1))));
    }
    gt.set_root(n, Vec3(0.2 * n, 0.1 * n * n, 0));
  }
  const MotionImage base = interpolation_baseline(gt);
  ASSERT_EQ(base.frames(), 9);
  EXPECT_LT((base.frame(0) - gt.frame(0)).norm(), 1e-12);
  EXPECT_LT((base.frame(8) - gt.frame(8)).norm(), 1e-12);
  for (int j = 0; j < skel.joint_count(); ++j) {
    EXPECT_LT(rotation_angle_between(rot6d_to_matrix(base.rot6(j, 4)), test::rot_z(0.4 * (j + 1))), 1e-9);
  }
  EXPECT_LT((base.root(4) - Vec3(0.8, 3.2, 0)).norm(), 1e-12);
}

TEST(Contact, SphereSurfaceAndFarAway) {
  const Primitive sphere = Primitive::sphere(0.1);
  const ObjectPose pose{Vec3(1, 2, 3), Mat3::Identity()};
  const std::vector<SdfObject> objs(3, SdfObject{sphere, pose});
  PointSequence hand(6, 3);
  for (int i = 0; i < 6; ++i) {
    const Vec3 dir = axis_angle(Vec3::UnitZ(), i) * Vec3::UnitX();
    hand.set(i, 0, pose.t + 0.1 * dir);
    hand.set(i, 1, pose.t + 0.5 * dir);
    hand.set(i, 2, pose.t + (i < 3 ? 0.105 : 0.2) * dir);
  }
  const FrameSummary c = contact_ratio(hand, objs);
  EXPECT_DOUBLE_EQ(c.per_frame[0], 1.0);
  EXPECT_DOUBLE_EQ(c.per_frame[1], 0.0);
  EXPECT_DOUBLE_EQ(c.per_frame[2], 0.5);
  EXPECT_DOUBLE_EQ(c.max, 1.0);
  EXPECT_DOUBLE_EQ(c.min, 0.0);
  EXPECT_DOUBLE_EQ(c.avg, 0.5);
  expect_code(ErrorCode::kShapeMismatch, [&] { contact_ratio(hand, std::span(objs).first(2)); });
}

TEST(Contact, RigidReplayKeepsTheRatio) {
  const test::RotatingGrasp g = test::rotating_grasp(30, 2.0);
  const FrameSummary c = contact_ratio(g.hand, sdf_sequence(g.box, g.truth));
  for (double v : c.per_frame) {
    EXPECT_DOUBLE_EQ(v, c.per_frame[0]);
  }
  EXPECT_DOUBLE_EQ(c.per_frame[0], 1.0);
  const FrameSummary p = interpenetration_depth(g.hand, sdf_sequence(g.box, g.truth));
  EXPECT_LT(p.max, 1e-12);
}

TEST(Penetration, KnownDepth) {
  const std::vector<SdfObject> objs{{Primitive::sphere(0.1), ObjectPose{Vec3::Zero(), Mat3::Identity()}}};
  PointSequence hand(2, 1);
  hand.set(0, 0, Vec3(0.08, 0, 0));
  hand.set(1, 0, Vec3(0, 0.5, 0));
  const FrameSummary p = interpenetration_depth(hand, objs);
  EXPECT_NEAR(p.per_frame[0], 0.02, 1e-15);
}

TEST(Penetration, BoxSdfAgreesWithSurfaceSampling) {
  // Nearest distance to a dense surface sample, signed by an inside test.
  const Vec3 half(0.05, 0.03, 0.08);
  const Primitive box = Primitive::box(half);
  Rng rng = make_rng(6);
  const ObjectCloud surface = sample_surface(box, "box", 1000000, rng);
  for (int q = 0; q < 12; ++q) {
    const Vec3 p(uniform(rng, -0.1, 0.1), uniform(rng, -0.08, 0.08), uniform(rng, -0.12, 0.12));
    double best = 1e9;
    for (const Vec3& s : surface.points) {
      best = std::min(best, (s - p).squaredNorm());
    }
    const bool inside = (p.cwiseAbs().array() < half.array()).all();
    const double mc = inside ? -std::sqrt(best) : std::sqrt(best);
    EXPECT_NEAR(box.signed_distance(p), mc, 1e-3) << p.transpose();
  }
}

TEST(Metrics, RigidTransformInvariance) {
  const test::RotatingGrasp g = test::rotating_grasp(20, 1.5);
  Rng rng = make_rng(7);
  const Mat3 r = random_rotation(rng);
  const Vec3 d(0.3, -1.0, 0.2);
  PointSequence hand(6, 20);
  ObjectMotion moved = g.truth;
  for (int n = 0; n < 20; ++n) {
    for (int i = 0; i < 6; ++i) {
      hand.set(i, n, r * g.hand.at(i, n) + d + Vec3(0.002 * i, 0, 0));
    }
    ObjectPose& p = moved.poses[static_cast<size_t>(n)];
    p = {r * p.t + d, r * p.rot};
  }
  PointSequence base = g.hand;
  for (int n = 0; n < 20; ++n) {
    for (int i = 0; i < 6; ++i) {
      base.set(i, n, g.hand.at(i, n) + r.transpose() * Vec3(0.002 * i, 0, 0));
    }
  }
  const auto a = interpenetration_depth(base, sdf_sequence(g.box, g.truth));
  const auto b = interpenetration_depth(hand, sdf_sequence(g.box, moved));
  EXPECT_NEAR(a.avg, b.avg, 1e-12);
  EXPECT_NEAR(a.max, b.max, 1e-12);
  EXPECT_EQ(
      contact_ratio(base, sdf_sequence(g.box, g.truth)).per_frame,
      contact_ratio(hand, sdf_sequence(g.box, moved)).per_frame);
}

} // namespace
} // namespace homi
