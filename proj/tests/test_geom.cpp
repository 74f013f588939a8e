#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include <homi/error.h>
#include <homi/geom.h>

#include "support.h"

namespace homi {
namespace {

// Hand-written Gram-Schmidt on plain arrays.
std::array<std::array<double, 3>, 3> gram_schmidt_columns(const std::array<double, 6>& r) {
  std::array<double, 3> a{r[0], r[1], r[2]};
  std::array<double, 3> b{r[3], r[4], r[5]};
  auto norm = [](const std::array<double, 3>& v) { return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]); };
  const double na = norm(a);
  std::array<double, 3> c1{a[0] / na, a[1] / na, a[2] / na};
  const double d = b[0] * c1[0] + b[1] * c1[1] + b[2] * c1[2];
  std::array<double, 3> u{b[0] - d * c1[0], b[1] - d * c1[1], b[2] - d * c1[2]};
  const double nu = norm(u);
  std::array<double, 3> c2{u[0] / nu, u[1] / nu, u[2] / nu};
  std::array<double, 3> c3{c1[1] * c2[2] - c1[2] * c2[1], c1[2] * c2[0] - c1[0] * c2[2], c1[0] * c2[1] - c1[1] * c2[0]};
  return {c1, c2, c3};
}

TEST(Rot6d, IdentityVector) {
  Vec6 r;
  r << 1, 0, 0, 0, 1, 0;
  EXPECT_TRUE(rot6d_to_matrix(r).isApprox(Mat3::Identity(), 0.0));
}

TEST(Rot6d, QuarterTurnAboutZ) {
  Vec6 r;
  r << 0, 1, 0, -1, 0, 0;
  const Mat3 m = rot6d_to_matrix(r);
  EXPECT_TRUE((m * Vec3::UnitX()).isApprox(Vec3(0, 1, 0), 1e-15));
  EXPECT_TRUE((m * Vec3::UnitY()).isApprox(Vec3(-1, 0, 0), 1e-15));
  EXPECT_TRUE((m * Vec3::UnitZ()).isApprox(Vec3(0, 0, 1), 1e-15));
}

TEST(Rot6d, UnnormalisedInputMatchesHandGramSchmidt) {
  // a = (2,0,0) -> c1 = e1; b = (1,3,0) -> b - (b.c1)c1 = (0,3,0) -> c2 = e2.
  Vec6 r;
  r << 2, 0, 0, 1, 3, 0;
  EXPECT_TRUE(rot6d_to_matrix(r).isApprox(Mat3::Identity(), 1e-15));

  Rng rng = make_rng(5);
  for (int i = 0; i < 100; ++i) {
    std::array<double, 6> raw;
    for (double& v : raw) {
      v = uniform(rng, -2, 2);
    }
    const auto cols = gram_schmidt_columns(raw);
    const Mat3 m = rot6d_to_matrix(Vec6(Eigen::Map<const Vec6>(raw.data())));
    for (int c = 0; c < 3; ++c) {
      for (int k = 0; k < 3; ++k) {
        EXPECT_NEAR(m(k, c), cols[c][k], 1e-12);
      }
    }
  }
}

TEST(Rot6d, DegenerateInputsThrow) {
  Vec6 parallel;
  parallel << 1, 0, 0, 2, 0, 0;
  Vec6 zero = Vec6::Zero();
  Vec6 nearly;
  nearly << 1, 0, 0, 1, 1e-9, 0;
  for (const Vec6& r : {parallel, zero, nearly}) {
    try {
      rot6d_to_matrix(r);
      FAIL() << "expected DegenerateRotation6D";
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kDegenerateRotation6D);
    }
  }
}

TEST(Rot6d, OutputIsAlwaysARotation) {
  Rng rng = make_rng(11);
  for (int i = 0; i < 1000; ++i) {
    Vec6 r;
    for (int k = 0; k < 6; ++k) {
      r(k) = uniform(rng, -3, 3);
    }
    const Mat3 m = rot6d_to_matrix(r);
    EXPECT_LT((m.transpose() * m - Mat3::Identity()).norm(), 1e-9);
    EXPECT_NEAR(m.determinant(), 1.0, 1e-9);
  }
}

TEST(Rot6d, MatrixToRot6dExamples) {
  Vec6 id;
  id << 1, 0, 0, 0, 1, 0;
  EXPECT_EQ(matrix_to_rot6d(Mat3::Identity()), id);

  Mat3 rx;
  rx << 1, 0, 0, 0, -1, 0, 0, 0, -1;
  Vec6 expect;
  expect << 1, 0, 0, 0, -1, 0;
  EXPECT_EQ(matrix_to_rot6d(rx), expect);
}

TEST(Rot6d, RoundTrip) {
  Rng rng = make_rng(3);
  for (int i = 0; i < 1000; ++i) {
    const Mat3 m = random_rotation(rng);
    EXPECT_LT((rot6d_to_matrix(matrix_to_rot6d(m)) - m).norm(), 1e-9);
  }
}

TEST(Kabsch, IdentityOnBasis) {
  const std::vector<Vec3> v{Vec3::UnitX(), Vec3::UnitY(), Vec3::UnitZ()};
  const KabschResult r = kabsch(v, v);
  EXPECT_LT((r.rotation - Mat3::Identity()).norm(), 1e-12);
  EXPECT_FALSE(r.degenerate);
}

TEST(Kabsch, QuarterTurnFromTwoVectors) {
  const Mat3 rz = test::rot_z(std::numbers::pi / 2);
  const std::vector<Vec3> src{Vec3::UnitX(), Vec3::UnitY()};
  const std::vector<Vec3> dst{rz * src[0], rz * src[1]};
  EXPECT_LT((kabsch(src, dst).rotation - rz).norm(), 1e-12);
}

TEST(Kabsch, ExactInstances) {
  Rng rng = make_rng(21);
  for (int i = 0; i < 100; ++i) {
    const Mat3 r = random_rotation(rng);
    std::vector<Vec3> src;
    std::vector<Vec3> dst;
    const int n = 2 + i % 6;
    for (int k = 0; k < n; ++k) {
      src.emplace_back(normal(rng), normal(rng), normal(rng));
      dst.push_back(r * src.back());
    }
    EXPECT_LT((kabsch(src, dst).rotation - r).norm(), 1e-7);
  }
}

TEST(Kabsch, NoisyOptimumBeatsRandomRotations) {
  Rng rng = make_rng(22);
  for (int i = 0; i < 10; ++i) {
    const Mat3 r = random_rotation(rng);
    std::vector<Vec3> src;
    std::vector<Vec3> dst;
    for (int k = 0; k < 5; ++k) {
      src.emplace_back(normal(rng), normal(rng), normal(rng));
      dst.push_back(r * src.back() + 0.1 * Vec3(normal(rng), normal(rng), normal(rng)));
    }
    const Mat3 best = kabsch(src, dst).rotation;
    EXPECT_TRUE(is_rotation(best));
    const double f = alignment_objective(best, src, dst);
    for (int t = 0; t < 10000; ++t) {
      ASSERT_LE(f, alignment_objective(random_rotation(rng), src, dst) + 1e-12);
    }
  }
}

TEST(Kabsch, CollinearInputIsFlagged) {
  const std::vector<Vec3> src{Vec3(1, 0, 0), Vec3(2, 0, 0), Vec3(-1, 0, 0)};
  const Mat3 rz = test::rot_z(0.3);
  const std::vector<Vec3> dst{rz * src[0], rz * src[1], rz * src[2]};
  const KabschResult r = kabsch(src, dst);
  EXPECT_TRUE(r.degenerate);
  EXPECT_TRUE(is_rotation(r.rotation));
  // Still an optimum: maps the line onto the line.
  EXPECT_NEAR(alignment_objective(r.rotation, src, dst), 0.0, 1e-12);
}

TEST(Kabsch, RejectsBadInput) {
  const std::vector<Vec3> one{Vec3::UnitX()};
  const std::vector<Vec3> two{Vec3::UnitX(), Vec3::UnitY()};
  const std::vector<Vec3> zeros{Vec3::Zero(), Vec3::Zero()};
  EXPECT_THROW(kabsch(one, one), Error);
  EXPECT_THROW(kabsch(two, one), Error);
  EXPECT_THROW(kabsch(zeros, zeros), Error);
}

TEST(Slerp, Endpoints) {
  Rng rng = make_rng(1);
  const Quat a(random_rotation(rng));
  const Quat b(random_rotation(rng));
  EXPECT_LT(a.angularDistance(slerp(a, b, 0.0)), 1e-12);
  EXPECT_LT(b.angularDistance(slerp(a, b, 1.0)), 1e-12);
}

TEST(Slerp, HalfwayAboutZ) {
  const Quat a = Quat::Identity();
  const Quat b(test::rot_z(std::numbers::pi / 2));
  const Eigen::AngleAxisd aa(slerp(a, b, 0.5));
  EXPECT_NEAR(aa.angle(), std::numbers::pi / 4, 1e-12);
  EXPECT_NEAR(std::abs(aa.axis().z()), 1.0, 1e-12);
}

TEST(Slerp, AntipodalTakesShortArc) {
  const Quat a(test::rot_z(0.2));
  Quat b(test::rot_z(0.6));
  b.coeffs() = -b.coeffs();
  const Mat3 mid = slerp(a, b, 0.5).toRotationMatrix();
  EXPECT_LT((mid - test::rot_z(0.4)).norm(), 1e-12);
}

TEST(Slerp, RejectsOutOfRange) {
  EXPECT_THROW(slerp(Quat::Identity(), Quat::Identity(), 1.5), Error);
}

TEST(RotationAngle, AccurateAcrossTheRange) {
  Rng rng = make_rng(21);
  for (double angle : {0.0, 1e-12, 1e-9, 3e-8, 0.5, 2.0, std::numbers::pi - 1e-9}) {
    Vec3 axis(normal(rng), normal(rng), normal(rng));
    axis.normalize();
    const Mat3 a = random_rotation(rng);
    const Mat3 b = a * axis_angle(axis, angle);
    EXPECT_NEAR(rotation_angle_between(a, b), angle, 1e-14 + 1e-12 * angle) << angle;
    EXPECT_NEAR(rotation_angle_between(b, a), angle, 1e-14 + 1e-12 * angle) << angle;
  }
}

} // namespace
} // namespace homi
