#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <gtest/gtest.h>

#include <homi/error.h>
#include <homi/shape.h>

namespace homi {
namespace {

ObjectCloud random_cloud(Rng& rng, int n) {
  ObjectCloud c;
  c.name = "cloud";
  for (int i = 0; i < n; ++i) {
    c.points.emplace_back(uniform(rng, -0.1, 0.1), uniform(rng, -0.1, 0.1), uniform(rng, -0.1, 0.1));
  }
  return c;
}

TEST(SampleBasis, ReproducibleAndInsideTheCube) {
  const BasisPointSet a = sample_basis(7);
  const BasisPointSet b = sample_basis(7);
  ASSERT_EQ(a.points.size(), 1024u);
  EXPECT_EQ(a.seed, 7u);
  for (size_t k = 0; k < a.points.size(); ++k) {
    ASSERT_EQ(a.points[k], b.points[k]);
    EXPECT_LE(a.points[k].cwiseAbs().maxCoeff(), kBasisHalfExtent);
  }
  EXPECT_NE(sample_basis(8).points[0], a.points[0]);
}

TEST(SampleBasis, MeanNearOrigin) {
  // Per-axis sd of the mean of 1024 uniform points is 0.15 / sqrt(3 * 1024).
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const BasisPointSet b = sample_basis(seed);
    Vec3 mean = Vec3::Zero();
    for (const Vec3& p : b.points) {
      mean += p;
    }
    mean /= static_cast<double>(b.points.size());
    EXPECT_LT(mean.cwiseAbs().maxCoeff(), 0.01) << seed;
  }
}

TEST(BpsEncode, BasisAsCloudGivesZeros) {
  const BasisPointSet b = sample_basis(1, 64);
  ObjectCloud c{"basis", b.points};
  EXPECT_EQ(bps_encode(c, b), Eigen::VectorXd::Zero(64));
}

TEST(BpsEncode, SinglePointAtOrigin) {
  const BasisPointSet b = sample_basis(2);
  const ObjectCloud c{"dot", {Vec3::Zero()}};
  const Eigen::VectorXd code = bps_encode(c, b);
  ASSERT_EQ(code.size(), 1024);
  for (int k = 0; k < 1024; ++k) {
    EXPECT_EQ(code[k], b.points[static_cast<size_t>(k)].norm());
  }
}

TEST(BpsEncode, MatchesBruteForce) {
  Rng rng = make_rng(3);
  const BasisPointSet b = sample_basis(3);
  for (int n : {1, 2, 17, 500, 3000}) {
    const ObjectCloud c = random_cloud(rng, n);
    const Eigen::VectorXd fast = bps_encode(c, b);
    // Independent double loop.
    for (size_t k = 0; k < b.points.size(); ++k) {
      double best = std::numeric_limits<double>::infinity();
      for (const Vec3& p : c.points) {
        const Vec3 d = b.points[k] - p;
        best = std::min(best, std::sqrt(d.x() * d.x() + d.y() * d.y() + d.z() * d.z()));
      }
      ASSERT_NEAR(fast[static_cast<Eigen::Index>(k)], best, 1e-12) << n;
    }
    EXPECT_LT((fast - bps_encode_brute(c, b)).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(BpsEncode, PermutationInvariantAndMonotone) {
  Rng rng = make_rng(4);
  const BasisPointSet b = sample_basis(4, 256);
  ObjectCloud c = random_cloud(rng, 200);
  const Eigen::VectorXd base = bps_encode(c, b);
  ObjectCloud shuffled = c;
  std::shuffle(shuffled.points.begin(), shuffled.points.end(), rng);
  EXPECT_EQ(bps_encode(shuffled, b), base);
  ObjectCloud grown = c;
  const ObjectCloud extra = random_cloud(rng, 50);
  grown.points.insert(grown.points.end(), extra.points.begin(), extra.points.end());
  EXPECT_TRUE((bps_encode(grown, b).array() <= base.array()).all());
  EXPECT_TRUE((base.array() >= 0).all());
}

TEST(BpsEncode, EmptyCloud) {
  try {
    bps_encode(ObjectCloud{"none", {}}, sample_basis(0, 8));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptyCloud);
  }
}

TEST(CenterCloud, RemovesTheCentroid) {
  Rng rng = make_rng(5);
  ObjectCloud c = random_cloud(rng, 100);
  for (Vec3& p : c.points) {
    p += Vec3(1, 2, 3);
  }
  const ObjectCloud centered = center_cloud(c);
  Vec3 mean = Vec3::Zero();
  for (const Vec3& p : centered.points) {
    mean += p;
  }
  EXPECT_LT(mean.norm() / 100, 1e-12);
}

TEST(Primitive, SignedDistanceClosedForms) {
  const Primitive s = Primitive::sphere(0.1);
  EXPECT_NEAR(s.signed_distance(Vec3(0.3, 0, 0)), 0.2, 1e-15);
  EXPECT_NEAR(s.signed_distance(Vec3(0.0, 0.08, 0)), -0.02, 1e-15);
  const Primitive c = Primitive::capsule(0.05, 0.1);
  EXPECT_NEAR(c.signed_distance(Vec3(0.2, 0, 0.05)), 0.15, 1e-15);
  EXPECT_NEAR(c.signed_distance(Vec3(0, 0, 0.25)), 0.1, 1e-15);
  const Primitive b = Primitive::box(Vec3(0.1, 0.2, 0.3));
  EXPECT_NEAR(b.signed_distance(Vec3(0.15, 0, 0)), 0.05, 1e-15);
  EXPECT_NEAR(b.signed_distance(Vec3(0.05, 0, 0)), -0.05, 1e-15);
  EXPECT_NEAR(b.signed_distance(Vec3(0.13, 0.24, 0)), 0.05, 1e-15);
  EXPECT_THROW(Primitive::sphere(-1.0).validate(), Error);
}

TEST(Primitive, SurfaceSamplesLieOnTheSurface) {
  Rng rng = make_rng(6);
  for (const Primitive& p : {Primitive::sphere(0.07), Primitive::box(Vec3(0.03, 0.05, 0.02)), Primitive::capsule(0.03, 0.06)}) {
    const ObjectCloud c = sample_surface(p, "obj", 500, rng);
    ASSERT_EQ(c.points.size(), 500u);
    for (const Vec3& q : c.points) {
      EXPECT_LT(std::abs(p.signed_distance(q)), 1e-12);
      EXPECT_LE(q.norm(), p.bounding_radius() + 1e-12);
    }
  }
}

} // namespace
} // namespace homi
