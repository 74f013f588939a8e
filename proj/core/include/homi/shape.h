#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "homi/geom.h"
#include "homi/rng.h"

namespace homi {

inline constexpr int kBasisSize = 1024;
inline constexpr double kBasisHalfExtent = 0.15; // m

struct BasisPointSet {
  std::vector<Vec3> points;
  std::uint64_t seed = 0;
};

/// `size` i.i.d. uniform points in [-0.15, 0.15]^3.
BasisPointSet sample_basis(std::uint64_t seed, int size = kBasisSize);

/// Object shape as points in its canonical frame.
struct ObjectCloud {
  std::string name;
  std::vector<Vec3> points;

  /// Throws kEmptyCloud / kInvalidArgument.
  void validate() const;
};

/// Subtracts the centroid.
ObjectCloud center_cloud(const ObjectCloud& cloud);

/// Per basis point, the distance to the nearest cloud point (kd-tree).
Eigen::VectorXd bps_encode(const ObjectCloud& cloud, const BasisPointSet& basis);
/// Reference double loop.
Eigen::VectorXd bps_encode_brute(const ObjectCloud& cloud, const BasisPointSet& basis);

/// Analytic solid used for synthetic objects and contact metrics. Capsules
/// run along the local z axis.
struct Primitive {
  enum class Kind { kSphere, kBox, kCapsule };
  Kind kind = Kind::kSphere;
  double radius = 0.05;                // sphere, capsule
  Vec3 half_extents = Vec3::Zero();    // box
  double half_length = 0.0;            // capsule segment half length

  static Primitive sphere(double r);
  static Primitive box(const Vec3& half);
  static Primitive capsule(double r, double half_len);

  /// Signed distance in the primitive frame; negative inside.
  double signed_distance(const Vec3& local) const;
  /// Radius of the smallest origin-centred ball containing the solid.
  double bounding_radius() const;
  /// Throws kInvalidArgument unless all dimensions are positive.
  void validate() const;
};

std::string to_string(Primitive::Kind kind);
Primitive::Kind primitive_kind_from_string(const std::string& text);

/// Uniform-by-area samples of the primitive's surface.
ObjectCloud sample_surface(const Primitive& primitive, const std::string& name, int count, Rng& rng);

} // namespace homi
