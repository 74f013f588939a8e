#pragma once

#include <span>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "homi/rng.h"

namespace homi {

using Vec3 = Eigen::Vector3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat3 = Eigen::Matrix3d;
using Quat = Eigen::Quaterniond;

/// Continuous 6D rotation: the first two columns of a rotation matrix,
/// stored as [c1x, c1y, c1z, c2x, c2y, c2z].
struct Rotation6D {
  Vec6 r = (Vec6() << 1, 0, 0, 0, 1, 0).finished();

  Rotation6D() = default;
  explicit Rotation6D(const Vec6& v) : r(v) {}

  static Rotation6D identity() {
    return Rotation6D();
  }
};

/// Gram-Schmidt reconstruction. Throws kDegenerateRotation6D when either
/// column vanishes or the two are parallel (angle <= 1e-7 rad).
Mat3 rot6d_to_matrix(const Vec6& r);
inline Mat3 rot6d_to_matrix(const Rotation6D& r) {
  return rot6d_to_matrix(r.r);
}

/// Vector-Jacobian product of rot6d_to_matrix: maps dL/dR onto dL/dr.
Vec6 rot6d_to_matrix_vjp(const Vec6& r, const Mat3& grad_matrix);

Vec6 matrix_to_rot6d(const Mat3& m);

bool is_rotation(const Mat3& m, double tol = 1e-9);

struct KabschResult {
  Mat3 rotation = Mat3::Identity();
  /// Set when the cross-covariance has rank <= 1 and the optimum is not
  /// unique; `rotation` is still the sign-corrected SVD solution.
  bool degenerate = false;
};

/// Rotation minimising sum_i |dst_i - R src_i|^2 (Kabsch / orthogonal
/// Procrustes with det(R) = +1).
KabschResult kabsch(std::span<const Vec3> src, std::span<const Vec3> dst);

/// Least-squares objective sum_i |dst_i - R src_i|^2.
double alignment_objective(const Mat3& rotation, std::span<const Vec3> src, std::span<const Vec3> dst);

/// Shortest-arc spherical interpolation; slerp(a, b, 0) = a, slerp(a, b, 1) = b.
Quat slerp(const Quat& a, const Quat& b, double u);

Mat3 axis_angle(const Vec3& axis, double angle);

/// Geodesic angle between two rotations in radians.
double rotation_angle_between(const Mat3& a, const Mat3& b);

/// Uniformly distributed rotation (Haar measure).
Mat3 random_rotation(Rng& rng);

} // namespace homi
