#include "homi/geom.h"

#include <algorithm>
#include <cmath>

#include <Eigen/SVD>

#include "homi/error.h"

namespace homi {

namespace {

constexpr double kMinColumnNorm = 1e-12;
// sin(1e-7); below this the two columns are treated as parallel.
constexpr double kMinSinAngle = 1e-7;

} // namespace

Mat3 rot6d_to_matrix(const Vec6& r) {
  const Vec3 a = r.head<3>();
  const Vec3 b = r.tail<3>();
  const double na = a.norm();
  const double nb = b.norm();
  HOMI_CHECK(
      std::isfinite(na) && std::isfinite(nb) && na > kMinColumnNorm && nb > kMinColumnNorm,
      ErrorCode::kDegenerateRotation6D,
      "6D rotation has a vanishing column");
  HOMI_CHECK(
      a.cross(b).norm() / (na * nb) > kMinSinAngle,
      ErrorCode::kDegenerateRotation6D,
      "6D rotation columns are parallel");

  const Vec3 c1 = a / na;
  const Vec3 u = b - b.dot(c1) * c1;
  const Vec3 c2 = u / u.norm();
  Mat3 m;
  m.col(0) = c1;
  m.col(1) = c2;
  m.col(2) = c1.cross(c2);
  return m;
}

Vec6 rot6d_to_matrix_vjp(const Vec6& r, const Mat3& grad) {
  const Vec3 a = r.head<3>();
  const Vec3 b = r.tail<3>();
  const double na = a.norm();
  const Vec3 c1 = a / na;
  const double bc = b.dot(c1);
  const Vec3 u = b - bc * c1;
  const double nu = u.norm();
  const Vec3 c2 = u / nu;

  const Vec3 g3 = grad.col(2);
  // c3 = c1 x c2
  Vec3 g1 = grad.col(0) + c2.cross(g3);
  const Vec3 g2 = grad.col(1) + g3.cross(c1);

  // c2 = u / |u|
  const Vec3 gu = (g2 - c2 * c2.dot(g2)) / nu;
  // u = b - (b.c1) c1
  const Vec3 gb = gu - c1 * c1.dot(gu);
  g1 += -b * c1.dot(gu) - bc * gu;
  // c1 = a / |a|
  const Vec3 ga = (g1 - c1 * c1.dot(g1)) / na;

  Vec6 out;
  out.head<3>() = ga;
  out.tail<3>() = gb;
  return out;
}

Vec6 matrix_to_rot6d(const Mat3& m) {
  Vec6 r;
  r.head<3>() = m.col(0);
  r.tail<3>() = m.col(1);
  return r;
}

bool is_rotation(const Mat3& m, double tol) {
  return (m.transpose() * m - Mat3::Identity()).cwiseAbs().maxCoeff() <= tol &&
      std::abs(m.determinant() - 1.0) <= tol;
}

KabschResult kabsch(std::span<const Vec3> src, std::span<const Vec3> dst) {
  HOMI_CHECK(src.size() == dst.size(), ErrorCode::kShapeMismatch, "kabsch: point counts differ");
  HOMI_CHECK(src.size() >= 2, ErrorCode::kInvalidArgument, "kabsch: need at least two vectors");
  bool any = false;
  for (size_t i = 0; i < src.size(); ++i) {
    any = any || !src[i].isZero(0.0) || !dst[i].isZero(0.0);
  }
  HOMI_CHECK(any, ErrorCode::kInvalidArgument, "kabsch: all vectors are zero");

  Mat3 h = Mat3::Zero();
  for (size_t i = 0; i < src.size(); ++i) {
    h += src[i] * dst[i].transpose();
  }

  Eigen::JacobiSVD<Mat3> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Mat3& u = svd.matrixU();
  const Mat3& v = svd.matrixV();
  const Vec3 s = svd.singularValues();

  Mat3 d = Mat3::Identity();
  d(2, 2) = (v * u.transpose()).determinant() < 0.0 ? -1.0 : 1.0;

  KabschResult result;
  result.rotation = v * d * u.transpose();
  // Rank <= 1: rotations about the single dominant direction all tie.
  result.degenerate = !(s(0) > 0.0) || s(1) <= 1e-10 * s(0);
  return result;
}

double alignment_objective(const Mat3& rotation, std::span<const Vec3> src, std::span<const Vec3> dst) {
  double total = 0.0;
  for (size_t i = 0; i < src.size(); ++i) {
    total += (dst[i] - rotation * src[i]).squaredNorm();
  }
  return total;
}

Quat slerp(const Quat& a, const Quat& b, double u) {
  HOMI_CHECK(u >= 0.0 && u <= 1.0, ErrorCode::kInvalidArgument, "slerp: u must lie in [0, 1]");
  Quat target = b;
  double cos_theta = a.dot(b);
  if (cos_theta < 0.0) {
    target.coeffs() = -target.coeffs();
    cos_theta = -cos_theta;
  }
  if (u <= 0.0) {
    return a;
  }
  if (u >= 1.0) {
    return target;
  }

  double wa = 1.0 - u;
  double wb = u;
  if (cos_theta < 1.0 - 1e-12) {
    const double theta = std::acos(std::min(cos_theta, 1.0));
    const double sin_theta = std::sin(theta);
    wa = std::sin((1.0 - u) * theta) / sin_theta;
    wb = std::sin(u * theta) / sin_theta;
  }
  Quat out;
  out.coeffs() = wa * a.coeffs() + wb * target.coeffs();
  out.normalize();
  return out;
}

Mat3 axis_angle(const Vec3& axis, double angle) {
  return Eigen::AngleAxisd(angle, axis.normalized()).toRotationMatrix();
}

double rotation_angle_between(const Mat3& a, const Mat3& b) {
  // atan2 keeps full precision near 0 and pi, where acos of the trace does not.
  const Mat3 r = a.transpose() * b;
  const double s = 0.5 * Vec3(r(2, 1) - r(1, 2), r(0, 2) - r(2, 0), r(1, 0) - r(0, 1)).norm();
  const double c = 0.5 * (r.trace() - 1.0);
  return std::atan2(s, c);
}

Mat3 random_rotation(Rng& rng) {
  Eigen::Vector4d v;
  do {
    for (int i = 0; i < 4; ++i) {
      v(i) = normal(rng);
    }
  } while (v.norm() < 1e-8);
  v.normalize();
  return Quat(v(0), v(1), v(2), v(3)).toRotationMatrix();
}

} // namespace homi
