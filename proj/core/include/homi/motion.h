#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "homi/geom.h"
#include "homi/skeleton.h"

namespace homi {

/// Ground plane is z = 0 with +z up.
inline constexpr double kDefaultContactHeight = 0.05; // m
inline constexpr double kDefaultContactSpeed = 0.075; // m/s
inline constexpr int kDefaultBlendWindow = 5;

/// A clip as a (6J + 3) x T matrix: per column the joints' 6D rotations in
/// index order followed by the root translation.
struct MotionImage {
  std::string skeleton;
  int joints = 0;
  double fps = 30.0;
  Eigen::MatrixXd data;

  MotionImage() = default;
  MotionImage(std::string skeleton_name, int joint_count, int frames, double fps_value);

  int frames() const {
    return static_cast<int>(data.cols());
  }
  int rows() const {
    return 6 * joints + 3;
  }

  Vec6 rot6(int joint, int frame) const {
    return data.block<6, 1>(6 * joint, frame);
  }
  Vec3 root(int frame) const {
    return data.block<3, 1>(6 * joints, frame);
  }
  auto pose(int frame) const {
    return data.col(frame).head(6 * joints);
  }
  auto pose(int frame) {
    return data.col(frame).head(6 * joints);
  }
  Eigen::VectorXd frame(int n) const {
    return data.col(n);
  }
  void set_root(int frame, const Vec3& t) {
    data.block<3, 1>(6 * joints, frame) = t;
  }
  void set_rot6(int joint, int frame, const Vec6& r) {
    data.block<6, 1>(6 * joint, frame) = r;
  }

  /// Throws kShapeMismatch / kDegenerateRotation6D on violated invariants.
  void validate() const;
};

/// Frames of P tracked points: a 3P x T matrix, point p in rows 3p..3p+2.
struct PointSequence {
  Eigen::MatrixXd data;

  PointSequence() = default;
  PointSequence(int points, int frames) : data(Eigen::MatrixXd::Zero(3 * points, frames)) {}

  int points() const {
    return static_cast<int>(data.rows() / 3);
  }
  int frames() const {
    return static_cast<int>(data.cols());
  }
  Vec3 at(int point, int frame) const {
    return data.block<3, 1>(3 * point, frame);
  }
  void set(int point, int frame, const Vec3& v) {
    data.block<3, 1>(3 * point, frame) = v;
  }
};

/// Normalised time stamps in [0, 1], strictly increasing.
struct TemporalCoordinates {
  std::vector<double> tau;

  int size() const {
    return static_cast<int>(tau.size());
  }
  void validate() const;
};

struct PoseState {
  std::vector<Mat3> local_rot;
  std::vector<Mat3> global_rot;
  std::vector<Vec3> position;
};

/// Rigid-chain forward kinematics from a 6J pose vector and root position.
PoseState forward_kinematics(
    const Skeleton& skel,
    const Eigen::Ref<const Eigen::VectorXd>& pose6,
    const Vec3& root);

/// World position of marker `id` for an evaluated pose.
Vec3 marker_position(const Skeleton& skel, const PoseState& state, int id);

struct TaggedPoint {
  MarkerTag tag;
  Vec3 position;
};

/// Every marker of the skeleton in declaration order.
std::vector<TaggedPoint> markers(
    const Skeleton& skel,
    const Eigen::Ref<const Eigen::VectorXd>& pose6,
    const Vec3& root);

/// World positions of the listed markers for every frame of `motion`.
PointSequence marker_sequence(const Skeleton& skel, const MotionImage& motion, std::span<const int> ids);

/// World joint positions for every frame.
PointSequence joint_sequence(const Skeleton& skel, const MotionImage& motion);

/// World position of body sample `id`.
Vec3 sample_position(const Skeleton& skel, const PoseState& state, int id);

/// (1 - tau) t1 + tau tT per column. Throws kEmptyTau.
Eigen::Matrix3Xd root_lerp(const Vec3& first, const Vec3& last, const TemporalCoordinates& tau);

/// Per foot marker and frame: below `height_eps` and slower than
/// `speed_eps`. Frame 0 uses the forward difference.
struct ContactLabels {
  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> c; // markers x T
};

ContactLabels contact_labels(
    const PointSequence& foot_markers,
    double fps,
    double height_eps = kDefaultContactHeight,
    double speed_eps = kDefaultContactSpeed);

/// Replaces frames 0 and T-1 by `first` / `last` and eases the `window - 1`
/// frames after (before) them along the geodesic towards the first
/// untouched network frame. Rotations blend per joint by slerp, the root
/// linearly. Throws kWindowTooLarge unless 2 * window < T.
MotionImage blend_endpoints(
    const MotionImage& motion,
    const Eigen::Ref<const Eigen::VectorXd>& first,
    const Eigen::Ref<const Eigen::VectorXd>& last,
    int window = kDefaultBlendWindow);

} // namespace homi
