#include "homi/motion.h"

#include "homi/error.h"

namespace homi {

MotionImage::MotionImage(std::string skeleton_name, int joint_count, int frame_count, double fps_value)
    : skeleton(std::move(skeleton_name)),
      joints(joint_count),
      fps(fps_value),
      data(Eigen::MatrixXd::Zero(6 * joint_count + 3, frame_count)) {
  const Vec6 identity = Rotation6D::identity().r;
  for (int n = 0; n < frame_count; ++n) {
    for (int j = 0; j < joint_count; ++j) {
      set_rot6(j, n, identity);
    }
  }
}

void MotionImage::validate() const {
  HOMI_CHECK(
      data.rows() == rows(),
      ErrorCode::kShapeMismatch,
      "motion image has " + std::to_string(data.rows()) + " rows, expected " + std::to_string(rows()));
  HOMI_CHECK(frames() >= 2, ErrorCode::kShapeMismatch, "motion image needs at least two frames");
  for (int n = 0; n < frames(); ++n) {
    for (int j = 0; j < joints; ++j) {
      rot6d_to_matrix(rot6(j, n));
    }
  }
}

void TemporalCoordinates::validate() const {
  HOMI_CHECK(!tau.empty(), ErrorCode::kEmptyTau, "temporal coordinates are empty");
  for (size_t i = 0; i < tau.size(); ++i) {
    HOMI_CHECK(
        tau[i] >= 0.0 && tau[i] <= 1.0,
        ErrorCode::kInvalidArgument,
        "temporal coordinate outside [0, 1]");
    if (i > 0) {
      HOMI_CHECK(
          tau[i] > tau[i - 1], ErrorCode::kInvalidArgument, "temporal coordinates must increase");
    }
  }
}

PoseState forward_kinematics(
    const Skeleton& skel,
    const Eigen::Ref<const Eigen::VectorXd>& pose6,
    const Vec3& root) {
  const int count = skel.joint_count();
  HOMI_CHECK(pose6.size() == 6 * count, ErrorCode::kShapeMismatch, "pose vector has wrong length");
  const auto& parents = skel.parents();
  const auto& offsets = skel.offsets();

  PoseState state;
  state.local_rot.resize(count);
  state.global_rot.resize(count);
  state.position.resize(count);
  for (int j = 0; j < count; ++j) {
    state.local_rot[j] = rot6d_to_matrix(Vec6(pose6.segment<6>(6 * j)));
    const int p = parents[j];
    if (p < 0) {
      state.global_rot[j] = state.local_rot[j];
      state.position[j] = root;
    } else {
      state.global_rot[j] = state.global_rot[p] * state.local_rot[j];
      state.position[j] = state.position[p] + state.global_rot[p] * offsets[j];
    }
  }
  return state;
}

Vec3 marker_position(const Skeleton& skel, const PoseState& state, int id) {
  const Marker& m = skel.markers()[id];
  return state.position[m.joint] + state.global_rot[m.joint] * m.offset;
}

Vec3 sample_position(const Skeleton& skel, const PoseState& state, int id) {
  const BodySample& s = skel.samples()[id];
  return state.position[s.joint] + state.global_rot[s.joint] * s.offset;
}

std::vector<TaggedPoint> markers(
    const Skeleton& skel,
    const Eigen::Ref<const Eigen::VectorXd>& pose6,
    const Vec3& root) {
  const PoseState state = forward_kinematics(skel, pose6, root);
  std::vector<TaggedPoint> out;
  out.reserve(skel.markers().size());
  for (int m = 0; m < static_cast<int>(skel.markers().size()); ++m) {
    out.push_back({skel.markers()[m].tag, marker_position(skel, state, m)});
  }
  return out;
}

PointSequence marker_sequence(const Skeleton& skel, const MotionImage& motion, std::span<const int> ids) {
  PointSequence out(static_cast<int>(ids.size()), motion.frames());
  for (int n = 0; n < motion.frames(); ++n) {
    const PoseState state = forward_kinematics(skel, motion.pose(n), motion.root(n));
    for (size_t k = 0; k < ids.size(); ++k) {
      out.set(static_cast<int>(k), n, marker_position(skel, state, ids[k]));
    }
  }
  return out;
}

PointSequence joint_sequence(const Skeleton& skel, const MotionImage& motion) {
  PointSequence out(skel.joint_count(), motion.frames());
  for (int n = 0; n < motion.frames(); ++n) {
    const PoseState state = forward_kinematics(skel, motion.pose(n), motion.root(n));
    for (int j = 0; j < skel.joint_count(); ++j) {
      out.set(j, n, state.position[j]);
    }
  }
  return out;
}

Eigen::Matrix3Xd root_lerp(const Vec3& first, const Vec3& last, const TemporalCoordinates& tau) {
  HOMI_CHECK(!tau.tau.empty(), ErrorCode::kEmptyTau, "root_lerp: no temporal coordinates");
  Eigen::Matrix3Xd out(3, tau.size());
  for (int i = 0; i < tau.size(); ++i) {
    const double u = tau.tau[i];
    out.col(i) = (1.0 - u) * first + u * last;
  }
  return out;
}

ContactLabels contact_labels(const PointSequence& foot, double fps, double height_eps, double speed_eps) {
  const int count = foot.points();
  const int frames = foot.frames();
  ContactLabels labels;
  labels.c.resize(count, frames);
  for (int k = 0; k < count; ++k) {
    for (int n = 0; n < frames; ++n) {
      double speed = 0.0;
      if (frames >= 2) {
        const int a = n == 0 ? 0 : n - 1;
        const int b = n == 0 ? 1 : n;
        speed = (foot.at(k, b) - foot.at(k, a)).norm() * fps;
      }
      labels.c(k, n) = foot.at(k, n).z() < height_eps && speed < speed_eps;
    }
  }
  return labels;
}

namespace {

Quat joint_quat(const Eigen::Ref<const Eigen::VectorXd>& frame, int joint) {
  return Quat(rot6d_to_matrix(Vec6(frame.segment<6>(6 * joint))));
}

} // namespace

MotionImage blend_endpoints(
    const MotionImage& motion,
    const Eigen::Ref<const Eigen::VectorXd>& first,
    const Eigen::Ref<const Eigen::VectorXd>& last,
    int window) {
  const int frames = motion.frames();
  HOMI_CHECK(window >= 1, ErrorCode::kInvalidArgument, "blend window must be positive");
  HOMI_CHECK(
      2 * window < frames,
      ErrorCode::kWindowTooLarge,
      "blend window " + std::to_string(window) + " too large for " + std::to_string(frames) + " frames");
  HOMI_CHECK(
      first.size() == motion.rows() && last.size() == motion.rows(),
      ErrorCode::kShapeMismatch,
      "endpoint frames have the wrong height");

  MotionImage out = motion;
  out.data.col(0) = first;
  out.data.col(frames - 1) = last;

  const int joints = motion.joints;
  auto ease = [&](const Eigen::Ref<const Eigen::VectorXd>& endpoint, int anchor, int target, int step) {
    const Eigen::VectorXd net = motion.data.col(anchor);
    for (int j = 0; j < joints; ++j) {
      const Quat qa = joint_quat(endpoint, j);
      const Quat qb = joint_quat(net, j);
      for (int i = 1; i < window; ++i) {
        const double u = static_cast<double>(i) / window;
        const Mat3 m = slerp(qa, qb, u).toRotationMatrix();
        out.set_rot6(j, target + step * i, matrix_to_rot6d(m));
      }
    }
    const Vec3 ra = endpoint.segment<3>(6 * joints);
    const Vec3 rb = net.segment<3>(6 * joints);
    for (int i = 1; i < window; ++i) {
      const double u = static_cast<double>(i) / window;
      out.set_root(target + step * i, (1.0 - u) * ra + u * rb);
    }
  };
  ease(first, window, 0, 1);
  ease(last, frames - 1 - window, frames - 1, -1);
  return out;
}

} // namespace homi
