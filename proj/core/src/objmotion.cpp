#include "homi/objmotion.h"

#include <algorithm>
#include <cmath>

#include "homi/error.h"

namespace homi {

void ObjectPose::validate() const {
  HOMI_CHECK(t.allFinite(), ErrorCode::kInvalidArgument, "object translation is not finite");
  HOMI_CHECK(is_rotation(rot, 1e-9), ErrorCode::kInvalidArgument, "object orientation is not a rotation");
}

ObjectPose apply_offset(const ObjectPose& initial, const ObjectOffset& offset) {
  return {initial.t + offset.t_off, rot6d_to_matrix(offset.r_off) * initial.rot};
}

ObjectOffset offset_between(const ObjectPose& initial, const ObjectPose& final_pose) {
  ObjectOffset out;
  out.t_off = final_pose.t - initial.t;
  out.r_off = Rotation6D(matrix_to_rot6d(final_pose.rot * initial.rot.transpose()));
  return out;
}

void GraspFrame::validate() const {
  double total = 0.0;
  for (int i = 1; i < 6; ++i) {
    total += (v_f[i] - v_f[0]).norm();
  }
  HOMI_CHECK(total > 0.0, ErrorCode::kInvalidArgument, "grasp fingertip offsets are all zero");
  object_pose_1.validate();
}

std::array<Vec3, 5> fingertip_offsets(std::span<const TaggedPoint> frame_markers) {
  std::array<const Vec3*, 6> found{};
  for (const TaggedPoint& p : frame_markers) {
    const auto slot = static_cast<size_t>(p.tag);
    if (slot < found.size()) {
      found[slot] = &p.position;
    }
  }
  for (size_t i = 0; i < found.size(); ++i) {
    HOMI_CHECK(
        found[i] != nullptr,
        ErrorCode::kMissingMarkerTag,
        "hand marker " + std::string(to_string(static_cast<MarkerTag>(i))) + " is missing");
  }
  std::array<Vec3, 5> out;
  for (int i = 0; i < 5; ++i) {
    out[i] = *found[i + 1] - *found[0];
  }
  return out;
}

std::array<Vec3, 5> fingertip_offsets(const PointSequence& hand, int n) {
  HOMI_CHECK(hand.points() == 6, ErrorCode::kMissingMarkerTag, "hand sequence must hold f0..f5");
  std::array<Vec3, 5> out;
  const Vec3 palm = hand.at(0, n);
  for (int i = 0; i < 5; ++i) {
    out[i] = hand.at(i + 1, n) - palm;
  }
  return out;
}

PointSequence hand_marker_sequence(const Skeleton& skel, const MotionImage& motion) {
  const auto& ids = skel.hand_marker_ids();
  return marker_sequence(skel, motion, std::span<const int>(ids.data(), ids.size()));
}

namespace {

Vec3 centroid(const PointSequence& hand, int n) {
  Vec3 c = Vec3::Zero();
  for (int i = 0; i < 6; ++i) {
    c += hand.at(i, n);
  }
  return c / 6.0;
}

} // namespace

ObjectMotion estimate_object_motion(const PointSequence& hand, const GraspFrame& grasp, bool use_rotation) {
  HOMI_CHECK(hand.points() == 6, ErrorCode::kMissingMarkerTag, "hand sequence must hold f0..f5");
  HOMI_CHECK(hand.frames() >= 2, ErrorCode::kTooShort, "object motion needs at least two frames");
  grasp.validate();
  for (int i = 0; i < 6; ++i) {
    HOMI_CHECK(
        (hand.at(i, 0) - grasp.v_f[i]).norm() <= 1e-6,
        ErrorCode::kAnchorMismatch,
        "first hand frame does not match the grasp frame");
  }

  const std::array<Vec3, 5> o1 = fingertip_offsets(hand, 0);
  const Vec3 c1 = centroid(hand, 0);
  const ObjectPose& pose1 = grasp.object_pose_1;

  ObjectMotion out;
  out.poses.resize(hand.frames());
  out.poses[0] = pose1;
  Mat3 previous = Mat3::Identity();
  for (int n = 1; n < hand.frames(); ++n) {
    Mat3 r = Mat3::Identity();
    if (use_rotation) {
      const std::array<Vec3, 5> on = fingertip_offsets(hand, n);
      const KabschResult k = kabsch(on, o1);
      if (k.degenerate) {
        r = previous;
        out.degenerate_frames.push_back(n);
      } else {
        r = k.rotation;
      }
    }
    previous = r;
    const Mat3 rt = r.transpose();
    out.poses[n].rot = rt * pose1.rot;
    out.poses[n].t = centroid(hand, n) + rt * (pose1.t - c1);
  }
  return out;
}

double rigid_consistency(const PointSequence& hand, const ObjectMotion& motion, std::span<const Vec3> probes) {
  HOMI_CHECK(
      motion.frames() == hand.frames(), ErrorCode::kShapeMismatch, "object motion and hand lengths differ");
  double drift = 0.0;
  if (motion.frames() == 0) {
    return drift;
  }
  for (const Vec3& q : probes) {
    for (int i = 0; i < hand.points(); ++i) {
      const double d0 = (motion.poses[0].to_world(q) - hand.at(i, 0)).norm();
      for (int n = 1; n < hand.frames(); ++n) {
        const double dn = (motion.poses[n].to_world(q) - hand.at(i, n)).norm();
        drift = std::max(drift, std::abs(dn - d0));
      }
    }
  }
  return drift;
}

} // namespace homi
