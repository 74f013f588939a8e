#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "homi/geom.h"
#include "homi/motion.h"
#include "homi/task.h"

namespace homi {

struct ObjectPose {
  Vec3 t = Vec3::Zero();
  Mat3 rot = Mat3::Identity();

  Vec3 to_world(const Vec3& local) const {
    return t + rot * local;
  }
  void validate() const;
};

/// Applies an offset to an initial pose.
ObjectPose apply_offset(const ObjectPose& initial, const ObjectOffset& offset);
/// Offset taking `initial` to `final_pose`.
ObjectOffset offset_between(const ObjectPose& initial, const ObjectPose& final_pose);

/// Palm (f0) and fingertip (f1..f5) positions at the first stable-grasp
/// frame, with the object pose at that frame.
struct GraspFrame {
  std::array<Vec3, 6> v_f{};
  ObjectPose object_pose_1;

  /// Throws kInvalidArgument when all five fingertip offsets vanish.
  void validate() const;
};

struct ObjectMotion {
  std::string name;
  double fps = 30.0;
  std::vector<ObjectPose> poses;
  /// Frames whose alignment was rank deficient and reused the previous
  /// rotation.
  std::vector<int> degenerate_frames;

  int frames() const {
    return static_cast<int>(poses.size());
  }
};

/// o^{f_i} = v^{f_i} - v^{f_0} for i = 1..5. Throws kMissingMarkerTag when a
/// tag is absent.
std::array<Vec3, 5> fingertip_offsets(std::span<const TaggedPoint> frame_markers);
/// Same for frame `n` of a 6-point sequence in f0..f5 order.
std::array<Vec3, 5> fingertip_offsets(const PointSequence& hand, int n);

/// Hand markers (f0..f5) of the right hand for every frame.
PointSequence hand_marker_sequence(const Skeleton& skel, const MotionImage& motion);

/// Propagates the grasped object's pose rigidly with the hand. Frame 0 of
/// `hand` is the grasp frame. Throws kAnchorMismatch when it differs from
/// grasp.v_f by more than 1e-6 and kTooShort for fewer than two frames.
ObjectMotion estimate_object_motion(
    const PointSequence& hand,
    const GraspFrame& grasp,
    bool use_rotation = true);

/// Max over probes, hand markers and frames of |d_n - d_0| where d is the
/// distance between a probe (object frame) and a hand marker.
double rigid_consistency(
    const PointSequence& hand,
    const ObjectMotion& motion,
    std::span<const Vec3> probe_points);

} // namespace homi
