#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "homi/geom.h"

namespace homi {

/// Tags a marker carries. Palm is f0, fingertips f1..f5 (thumb to pinky).
enum class MarkerTag { kPalm, kTip1, kTip2, kTip3, kTip4, kTip5, kFoot, kGeneric };

std::string_view to_string(MarkerTag tag);
MarkerTag marker_tag_from_string(std::string_view text);

struct Marker {
  int joint = 0;
  Vec3 offset = Vec3::Zero(); // in the joint frame
  MarkerTag tag = MarkerTag::kGeneric;
};

/// Surface sample standing in for a body-mesh vertex.
struct BodySample {
  int joint = 0;
  Vec3 offset = Vec3::Zero();
  bool right_hand = false;
};

/// Articulated rigid skeleton with markers rigidly attached to joints.
///
/// Joints are stored in topological order: parent(0) == -1 and
/// parent(j) < j otherwise. Bone offsets are expressed in the parent frame.
class Skeleton {
 public:
  Skeleton() = default;
  Skeleton(
      std::string name,
      std::vector<std::string> joint_names,
      std::vector<int> parents,
      std::vector<Vec3> offsets,
      std::vector<Marker> markers,
      std::vector<BodySample> samples = {});

  /// "toy9" or "paper55".
  static Skeleton preset(std::string_view name);

  const std::string& name() const {
    return name_;
  }
  int joint_count() const {
    return static_cast<int>(parents_.size());
  }
  /// Motion-image column height, 6J + 3.
  int motion_rows() const {
    return 6 * joint_count() + 3;
  }
  const std::vector<std::string>& joint_names() const {
    return joint_names_;
  }
  const std::vector<int>& parents() const {
    return parents_;
  }
  const std::vector<Vec3>& offsets() const {
    return offsets_;
  }
  const std::vector<Marker>& markers() const {
    return markers_;
  }
  const std::vector<BodySample>& samples() const {
    return samples_;
  }

  std::optional<int> find_joint(std::string_view name) const;
  int joint_index(std::string_view name) const;

  /// Marker indices in f0..f5 order.
  const std::array<int, 6>& hand_marker_ids() const {
    return hand_ids_;
  }
  const std::vector<int>& foot_marker_ids() const {
    return foot_ids_;
  }
  const std::vector<int>& generic_marker_ids() const {
    return generic_ids_;
  }
  const std::vector<int>& right_hand_sample_ids() const {
    return right_hand_sample_ids_;
  }

 private:
  void validate_and_index();

  std::string name_;
  std::vector<std::string> joint_names_;
  std::vector<int> parents_;
  std::vector<Vec3> offsets_;
  std::vector<Marker> markers_;
  std::vector<BodySample> samples_;

  std::array<int, 6> hand_ids_{};
  std::vector<int> foot_ids_;
  std::vector<int> generic_ids_;
  std::vector<int> right_hand_sample_ids_;
};

inline constexpr int kBodySampleCount = 400;
inline constexpr int kRightHandSampleCount = 99;

} // namespace homi
