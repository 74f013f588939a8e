#include "homi/skeleton.h"

#include <cmath>
#include <numbers>

#include "homi/error.h"

namespace homi {

std::string_view to_string(MarkerTag tag) {
  switch (tag) {
    case MarkerTag::kPalm:
      return "f0";
    case MarkerTag::kTip1:
      return "f1";
    case MarkerTag::kTip2:
      return "f2";
    case MarkerTag::kTip3:
      return "f3";
    case MarkerTag::kTip4:
      return "f4";
    case MarkerTag::kTip5:
      return "f5";
    case MarkerTag::kFoot:
      return "foot";
    case MarkerTag::kGeneric:
      return "generic";
  }
  return "generic";
}

MarkerTag marker_tag_from_string(std::string_view text) {
  static constexpr std::array<MarkerTag, 8> kAll = {
      MarkerTag::kPalm,
      MarkerTag::kTip1,
      MarkerTag::kTip2,
      MarkerTag::kTip3,
      MarkerTag::kTip4,
      MarkerTag::kTip5,
      MarkerTag::kFoot,
      MarkerTag::kGeneric};
  for (MarkerTag tag : kAll) {
    if (to_string(tag) == text) {
      return tag;
    }
  }
  fail(ErrorCode::kParse, "unknown marker tag '" + std::string(text) + "'");
}

Skeleton::Skeleton(
    std::string name,
    std::vector<std::string> joint_names,
    std::vector<int> parents,
    std::vector<Vec3> offsets,
    std::vector<Marker> markers,
    std::vector<BodySample> samples)
    : name_(std::move(name)),
      joint_names_(std::move(joint_names)),
      parents_(std::move(parents)),
      offsets_(std::move(offsets)),
      markers_(std::move(markers)),
      samples_(std::move(samples)) {
  validate_and_index();
}

void Skeleton::validate_and_index() {
  const int j_count = joint_count();
  HOMI_CHECK(j_count >= 1, ErrorCode::kInvalidSkeleton, "skeleton has no joints");
  HOMI_CHECK(
      static_cast<int>(offsets_.size()) == j_count && static_cast<int>(joint_names_.size()) == j_count,
      ErrorCode::kInvalidSkeleton,
      "joint arrays have inconsistent lengths");
  HOMI_CHECK(parents_[0] == -1, ErrorCode::kInvalidSkeleton, "joint 0 must be the root");
  for (int j = 1; j < j_count; ++j) {
    // Topological order rules out cycles and a second root.
    HOMI_CHECK(
        parents_[j] >= 0 && parents_[j] < j,
        ErrorCode::kInvalidSkeleton,
        "joint " + std::to_string(j) + " must have a parent with a smaller index");
  }

  hand_ids_.fill(-1);
  foot_ids_.clear();
  generic_ids_.clear();
  for (int m = 0; m < static_cast<int>(markers_.size()); ++m) {
    const Marker& marker = markers_[m];
    HOMI_CHECK(
        marker.joint >= 0 && marker.joint < j_count,
        ErrorCode::kInvalidSkeleton,
        "marker attached to unknown joint");
    switch (marker.tag) {
      case MarkerTag::kFoot:
        foot_ids_.push_back(m);
        break;
      case MarkerTag::kGeneric:
        generic_ids_.push_back(m);
        break;
      default: {
        const auto slot = static_cast<size_t>(marker.tag);
        HOMI_CHECK(
            hand_ids_[slot] == -1,
            ErrorCode::kInvalidSkeleton,
            "duplicate hand marker tag " + std::string(to_string(marker.tag)));
        hand_ids_[slot] = m;
      }
    }
  }
  for (int id : hand_ids_) {
    HOMI_CHECK(id >= 0, ErrorCode::kInvalidSkeleton, "skeleton needs exactly one each of f0..f5");
  }
  HOMI_CHECK(
      foot_ids_.size() == 8, ErrorCode::kInvalidSkeleton, "skeleton needs exactly eight foot markers");

  right_hand_sample_ids_.clear();
  for (int s = 0; s < static_cast<int>(samples_.size()); ++s) {
    HOMI_CHECK(
        samples_[s].joint >= 0 && samples_[s].joint < j_count,
        ErrorCode::kInvalidSkeleton,
        "body sample attached to unknown joint");
    if (samples_[s].right_hand) {
      right_hand_sample_ids_.push_back(s);
    }
  }
}

std::optional<int> Skeleton::find_joint(std::string_view name) const {
  for (int j = 0; j < joint_count(); ++j) {
    if (joint_names_[j] == name) {
      return j;
    }
  }
  return std::nullopt;
}

int Skeleton::joint_index(std::string_view name) const {
  auto j = find_joint(name);
  HOMI_CHECK(j.has_value(), ErrorCode::kInvalidSkeleton, "no joint named '" + std::string(name) + "'");
  return *j;
}

namespace {

struct PresetBuilder {
  std::vector<std::string> names;
  std::vector<int> parents;
  std::vector<Vec3> offsets;
  // Bone vector in the joint's own frame; used to lay out surface points.
  std::vector<Vec3> bones;
  std::vector<double> radii;

  int add(const std::string& name, int parent, Vec3 offset, Vec3 bone, double radius) {
    names.push_back(name);
    parents.push_back(parent);
    offsets.push_back(offset);
    bones.push_back(bone);
    radii.push_back(radius);
    return static_cast<int>(names.size()) - 1;
  }

  int id(std::string_view name) const {
    for (size_t j = 0; j < names.size(); ++j) {
      if (names[j] == name) {
        return static_cast<int>(j);
      }
    }
    return -1;
  }

  // Point on the skin of joint j's bone. `k` indexes the placement so
  // successive calls spread around and along the bone.
  Vec3 surface_point(int j, int k) const {
    constexpr double kGolden = 0.6180339887498949;
    const Vec3 bone = bones[j];
    const double along = 0.15 + 0.7 * std::fmod(0.5 + k * kGolden, 1.0);
    const double angle = 2.0 * std::numbers::pi * std::fmod(k * 0.3819660112501051 + 0.125, 1.0);
    Vec3 axis = bone.norm() > 1e-9 ? Vec3(bone.normalized()) : Vec3::UnitZ();
    Vec3 ref = std::abs(axis.z()) < 0.9 ? Vec3::UnitZ() : Vec3::UnitX();
    Vec3 u = axis.cross(ref).normalized();
    Vec3 v = axis.cross(u);
    return along * bone + radii[j] * (std::cos(angle) * u + std::sin(angle) * v);
  }
};

std::vector<Marker> spread_generic(const PresetBuilder& b, const std::vector<int>& joints, int count) {
  std::vector<Marker> out;
  for (int i = 0; i < count; ++i) {
    const int j = joints[i % joints.size()];
    const int k = i / static_cast<int>(joints.size());
    out.push_back({j, b.surface_point(j, k * 7 + i), MarkerTag::kGeneric});
  }
  return out;
}

std::vector<BodySample> spread_samples(
    const PresetBuilder& b,
    const std::vector<int>& hand_joints,
    const std::vector<int>& body_joints) {
  std::vector<BodySample> out;
  for (int i = 0; i < kRightHandSampleCount; ++i) {
    const int j = hand_joints[i % hand_joints.size()];
    out.push_back({j, b.surface_point(j, 3 * i + 1), true});
  }
  for (int i = 0; i < kBodySampleCount - kRightHandSampleCount; ++i) {
    const int j = body_joints[i % body_joints.size()];
    out.push_back({j, b.surface_point(j, 5 * i + 2), false});
  }
  return out;
}

// Right-hand markers in the wrist frame; rest pose hangs the arm along -z
// with the palm facing +y (towards the body midline).
void add_hand_markers(std::vector<Marker>& markers, int wrist) {
  markers.push_back({wrist, Vec3(0.0, 0.015, -0.09), MarkerTag::kPalm});
  markers.push_back({wrist, Vec3(0.045, 0.035, -0.13), MarkerTag::kTip1});
  markers.push_back({wrist, Vec3(0.03, 0.01, -0.185), MarkerTag::kTip2});
  markers.push_back({wrist, Vec3(0.01, 0.005, -0.195), MarkerTag::kTip3});
  markers.push_back({wrist, Vec3(-0.01, 0.01, -0.185), MarkerTag::kTip4});
  markers.push_back({wrist, Vec3(-0.03, 0.015, -0.165), MarkerTag::kTip5});
}

// Four markers per foot around `center` in the frame of `joint`.
void add_foot_markers(std::vector<Marker>& markers, int joint, const Vec3& center) {
  for (double dx : {0.06, -0.04}) {
    for (double dy : {0.03, -0.03}) {
      markers.push_back({joint, center + Vec3(dx, dy, 0.0), MarkerTag::kFoot});
    }
  }
}

Skeleton make_toy9() {
  PresetBuilder b;
  const int pelvis = b.add("pelvis", -1, Vec3::Zero(), Vec3(0, 0, 0.2), 0.12);
  const int lhip = b.add("left_hip", pelvis, Vec3(0, 0.1, -0.05), Vec3(0, 0, -0.44), 0.07);
  const int rhip = b.add("right_hip", pelvis, Vec3(0, -0.1, -0.05), Vec3(0, 0, -0.44), 0.07);
  const int lknee = b.add("left_knee", lhip, Vec3(0, 0, -0.44), Vec3(0, 0, -0.42), 0.05);
  const int rknee = b.add("right_knee", rhip, Vec3(0, 0, -0.44), Vec3(0, 0, -0.42), 0.05);
  const int spine = b.add("spine3", pelvis, Vec3(0, 0, 0.45), Vec3(0, 0, 0.25), 0.13);
  const int rsh = b.add("right_shoulder", spine, Vec3(0, -0.18, 0.05), Vec3(0, 0, -0.29), 0.045);
  const int relb = b.add("right_elbow", rsh, Vec3(0, 0, -0.29), Vec3(0, 0, -0.26), 0.04);
  const int rwr = b.add("right_wrist", relb, Vec3(0, 0, -0.26), Vec3(0, 0, -0.15), 0.03);

  // Knees carry the feet: the shin ends 0.42 m below the knee.
  std::vector<Marker> markers;
  add_hand_markers(markers, rwr);
  add_foot_markers(markers, lknee, Vec3(0, 0, -0.42));
  add_foot_markers(markers, rknee, Vec3(0, 0, -0.42));
  auto generic = spread_generic(b, {pelvis, lhip, rhip, lknee, rknee, spine, rsh, relb, rwr}, 36);
  markers.insert(markers.end(), generic.begin(), generic.end());

  auto samples = spread_samples(b, {relb, rwr}, {pelvis, lhip, rhip, lknee, rknee, spine, rsh});
  return Skeleton("toy9", b.names, b.parents, b.offsets, markers, samples);
}

Skeleton make_paper55() {
  PresetBuilder b;
  const int pelvis = b.add("pelvis", -1, Vec3::Zero(), Vec3(0, 0, 0.12), 0.12);
  const int lhip = b.add("left_hip", pelvis, Vec3(0, 0.09, -0.08), Vec3(0, 0, -0.40), 0.07);
  const int rhip = b.add("right_hip", pelvis, Vec3(0, -0.09, -0.08), Vec3(0, 0, -0.40), 0.07);
  const int sp1 = b.add("spine1", pelvis, Vec3(0, 0, 0.12), Vec3(0, 0, 0.14), 0.13);
  const int lknee = b.add("left_knee", lhip, Vec3(0, 0, -0.40), Vec3(0, 0, -0.42), 0.05);
  const int rknee = b.add("right_knee", rhip, Vec3(0, 0, -0.40), Vec3(0, 0, -0.42), 0.05);
  const int sp2 = b.add("spine2", sp1, Vec3(0, 0, 0.14), Vec3(0, 0, 0.06), 0.13);
  const int lank = b.add("left_ankle", lknee, Vec3(0, 0, -0.42), Vec3(0.12, 0, -0.02), 0.04);
  const int rank = b.add("right_ankle", rknee, Vec3(0, 0, -0.42), Vec3(0.12, 0, -0.02), 0.04);
  const int sp3 = b.add("spine3", sp2, Vec3(0, 0, 0.06), Vec3(0, 0, 0.12), 0.14);
  b.add("left_foot", lank, Vec3(0.12, 0, -0.02), Vec3(0.05, 0, 0), 0.03);
  b.add("right_foot", rank, Vec3(0.12, 0, -0.02), Vec3(0.05, 0, 0), 0.03);
  const int neck = b.add("neck", sp3, Vec3(0, 0, 0.12), Vec3(0, 0, 0.1), 0.05);
  const int lcol = b.add("left_collar", sp3, Vec3(0, 0.08, 0.12), Vec3(0, 0.1, 0.04), 0.05);
  const int rcol = b.add("right_collar", sp3, Vec3(0, -0.08, 0.12), Vec3(0, -0.1, 0.04), 0.05);
  const int head = b.add("head", neck, Vec3(0, 0, 0.1), Vec3(0, 0, 0.18), 0.09);
  const int lsh = b.add("left_shoulder", lcol, Vec3(0, 0.1, 0.04), Vec3(0, 0, -0.28), 0.045);
  const int rsh = b.add("right_shoulder", rcol, Vec3(0, -0.1, 0.04), Vec3(0, 0, -0.28), 0.045);
  const int lelb = b.add("left_elbow", lsh, Vec3(0, 0, -0.28), Vec3(0, 0, -0.25), 0.04);
  const int relb = b.add("right_elbow", rsh, Vec3(0, 0, -0.28), Vec3(0, 0, -0.25), 0.04);
  const int lwr = b.add("left_wrist", lelb, Vec3(0, 0, -0.25), Vec3(0, 0, -0.08), 0.03);
  const int rwr = b.add("right_wrist", relb, Vec3(0, 0, -0.25), Vec3(0, 0, -0.08), 0.03);
  b.add("jaw", head, Vec3(0.05, 0, -0.02), Vec3(0.05, 0, -0.03), 0.02);
  b.add("left_eye_smplhf", head, Vec3(0.08, 0.03, 0.04), Vec3(0.01, 0, 0), 0.01);
  b.add("right_eye_smplhf", head, Vec3(0.08, -0.03, 0.04), Vec3(0.01, 0, 0), 0.01);

  // Finger chains, palm facing +y in the rest pose.
  const std::array<std::pair<const char*, double>, 5> fingers = {
      {{"index", 0.03}, {"middle", 0.01}, {"pinky", -0.03}, {"ring", -0.01}, {"thumb", 0.045}}};
  std::vector<int> right_fingers;
  for (const char* side : {"left", "right"}) {
    const int wrist = std::string(side) == "left" ? lwr : rwr;
    for (const auto& [finger, x] : fingers) {
      const bool thumb = std::string(finger) == "thumb";
      const Vec3 base = thumb ? Vec3(x, 0.025, -0.04) : Vec3(x, 0.0, -0.08);
      const Vec3 step(0, 0, -0.033);
      int parent = wrist;
      for (int k = 1; k <= 3; ++k) {
        const std::string name = std::string(side) + "_" + finger + std::to_string(k);
        parent = b.add(name, parent, k == 1 ? base : step, step, 0.01);
        if (std::string(side) == "right") {
          right_fingers.push_back(parent);
        }
      }
    }
  }

  std::vector<Marker> markers;
  add_hand_markers(markers, rwr);
  add_foot_markers(markers, lank, Vec3::Zero());
  add_foot_markers(markers, rank, Vec3::Zero());
  const std::vector<int> body = {
      pelvis, lhip, rhip, sp1, lknee, rknee, sp2, lank, rank, sp3, neck,
      lcol, rcol, head, lsh, rsh, lelb, relb, lwr, rwr};
  auto generic = spread_generic(b, body, 99);
  markers.insert(markers.end(), generic.begin(), generic.end());

  std::vector<int> hand_joints = {relb, rwr};
  hand_joints.insert(hand_joints.end(), right_fingers.begin(), right_fingers.end());
  std::vector<int> other = {pelvis, lhip, rhip, sp1, lknee, rknee, sp2, lank, rank,
                            sp3, neck, lcol, rcol, head, lsh, rsh, lelb, lwr};
  auto samples = spread_samples(b, hand_joints, other);
  return Skeleton("paper55", b.names, b.parents, b.offsets, markers, samples);
}

} // namespace

Skeleton Skeleton::preset(std::string_view name) {
  if (name == "toy9") {
    return make_toy9();
  }
  if (name == "paper55") {
    return make_paper55();
  }
  fail(ErrorCode::kConfig, "unknown skeleton preset '" + std::string(name) + "'");
}

} // namespace homi
