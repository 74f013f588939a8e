#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "homi/infill.h"
#include "homi/motion.h"
#include "homi/objmotion.h"
#include "homi/shape.h"
#include "homi/skeleton.h"
#include "homi/task.h"

namespace homi {

enum class ScenarioKind { kReachLift, kReachPass, kReachPlace, kWalkCycle };

std::string to_string(ScenarioKind kind);
ScenarioKind scenario_kind_from_string(const std::string& text);

/// Task vocabulary of the object scenarios: 0 lift, 1 pass, 2 place.
inline constexpr int kTaskCount = 3;
/// Task id of a scenario kind, -1 for walking.
int task_of(ScenarioKind kind);

inline constexpr double kGenerationFps = 120.0;
inline constexpr double kDatasetFps = 30.0;
/// Standard deviation of the noise added to the offset rule.
inline constexpr double kOffsetNoise = 0.02; // m (and rad for the angle)

struct Scenario {
  ScenarioKind kind = ScenarioKind::kReachLift;
  double duration = 4.0; // s
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(kBetaSize);
  Primitive object = Primitive::sphere(0.05);
  std::string object_name = "object";
  std::uint64_t seed = 0;

  int task() const {
    return task_of(kind);
  }

  /// Draws beta (uniform in [-1, 1]), duration and object from `seed`.
  static Scenario sample(ScenarioKind kind, std::uint64_t seed);
};

/// Mean object offset of a task for a body shape:
///   lift:  t = (0, 0, 0.3 + 0.2 b0),                      yaw 0.2 b1
///   pass:  t = (0.10 + 0.05 b1, 0.20 + 0.10 b0, 0.05 + 0.05 b2), yaw 0.4 + 0.2 b1
///   place: t = (0.05 + 0.05 b2, -0.10 - 0.08 b0, -0.05 + 0.05 b1), yaw -0.2 b1
/// The yaw is a rotation about world z.
ObjectOffset offset_rule(int task, const Eigen::VectorXd& beta);
/// Yaw angle of the rule, exposed for tests.
double offset_rule_yaw(int task, const Eigen::VectorXd& beta);

struct LabeledClip {
  Scenario scenario;
  MotionImage motion;
  /// Foot-marker ground-truth stance, 8 x T.
  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> stance;

  // Object scenarios only.
  bool has_object = false;
  ObjectCloud cloud;
  ObjectMotion object_motion;
  int grasp_frame = -1;
  int manipulation_end = -1;
  ObjectOffset offset;

  TaskSpec task_spec() const;
};

/// Generates at 120 fps and downsamples to 30 fps. Throws
/// kInfeasibleScenario when the clip would be shorter than 64 frames or
/// the targets are out of reach.
LabeledClip gen_clip(const Skeleton& skel, const Scenario& scenario);

/// Keeps every (from / to)-th frame. Throws kNonIntegerStride.
MotionImage downsample(const MotionImage& motion, double from_fps, double to_fps);

struct TrainingWindow {
  MotionImage motion;
  ContextInput context;
  int clip = 0;
  int start = 0;
};

/// Windows of `win` frames starting every `skip` frames. Throws
/// kClipTooShort.
std::vector<TrainingWindow> window_dataset(std::span<const MotionImage> clips, int win = 64, int skip = 16);

/// `count` clips cycling through lift, pass, place and walk. Infeasible
/// draws are retried with the next derived seed.
std::vector<LabeledClip> gen_dataset(const Skeleton& skel, int count, std::uint64_t seed);

} // namespace homi
