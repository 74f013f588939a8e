#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "homi/motion.h"
#include "homi/objmotion.h"
#include "homi/shape.h"

namespace homi {

/// One metric with its values and every parameter that produced it.
struct MetricReport {
  std::string name;
  std::string unit;
  bool lower_is_better = true;
  std::vector<std::pair<std::string, double>> values;
  std::vector<std::pair<std::string, double>> parameters;

  double value(const std::string& key) const;
};

inline constexpr double kSkatingHeight = 0.05;    // m
inline constexpr double kSkatingDisplacement = 0.0025; // m per frame at 30 fps
inline constexpr double kContactEps = 0.01;       // m

/// Mean per-marker Euclidean error. Throws kShapeMismatch.
double ade(const PointSequence& pred, const PointSequence& gt);

/// Fraction of the T - 1 frame transitions in which some foot marker below
/// `height_eps` moves horizontally by more than disp_eps * 30 / fps.
double skating_ratio(
    const PointSequence& foot,
    double fps,
    double height_eps = kSkatingHeight,
    double disp_eps = kSkatingDisplacement);

enum class SpectrumSignal { kAcceleration, kPosition };

struct PsklResult {
  double ab = 0.0;
  double ba = 0.0;
};

/// Power-spectrum KL divergence over joints and axes, both directions.
/// Throws kTooShort below 8 frames.
PsklResult psklj(
    const PointSequence& a,
    const PointSequence& b,
    double fps,
    SpectrumSignal signal = SpectrumSignal::kAcceleration);

/// Normalised one-sided power spectrum of `x` with additive floor 1e-8.
Eigen::VectorXd power_distribution(const Eigen::VectorXd& x);

/// Mean pairwise L2 distance. Throws kInvalidArgument below two items.
double apd(std::span<const Eigen::VectorXd> items);

/// Baseline in-between: per-joint slerp and linear root between the first
/// and last frames of `gt`, on the uniform grid of its length.
MotionImage interpolation_baseline(const MotionImage& gt);

/// Primitive placed in the world.
struct SdfObject {
  Primitive primitive;
  ObjectPose pose;

  double signed_distance(const Vec3& world) const {
    return primitive.signed_distance(pose.rot.transpose() * (world - pose.t));
  }
};

/// Per-frame object placements for a primitive following `motion`.
std::vector<SdfObject> sdf_sequence(const Primitive& primitive, const ObjectMotion& motion);

struct FrameSummary {
  std::vector<double> per_frame;
  double max = 0.0;
  double min = 0.0;
  double avg = 0.0;
};

/// Fraction of hand markers with |signed distance| <= eps, per frame.
FrameSummary contact_ratio(const PointSequence& hand, std::span<const SdfObject> objects, double eps = kContactEps);

/// Deepest marker penetration max(0, -sd) per frame.
FrameSummary interpenetration_depth(const PointSequence& hand, std::span<const SdfObject> objects);

} // namespace homi
