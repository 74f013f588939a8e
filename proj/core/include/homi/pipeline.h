#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "homi/config.h"
#include "homi/cvae.h"
#include "homi/infill.h"
#include "homi/metrics.h"
#include "homi/objmotion.h"
#include "homi/shape.h"
#include "homi/skeleton.h"
#include "homi/synth.h"

namespace homi {

// ---------------------------------------------------------------------------
// Training sets from labelled clips

/// Windows of every clip, as precomputed training samples.
std::vector<TrainingSample> infill_samples(
    const Skeleton& skel,
    std::span<const LabeledClip> clips,
    int window,
    int skip,
    const ThresholdConfig& thresholds);

/// Task conditioning and ground-truth offset of every object clip.
std::vector<SamplerExample> sampler_examples(std::span<const LabeledClip> clips);

/// Goal-net records at the first grasp frame and at the end of the
/// manipulation of every object clip.
std::vector<GoalNetInput> goal_examples(
    const Skeleton& skel,
    std::span<const LabeledClip> clips,
    const BasisPointSet& basis);

// ---------------------------------------------------------------------------
// Metric bundles

/// ADE over the generic markers, PSKL-J over joints and the skating ratio
/// of both sequences. Throws kShapeMismatch.
std::vector<MetricReport> motion_reports(
    const Skeleton& skel,
    const MotionImage& pred,
    const MotionImage& gt,
    const ThresholdConfig& thresholds,
    SpectrumSignal signal = SpectrumSignal::kAcceleration);

MetricReport skating_report(const Skeleton& skel, const MotionImage& motion, const ThresholdConfig& thresholds);

/// Contact ratio and interpenetration depth of the right-hand markers
/// against a primitive following `object`. `hand` and `object` must have
/// the same length.
std::vector<MetricReport> object_reports(
    const PointSequence& hand,
    const Primitive& primitive,
    const ObjectMotion& object,
    const ThresholdConfig& thresholds);

MetricReport drift_report(double drift, double gate);

/// Held-out comparison of an infill model against the interpolation
/// baseline and against jittered ground truth.
struct InfillEvaluation {
  int windows = 0;
  double ade_model = 0.0;
  double ade_baseline = 0.0;
  PsklResult pskl_model;
  PsklResult pskl_jitter;
  double skating_model = 0.0;
  double skating_gt = 0.0;
  double jitter_sd = 0.0;
};

/// Infills every window from its endpoints. PSKL-J entries are means over
/// windows; the jittered reference adds N(0, jitter_sd) to the ground-truth
/// joint positions.
InfillEvaluation evaluate_infill(
    const InfillModel& model,
    const Skeleton& skel,
    std::span<const MotionImage> windows,
    const ThresholdConfig& thresholds,
    double jitter_sd = 0.01,
    std::uint64_t seed = 0);

std::vector<MetricReport> infill_reports(const InfillEvaluation& eval, const ThresholdConfig& thresholds);

// ---------------------------------------------------------------------------
// Four-step generation

struct PipelineModels {
  const InfillModel* infill = nullptr;
  const ObjectSampler* sampler = nullptr;
  const GoalNet* goal = nullptr;
  const BasisPointSet* basis = nullptr;
};

struct PipelineInputs {
  int task = 0;
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(kBetaSize);
  /// Object shape in its canonical frame.
  ObjectCloud cloud;
  /// Analytic shape for the contact metrics, when known.
  std::optional<Primitive> primitive;
  ObjectPose initial_object;
  /// Starting human frame, 6J + 3.
  Eigen::VectorXd initial_frame;
};

struct PipelineOptions {
  PipelineSection section;
  ThresholdConfig thresholds;
  std::uint64_t seed = 0;
  /// Post-processing applied to each sampled grasp keyframe before it is
  /// used as an infill endpoint. Identity when empty.
  std::function<void(GoalNetOutput&, const ObjectPose&)> refine_grasp;
};

struct PipelineResult {
  ObjectOffset offset;
  ObjectPose final_object;
  GoalNetOutput grasp_initial;
  GoalNetOutput grasp_final;
  MotionImage approach;
  MotionImage manipulation;
  /// Approach followed by manipulation, sharing the first grasp frame.
  MotionImage motion;
  /// Object poses over the manipulation segment.
  ObjectMotion object_motion;
  double drift = 0.0;
  bool gate_passed = false;
  std::vector<MetricReport> reports;
};

/// Samples the end pose, generates grasps at both object poses, infills
/// the approach and manipulation segments and propagates the object with
/// the hand. Throws kMissingCheckpoint when a model is absent and
/// kSkeletonMismatch on inconsistent models.
PipelineResult run_pipeline(
    const Skeleton& skel,
    const PipelineModels& models,
    const PipelineInputs& inputs,
    const PipelineOptions& options);

/// Concatenates two motions whose boundary frames coincide, dropping the
/// first frame of `b`.
MotionImage join_motions(const MotionImage& a, const MotionImage& b);

} // namespace homi
