#include "homi/pipeline.h"

#include <algorithm>

#include "homi/error.h"

namespace homi {

namespace {

constexpr int kMaxProbes = 64;

void add_summary(MetricReport& r, const FrameSummary& s) {
  r.values = {{"max", s.max}, {"min", s.min}, {"avg", s.avg}};
}

} // namespace

std::vector<TrainingSample> infill_samples(
    const Skeleton& skel,
    std::span<const LabeledClip> clips,
    int window,
    int skip,
    const ThresholdConfig& thresholds) {
  std::vector<MotionImage> motions;
  motions.reserve(clips.size());
  for (const LabeledClip& c : clips) {
    motions.push_back(c.motion);
  }
  std::vector<TrainingSample> out;
  for (const TrainingWindow& w : window_dataset(motions, window, skip)) {
    out.push_back(make_training_sample(skel, w.motion, thresholds.contact_height, thresholds.contact_speed));
  }
  return out;
}

std::vector<SamplerExample> sampler_examples(std::span<const LabeledClip> clips) {
  std::vector<SamplerExample> out;
  for (const LabeledClip& c : clips) {
    if (c.has_object) {
      out.push_back({c.task_spec(), c.offset});
    }
  }
  return out;
}

std::vector<GoalNetInput> goal_examples(
    const Skeleton& skel,
    std::span<const LabeledClip> clips,
    const BasisPointSet& basis) {
  std::vector<GoalNetInput> out;
  for (const LabeledClip& c : clips) {
    if (!c.has_object) {
      continue;
    }
    for (int n : {c.grasp_frame, c.manipulation_end}) {
      const ObjectPose& pose = c.object_motion.poses.at(static_cast<size_t>(n));
      out.push_back(make_goal_input(
          skel, c.motion.frame(n), c.scenario.beta, pose.t, pose.rot, c.cloud, basis, c.scenario.task(), kTaskCount));
    }
  }
  return out;
}

std::vector<MetricReport> motion_reports(
    const Skeleton& skel,
    const MotionImage& pred,
    const MotionImage& gt,
    const ThresholdConfig& thresholds,
    SpectrumSignal signal) {
  HOMI_CHECK(
      pred.joints == skel.joint_count() && gt.joints == skel.joint_count(),
      ErrorCode::kSkeletonMismatch,
      "motions do not match the skeleton");
  HOMI_CHECK(pred.frames() == gt.frames(), ErrorCode::kShapeMismatch, "motions differ in length");
  std::vector<MetricReport> out;

  const auto& generic = skel.generic_marker_ids();
  MetricReport a{"ade", "m", true, {}, {}};
  a.values = {{"value", ade(marker_sequence(skel, pred, generic), marker_sequence(skel, gt, generic))}};
  a.parameters = {{"markers", static_cast<double>(generic.size())}, {"frames", static_cast<double>(pred.frames())}};
  out.push_back(a);

  const PsklResult p = psklj(joint_sequence(skel, pred), joint_sequence(skel, gt), pred.fps, signal);
  MetricReport k{"psklj", "nats", true, {}, {}};
  k.values = {{"pred_gt", p.ab}, {"gt_pred", p.ba}};
  k.parameters = {
      {"fps", pred.fps},
      {"acceleration_signal", signal == SpectrumSignal::kAcceleration ? 1.0 : 0.0},
      {"floor", 1e-8}};
  out.push_back(k);

  MetricReport sp = skating_report(skel, pred, thresholds);
  MetricReport sg = skating_report(skel, gt, thresholds);
  MetricReport s{"skating_ratio", "fraction", true, {}, sp.parameters};
  s.values = {{"pred", sp.values[0].second}, {"gt", sg.values[0].second}};
  out.push_back(s);
  return out;
}

MetricReport skating_report(const Skeleton& skel, const MotionImage& motion, const ThresholdConfig& thresholds) {
  const PointSequence foot = marker_sequence(skel, motion, skel.foot_marker_ids());
  MetricReport r{"skating_ratio", "fraction", true, {}, {}};
  r.values = {
      {"value", skating_ratio(foot, motion.fps, thresholds.skating_height, thresholds.skating_displacement)}};
  r.parameters = {
      {"height_eps", thresholds.skating_height},
      {"disp_eps", thresholds.skating_displacement},
      {"fps", motion.fps}};
  return r;
}

std::vector<MetricReport> object_reports(
    const PointSequence& hand,
    const Primitive& primitive,
    const ObjectMotion& object,
    const ThresholdConfig& thresholds) {
  HOMI_CHECK(hand.frames() == object.frames(), ErrorCode::kShapeMismatch, "hand and object lengths differ");
  const std::vector<SdfObject> sdf = sdf_sequence(primitive, object);
  std::vector<MetricReport> out;
  MetricReport c{"contact_ratio", "fraction", false, {}, {}};
  add_summary(c, contact_ratio(hand, sdf, thresholds.contact_eps));
  c.parameters = {{"eps", thresholds.contact_eps}, {"markers", static_cast<double>(hand.points())}};
  out.push_back(c);
  MetricReport d{"interpenetration_depth", "m", true, {}, {}};
  add_summary(d, interpenetration_depth(hand, sdf));
  d.parameters = {{"markers", static_cast<double>(hand.points())}};
  out.push_back(d);
  return out;
}

MetricReport drift_report(double drift, double gate) {
  MetricReport r{"rigid_consistency", "m", true, {}, {}};
  r.values = {{"drift", drift}, {"passed", drift < gate ? 1.0 : 0.0}};
  r.parameters = {{"gate", gate}};
  return r;
}

InfillEvaluation evaluate_infill(
    const InfillModel& model,
    const Skeleton& skel,
    std::span<const MotionImage> windows,
    const ThresholdConfig& thresholds,
    double jitter_sd,
    std::uint64_t seed) {
  HOMI_CHECK(!windows.empty(), ErrorCode::kInvalidArgument, "no windows to evaluate");
  InfillEvaluation ev;
  ev.windows = static_cast<int>(windows.size());
  ev.jitter_sd = jitter_sd;
  Rng rng = make_rng(seed);
  const auto& generic = skel.generic_marker_ids();
  for (const MotionImage& gt : windows) {
    const int T = gt.frames();
    const MotionImage pred = infill(
        model, gt.frame(0), gt.frame(T - 1), make_tau(TauKind::kUniform, T), gt.fps, thresholds.blend_window);
    const MotionImage base = interpolation_baseline(gt);
    const PointSequence gt_markers = marker_sequence(skel, gt, generic);
    ev.ade_model += ade(marker_sequence(skel, pred, generic), gt_markers);
    ev.ade_baseline += ade(marker_sequence(skel, base, generic), gt_markers);

    const PointSequence gt_joints = joint_sequence(skel, gt);
    PointSequence jittered = gt_joints;
    for (Eigen::Index i = 0; i < jittered.data.size(); ++i) {
      jittered.data(i) += normal(rng, 0.0, jitter_sd);
    }
    const PsklResult pm = psklj(joint_sequence(skel, pred), gt_joints, gt.fps);
    const PsklResult pj = psklj(jittered, gt_joints, gt.fps);
    ev.pskl_model.ab += pm.ab;
    ev.pskl_model.ba += pm.ba;
    ev.pskl_jitter.ab += pj.ab;
    ev.pskl_jitter.ba += pj.ba;
    ev.skating_model += skating_report(skel, pred, thresholds).values[0].second;
    ev.skating_gt += skating_report(skel, gt, thresholds).values[0].second;
  }
  const double k = 1.0 / ev.windows;
  ev.ade_model *= k;
  ev.ade_baseline *= k;
  ev.pskl_model.ab *= k;
  ev.pskl_model.ba *= k;
  ev.pskl_jitter.ab *= k;
  ev.pskl_jitter.ba *= k;
  ev.skating_model *= k;
  ev.skating_gt *= k;
  return ev;
}

std::vector<MetricReport> infill_reports(const InfillEvaluation& ev, const ThresholdConfig& thresholds) {
  const double w = ev.windows;
  std::vector<MetricReport> out;
  out.push_back({"ade", "m", true, {{"model", ev.ade_model}, {"baseline", ev.ade_baseline}}, {{"windows", w}}});
  out.push_back(
      {"psklj",
       "nats",
       true,
       {{"model_gt", ev.pskl_model.ab},
        {"gt_model", ev.pskl_model.ba},
        {"jitter_gt", ev.pskl_jitter.ab},
        {"gt_jitter", ev.pskl_jitter.ba}},
       {{"windows", w}, {"jitter_sd", ev.jitter_sd}, {"floor", 1e-8}}});
  out.push_back(
      {"skating_ratio",
       "fraction",
       true,
       {{"model", ev.skating_model}, {"gt", ev.skating_gt}},
       {{"windows", w},
        {"height_eps", thresholds.skating_height},
        {"disp_eps", thresholds.skating_displacement}}});
  return out;
}

MotionImage join_motions(const MotionImage& a, const MotionImage& b) {
  HOMI_CHECK(
      a.skeleton == b.skeleton && a.joints == b.joints, ErrorCode::kSkeletonMismatch, "cannot join motions");
  HOMI_CHECK(a.frames() >= 1 && b.frames() >= 1, ErrorCode::kTooShort, "cannot join empty motions");
  MotionImage out(a.skeleton, a.joints, a.frames() + b.frames() - 1, a.fps);
  out.data.leftCols(a.frames()) = a.data;
  out.data.rightCols(b.frames() - 1) = b.data.rightCols(b.frames() - 1);
  return out;
}

PipelineResult run_pipeline(
    const Skeleton& skel,
    const PipelineModels& models,
    const PipelineInputs& inputs,
    const PipelineOptions& options) {
  HOMI_CHECK(models.infill != nullptr, ErrorCode::kMissingCheckpoint, "pipeline needs an infill model");
  HOMI_CHECK(models.sampler != nullptr, ErrorCode::kMissingCheckpoint, "pipeline needs an object sampler");
  HOMI_CHECK(models.goal != nullptr, ErrorCode::kMissingCheckpoint, "pipeline needs a goal net");
  HOMI_CHECK(models.basis != nullptr, ErrorCode::kInvalidArgument, "pipeline needs a BPS basis");
  const int joints = skel.joint_count();
  HOMI_CHECK(
      models.infill->spec().skeleton == skel.name() && models.infill->spec().joints == joints,
      ErrorCode::kSkeletonMismatch,
      "infill model was trained for skeleton " + models.infill->spec().skeleton);
  HOMI_CHECK(models.goal->joints() == joints, ErrorCode::kSkeletonMismatch, "goal net joint count differs");
  HOMI_CHECK(
      models.sampler->task_count() == models.goal->task_count(),
      ErrorCode::kSkeletonMismatch,
      "sampler and goal net disagree on the task vocabulary");
  HOMI_CHECK(
      inputs.initial_frame.size() == skel.motion_rows(), ErrorCode::kShapeMismatch, "initial frame size");
  inputs.cloud.validate();
  inputs.initial_object.validate();

  PipelineResult res;
  const PipelineSection& sec = options.section;

  // Object end pose.
  TaskSpec task;
  task.task = inputs.task;
  task.task_count = models.sampler->task_count();
  task.beta = inputs.beta;
  task.t_init = inputs.initial_object.t;
  task.r_init = Rotation6D(matrix_to_rot6d(inputs.initial_object.rot));
  task.validate();
  Rng sampler_rng = make_rng(derive_seed(options.seed, 21));
  res.offset = sampler_sample(*models.sampler, task, sampler_rng);
  res.final_object = apply_offset(inputs.initial_object, res.offset);

  // Grasp keyframes at both object poses.
  Rng goal_rng = make_rng(derive_seed(options.seed, 22));
  auto grasp_at = [&](const ObjectPose& pose) {
    const Eigen::VectorXd b_o = oriented_bps(inputs.cloud, pose.rot, *models.basis);
    GoalNetOutput g = goal_sample(*models.goal, inputs.beta, b_o, pose.t, inputs.task, goal_rng);
    if (options.refine_grasp) {
      options.refine_grasp(g, pose);
    }
    return g;
  };
  res.grasp_initial = grasp_at(inputs.initial_object);
  res.grasp_final = grasp_at(res.final_object);

  // Two infill segments joined at the first grasp.
  const Eigen::VectorXd g1 = res.grasp_initial.frame();
  const Eigen::VectorXd g2 = res.grasp_final.frame();
  const int window = options.thresholds.blend_window;
  res.approach = infill(
      *models.infill, inputs.initial_frame, g1, make_tau(TauKind::kUniform, sec.approach_frames), sec.fps, window);
  res.manipulation =
      infill(*models.infill, g1, g2, make_tau(TauKind::kUniform, sec.manipulation_frames), sec.fps, window);
  res.motion = join_motions(res.approach, res.manipulation);

  // Object follows the hand from the first grasp on.
  const PointSequence hand = hand_marker_sequence(skel, res.manipulation);
  GraspFrame grasp;
  for (int i = 0; i < 6; ++i) {
    grasp.v_f[i] = hand.at(i, 0);
  }
  grasp.object_pose_1 = inputs.initial_object;
  res.object_motion = estimate_object_motion(hand, grasp, sec.use_rotation);
  res.object_motion.name = inputs.cloud.name;
  res.object_motion.fps = sec.fps;

  const int probes = std::min<int>(kMaxProbes, static_cast<int>(inputs.cloud.points.size()));
  res.drift = rigid_consistency(
      hand, res.object_motion, std::span<const Vec3>(inputs.cloud.points.data(), static_cast<size_t>(probes)));
  res.gate_passed = res.drift < sec.drift_gate;

  res.reports.push_back(drift_report(res.drift, sec.drift_gate));
  res.reports.push_back(skating_report(skel, res.motion, options.thresholds));
  if (inputs.primitive) {
    for (MetricReport& r : object_reports(hand, *inputs.primitive, res.object_motion, options.thresholds)) {
      res.reports.push_back(std::move(r));
    }
  }
  MetricReport off{"object_offset", "m", false, {}, {}};
  off.values = {
      {"tx", res.offset.t_off.x()},
      {"ty", res.offset.t_off.y()},
      {"tz", res.offset.t_off.z()},
      {"angle", rotation_angle_between(res.final_object.rot, inputs.initial_object.rot)}};
  off.parameters = {{"task", static_cast<double>(inputs.task)}};
  res.reports.push_back(off);
  return res;
}

} // namespace homi
