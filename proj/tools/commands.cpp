#include <algorithm>
#include <cstdio>
#include <sstream>

#include <homi/error.h>
#include <homi/io.h>
#include <homi/pipeline.h>
#include <homi/synth.h>

#include "cli.h"

namespace homi::cli {

namespace fs = std::filesystem;

PipelineConfig resolve_config(const CommonOptions& common) {
  PipelineConfig c = common.config_path.empty() ? PipelineConfig{} : load_config(common.config_path);
  apply_env_overrides(c);
  if (common.seed) {
    c.seed = *common.seed;
  }
  if (common.threads) {
    c.threads = *common.threads;
  }
  if (!common.skeleton.empty()) {
    c.skeleton = common.skeleton;
  }
  c.validate();
  return c;
}

void prepare_output(const fs::path& dir, const PipelineConfig& config) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  HOMI_CHECK(!ec, ErrorCode::kIo, "cannot create " + dir.string() + ": " + ec.message());
  io::write_text(dir / "config.json", config_to_json(config));
}

Primitive parse_primitive(const std::string& spec) {
  const auto colon = spec.find(':');
  HOMI_CHECK(colon != std::string::npos, ErrorCode::kConfig, "primitive spec needs kind:params, got '" + spec + "'");
  const std::string kind = spec.substr(0, colon);
  std::vector<double> v;
  std::stringstream ss(spec.substr(colon + 1));
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      size_t used = 0;
      v.push_back(std::stod(item, &used));
      HOMI_CHECK(used == item.size(), ErrorCode::kConfig, "bad number '" + item + "' in primitive spec");
    } catch (const std::logic_error&) {
      fail(ErrorCode::kConfig, "bad number '" + item + "' in primitive spec");
    }
  }
  Primitive p;
  if (kind == "sphere" && v.size() == 1) {
    p = Primitive::sphere(v[0]);
  } else if (kind == "box" && v.size() == 3) {
    p = Primitive::box(Vec3(v[0], v[1], v[2]));
  } else if (kind == "capsule" && v.size() == 2) {
    p = Primitive::capsule(v[0], v[1]);
  } else {
    fail(ErrorCode::kConfig, "unrecognised primitive spec '" + spec + "'");
  }
  try {
    p.validate();
  } catch (const Error& e) {
    fail(ErrorCode::kConfig, e.what());
  }
  return p;
}

void log(const CommonOptions& common, const std::string& line) {
  if (!common.quiet) {
    std::fprintf(stderr, "%s\n", line.c_str());
  }
}

namespace {

fs::path out_dir(const CommonOptions& common, const PipelineConfig& config) {
  return common.out.empty() ? fs::path(config.paths.out_dir) : fs::path(common.out);
}

std::string data_dir(const std::string& flag, const PipelineConfig& config) {
  return flag.empty() ? config.paths.data_dir : flag;
}

/// Training clips first, the trailing `held_out` clips last.
std::span<const LabeledClip> training_split(const std::vector<LabeledClip>& clips, const PipelineConfig& config) {
  const int held = config.data.held_out;
  HOMI_CHECK(
      held < static_cast<int>(clips.size()),
      ErrorCode::kConfig,
      "data.held_out must be smaller than the number of clips");
  return std::span<const LabeledClip>(clips.data(), clips.size() - static_cast<size_t>(held));
}

std::span<const LabeledClip> held_out_split(const std::vector<LabeledClip>& clips, const PipelineConfig& config) {
  const int held = config.data.held_out;
  HOMI_CHECK(
      held >= 1 && held < static_cast<int>(clips.size()),
      ErrorCode::kConfig,
      "evaluation needs 1 <= data.held_out < clips");
  return std::span<const LabeledClip>(clips.data() + clips.size() - static_cast<size_t>(held), static_cast<size_t>(held));
}

std::string fmt(double v) {
  return io::format_double(v);
}

void save_curve(const fs::path& path, const std::string& header, const std::vector<std::vector<double>>& rows) {
  std::string text = header + "\n";
  for (size_t e = 0; e < rows.size(); ++e) {
    text += std::to_string(e);
    for (double v : rows[e]) {
      text += "," + fmt(v);
    }
    text += "\n";
  }
  io::write_text(path, text);
}

void print_reports(const std::vector<MetricReport>& reports) {
  std::fputs(io::format_reports(reports).c_str(), stdout);
}

void save_cvae_curve(const fs::path& path, const CvaeTrainCurve& curve) {
  std::vector<std::vector<double>> rows;
  for (size_t e = 0; e < curve.reconstruction.size(); ++e) {
    rows.push_back({curve.reconstruction[e], curve.kl[e]});
  }
  save_curve(path, "epoch,reconstruction,kl", rows);
}

} // namespace

int run_gen_data(const CommonOptions& common, const std::string& dir_flag, int clips) {
  PipelineConfig config = resolve_config(common);
  if (clips > 0) {
    config.data.clips = clips;
  }
  const fs::path dir = common.out.empty() ? fs::path(data_dir(dir_flag, config)) : fs::path(common.out);
  const Skeleton skel = io::resolve_skeleton(config.skeleton);
  log(common, "generating " + std::to_string(config.data.clips) + " clips for " + skel.name());
  const std::vector<LabeledClip> data = gen_dataset(skel, config.data.clips, config.seed);
  prepare_output(dir, config);
  io::save_dataset(dir, skel, data, config.seed);
  log(common, "wrote " + dir.string());
  return 0;
}

int run_train_infill(const CommonOptions& common, const TrainInfillOptions& opts) {
  PipelineConfig config = resolve_config(common);
  if (opts.epochs >= 0) {
    config.infill.epochs = opts.epochs;
  }
  if (opts.no_contact_loss) {
    config.infill.loss.contact = 0.0;
  }
  if (opts.no_marker_loss) {
    config.infill.loss.v = 0.0;
  }
  config.validate();
  const fs::path out = out_dir(common, config);
  const Skeleton skel = io::resolve_skeleton(config.skeleton);
  const std::vector<LabeledClip> clips = io::load_dataset(data_dir(opts.data_dir, config), skel);
  const std::vector<TrainingSample> samples =
      infill_samples(skel, training_split(clips, config), config.data.window, config.data.skip, config.thresholds);
  log(common, "training infill on " + std::to_string(samples.size()) + " windows");

  InfillModel model(infill_spec(config, skel));
  InfillTrainConfig tc = infill_train_config(config);
  tc.on_epoch = [&](int epoch, const MotionLossTerms& t) {
    log(common,
        "epoch " + std::to_string(epoch + 1) + "/" + std::to_string(tc.epochs) + " total " + fmt(t.total) +
            " theta " + fmt(t.theta) + " t " + fmt(t.t) + " v " + fmt(t.v) + " contact " + fmt(t.contact));
  };
  const InfillTrainResult res = train(model, skel, samples, tc);

  prepare_output(out, config);
  io::save_infill(out / "infill.ckpt", model, config.infill.loss);
  std::vector<std::vector<double>> rows;
  for (const MotionLossTerms& t : res.curve) {
    rows.push_back({t.theta, t.t, t.v, t.contact, t.total});
  }
  save_curve(out / "infill_curve.csv", "epoch,theta,t,v,contact,total", rows);
  log(common, "wrote " + (out / "infill.ckpt").string());
  return 0;
}

int run_train_sampler(const CommonOptions& common, const std::string& dir_flag, bool no_beta, int epochs) {
  PipelineConfig config = resolve_config(common);
  if (no_beta) {
    config.sampler.use_beta = false;
  }
  if (epochs >= 0) {
    config.sampler.epochs = epochs;
  }
  config.validate();
  const fs::path out = out_dir(common, config);
  const Skeleton skel = io::resolve_skeleton(config.skeleton);
  const std::vector<LabeledClip> clips = io::load_dataset(data_dir(dir_flag, config), skel);
  const std::vector<SamplerExample> data = sampler_examples(training_split(clips, config));
  log(common, "training sampler on " + std::to_string(data.size()) + " examples");
  SamplerConfig sc = sampler_config(config);
  sc.train.on_epoch = [&](int epoch, double recon, double kl) {
    if ((epoch + 1) % 25 == 0) {
      log(common, "epoch " + std::to_string(epoch + 1) + " reconstruction " + fmt(recon) + " kl " + fmt(kl));
    }
  };
  CvaeTrainCurve curve;
  const ObjectSampler sampler = sampler_train(data, sc, &curve);
  prepare_output(out, config);
  io::save_sampler(out / "sampler.ckpt", sampler);
  save_cvae_curve(out / "sampler_curve.csv", curve);
  log(common, "wrote " + (out / "sampler.ckpt").string());
  return 0;
}

int run_train_goal(const CommonOptions& common, const std::string& dir_flag, int epochs) {
  PipelineConfig config = resolve_config(common);
  if (epochs >= 0) {
    config.goal.epochs = epochs;
  }
  config.validate();
  const fs::path out = out_dir(common, config);
  const Skeleton skel = io::resolve_skeleton(config.skeleton);
  const std::vector<LabeledClip> clips = io::load_dataset(data_dir(dir_flag, config), skel);
  const BasisPointSet basis = sample_basis(config.data.basis_seed);
  const std::vector<GoalNetInput> data = goal_examples(skel, training_split(clips, config), basis);
  log(common, "training goal net on " + std::to_string(data.size()) + " grasp frames");
  GoalConfig gc = goal_config(config);
  gc.train.on_epoch = [&](int epoch, double recon, double kl) {
    if ((epoch + 1) % 25 == 0) {
      log(common, "epoch " + std::to_string(epoch + 1) + " reconstruction " + fmt(recon) + " kl " + fmt(kl));
    }
  };
  CvaeTrainCurve curve;
  const GoalNet net = goal_train(data, gc, &curve);
  prepare_output(out, config);
  io::save_goal(out / "goal.ckpt", net, skel.name(), config.data.basis_seed);
  save_cvae_curve(out / "goal_curve.csv", curve);
  log(common, "wrote " + (out / "goal.ckpt").string());
  return 0;
}

int run_infill(const CommonOptions& common, const InfillOptions& opts) {
  const PipelineConfig config = resolve_config(common);
  const fs::path out = out_dir(common, config);
  const Skeleton skel = io::resolve_skeleton(config.skeleton);
  const std::string ckpt = opts.checkpoint.empty() ? config.paths.infill_checkpoint : opts.checkpoint;
  const InfillModel model = io::load_infill(ckpt, skel);
  const MotionImage motion = io::load_motion(opts.motion);
  HOMI_CHECK(motion.skeleton == skel.name(), ErrorCode::kSkeletonMismatch, "motion belongs to " + motion.skeleton);
  const int last = opts.last < 0 ? motion.frames() - 1 : opts.last;
  HOMI_CHECK(
      opts.first >= 0 && opts.first < last && last < motion.frames(),
      ErrorCode::kInvalidArgument,
      "need 0 <= first < last < frames");
  const int span_frames = last - opts.first + 1;
  const TemporalCoordinates tau =
      opts.tau.empty() ? make_tau(TauKind::kUniform, span_frames) : parse_tau_spec(opts.tau, span_frames);

  MotionImage context(motion.skeleton, motion.joints, 2, motion.fps);
  context.data.col(0) = motion.data.col(opts.first);
  context.data.col(1) = motion.data.col(last);
  const MotionImage result =
      infill(model, context.data.col(0), context.data.col(1), tau, motion.fps, config.thresholds.blend_window);
  prepare_output(out, config);
  io::save_motion(out / "context.motion", context);
  io::save_motion(out / "infill.motion", result);
  log(common, "wrote " + std::to_string(result.frames()) + " frames to " + (out / "infill.motion").string());
  return 0;
}

int run_resample(const CommonOptions& common, const ResampleOptions& opts) {
  const PipelineConfig config = resolve_config(common);
  const fs::path out = out_dir(common, config);
  const Skeleton skel = io::resolve_skeleton(config.skeleton);
  const std::string ckpt = opts.checkpoint.empty() ? config.paths.infill_checkpoint : opts.checkpoint;
  const InfillModel model = io::load_infill(ckpt, skel);
  const MotionImage context = io::load_motion(opts.context);
  HOMI_CHECK(context.frames() == 2, ErrorCode::kParse, "context file must hold exactly two frames");
  HOMI_CHECK(
      context.skeleton == skel.name(), ErrorCode::kSkeletonMismatch, "context belongs to " + context.skeleton);
  const TemporalCoordinates tau = parse_tau_spec(opts.tau, opts.base_frames);
  const MotionImage result =
      infill(model, context.data.col(0), context.data.col(1), tau, context.fps, config.thresholds.blend_window);
  prepare_output(out, config);
  io::save_motion(out / "resampled.motion", result);
  log(common, "wrote " + std::to_string(result.frames()) + " frames to " + (out / "resampled.motion").string());
  return 0;
}

int run_estimate_object(const CommonOptions& common, const EstimateOptions& opts) {
  const PipelineConfig config = resolve_config(common);
  const fs::path out = out_dir(common, config);
  const Skeleton skel = io::resolve_skeleton(config.skeleton);
  const MotionImage motion = io::load_motion(opts.motion);
  HOMI_CHECK(motion.skeleton == skel.name(), ErrorCode::kSkeletonMismatch, "motion belongs to " + motion.skeleton);
  const int end = opts.end_frame < 0 ? motion.frames() - 1 : opts.end_frame;
  HOMI_CHECK(
      opts.grasp_frame >= 0 && opts.grasp_frame < end && end < motion.frames(),
      ErrorCode::kInvalidArgument,
      "need 0 <= grasp-frame < end-frame < frames");
  const ObjectMotion initial = io::load_object_motion(opts.object);
  HOMI_CHECK(initial.frames() >= 1, ErrorCode::kParse, "object file holds no poses");
  const int anchor = std::min(opts.grasp_frame, initial.frames() - 1);

  MotionImage segment(motion.skeleton, motion.joints, end - opts.grasp_frame + 1, motion.fps);
  segment.data = motion.data.middleCols(opts.grasp_frame, segment.frames());
  const PointSequence hand = hand_marker_sequence(skel, segment);
  GraspFrame grasp;
  for (int i = 0; i < 6; ++i) {
    grasp.v_f[i] = hand.at(i, 0);
  }
  grasp.object_pose_1 = initial.poses[static_cast<size_t>(anchor)];
  ObjectMotion est = estimate_object_motion(hand, grasp, !opts.no_rotation);
  est.name = initial.name;
  est.fps = motion.fps;

  prepare_output(out, config);
  io::save_object_motion(out / "object.object", est);
  if (!opts.cloud.empty()) {
    const ObjectCloud cloud = io::load_cloud(opts.cloud);
    const double drift = rigid_consistency(hand, est, cloud.points);
    const std::vector<MetricReport> reports{drift_report(drift, config.pipeline.drift_gate)};
    io::save_reports(out / "report.jsonl", reports);
    print_reports(reports);
  }
  log(common, "wrote " + std::to_string(est.frames()) + " poses to " + (out / "object.object").string());
  return 0;
}

int run_bps(const CommonOptions& common, const BpsOptions& opts) {
  const PipelineConfig config = resolve_config(common);
  const fs::path out = out_dir(common, config);
  HOMI_CHECK(opts.basis_size >= 1, ErrorCode::kConfig, "basis size must be positive");
  ObjectCloud cloud = io::load_cloud(opts.cloud);
  if (opts.center) {
    cloud = center_cloud(cloud);
  }
  const BasisPointSet basis = sample_basis(opts.basis_seed.value_or(config.data.basis_seed), opts.basis_size);
  prepare_output(out, config);
  io::save_vector_row(out / "code.bps", bps_encode(cloud, basis));
  log(common, "wrote " + (out / "code.bps").string());
  return 0;
}

namespace {

void check_ablation(const LossWeightsMotion& w, const EvalOptions& opts, const std::string& path) {
  HOMI_CHECK(
      !opts.no_contact_loss || w.contact == 0.0,
      ErrorCode::kConfig,
      path + " was trained with the contact loss; --no-contact-loss needs an ablation checkpoint");
  HOMI_CHECK(
      !opts.no_marker_loss || w.v == 0.0,
      ErrorCode::kConfig,
      path + " was trained with the marker loss; --no-marker-loss needs an ablation checkpoint");
}

/// Hand-object metrics of frames [from, to] with the object re-estimated
/// from the hand markers, anchored at `pose` on frame `from`.
std::vector<MetricReport> segment_object_reports(
    const Skeleton& skel,
    const MotionImage& motion,
    int from,
    int to,
    const ObjectPose& pose,
    const Primitive& primitive,
    const PipelineConfig& config,
    bool use_rotation) {
  const int len = to - from + 1;
  MotionImage seg(motion.skeleton, motion.joints, len, motion.fps);
  seg.data = motion.data.middleCols(from, len);
  const PointSequence hand = hand_marker_sequence(skel, seg);
  GraspFrame grasp;
  for (int i = 0; i < 6; ++i) {
    grasp.v_f[i] = hand.at(i, 0);
  }
  grasp.object_pose_1 = pose;
  const ObjectMotion est = estimate_object_motion(hand, grasp, use_rotation);
  std::vector<MetricReport> out = object_reports(hand, primitive, est, config.thresholds);
  for (MetricReport& r : out) {
    r.parameters.push_back({"use_rotation", use_rotation ? 1.0 : 0.0});
  }
  return out;
}

/// Object metrics of the held-out manipulation phases, averaged over clips.
std::vector<MetricReport> held_out_object_reports(
    const Skeleton& skel,
    std::span<const LabeledClip> clips,
    const PipelineConfig& config,
    bool use_rotation) {
  int count = 0;
  double contact_avg = 0.0;
  double contact_min = 1.0;
  double depth_max = 0.0;
  double depth_avg = 0.0;
  for (const LabeledClip& c : clips) {
    if (!c.has_object) {
      continue;
    }
    const std::vector<MetricReport> r = segment_object_reports(
        skel,
        c.motion,
        c.grasp_frame,
        c.manipulation_end,
        c.object_motion.poses[static_cast<size_t>(c.grasp_frame)],
        c.scenario.object,
        config,
        use_rotation);
    contact_avg += r[0].value("avg");
    contact_min = std::min(contact_min, r[0].value("min"));
    depth_max = std::max(depth_max, r[1].value("max"));
    depth_avg += r[1].value("avg");
    ++count;
  }
  if (count == 0) {
    return {};
  }
  const double rot = use_rotation ? 1.0 : 0.0;
  std::vector<MetricReport> out;
  out.push_back(
      {"contact_ratio",
       "fraction",
       false,
       {{"avg", contact_avg / count}, {"min", contact_min}},
       {{"eps", config.thresholds.contact_eps}, {"clips", static_cast<double>(count)}, {"use_rotation", rot}}});
  out.push_back(
      {"interpenetration_depth",
       "m",
       true,
       {{"max", depth_max}, {"avg", depth_avg / count}},
       {{"clips", static_cast<double>(count)}, {"use_rotation", rot}}});
  return out;
}

} // namespace

int run_eval(const CommonOptions& common, const EvalOptions& opts) {
  const PipelineConfig config = resolve_config(common);
  const fs::path out = out_dir(common, config);
  const Skeleton skel = io::resolve_skeleton(config.skeleton);
  const SpectrumSignal signal = opts.position_spectrum ? SpectrumSignal::kPosition : SpectrumSignal::kAcceleration;
  std::vector<MetricReport> reports;

  if (!opts.pred.empty() || !opts.gt.empty()) {
    HOMI_CHECK(!opts.pred.empty() && !opts.gt.empty(), ErrorCode::kConfig, "--pred and --gt go together");
    const MotionImage pred = io::load_motion(opts.pred);
    const MotionImage gt = io::load_motion(opts.gt);
    reports = motion_reports(skel, pred, gt, config.thresholds, signal);
    if (!opts.object.empty()) {
      HOMI_CHECK(!opts.primitive.empty(), ErrorCode::kConfig, "--object needs --primitive");
      const ObjectMotion initial = io::load_object_motion(opts.object);
      HOMI_CHECK(initial.frames() >= 1, ErrorCode::kParse, "object file holds no poses");
      HOMI_CHECK(
          opts.from_frame >= 0 && opts.from_frame < pred.frames() - 1,
          ErrorCode::kInvalidArgument,
          "--from-frame must leave at least two frames");
      for (MetricReport& r : segment_object_reports(
               skel,
               pred,
               opts.from_frame,
               pred.frames() - 1,
               initial.poses.front(),
               parse_primitive(opts.primitive),
               config,
               !opts.no_rotation)) {
        reports.push_back(std::move(r));
      }
    }
  } else {
    const std::vector<LabeledClip> clips = io::load_dataset(data_dir(opts.data_dir, config), skel);
    const std::span<const LabeledClip> held = held_out_split(clips, config);
    if (!opts.checkpoint.empty()) {
      LossWeightsMotion weights;
      const InfillModel model = io::load_infill(opts.checkpoint, skel, &weights);
      check_ablation(weights, opts, opts.checkpoint);
      std::vector<MotionImage> motions;
      for (const LabeledClip& c : held) {
        motions.push_back(c.motion);
      }
      std::vector<MotionImage> windows;
      for (TrainingWindow& w : window_dataset(motions, config.data.window, config.data.skip)) {
        windows.push_back(std::move(w.motion));
      }
      const InfillEvaluation ev =
          evaluate_infill(model, skel, windows, config.thresholds, 0.01, derive_seed(config.seed, 31));
      reports = infill_reports(ev, config.thresholds);
      for (MetricReport& r : reports) {
        r.parameters.push_back({"loss_v", weights.v});
        r.parameters.push_back({"loss_contact", weights.contact});
      }
    } else {
      HOMI_CHECK(
          !opts.no_contact_loss && !opts.no_marker_loss,
          ErrorCode::kConfig,
          "loss ablation flags need --checkpoint");
    }
    for (MetricReport& r : held_out_object_reports(skel, held, config, !opts.no_rotation)) {
      reports.push_back(std::move(r));
    }
  }

  prepare_output(out, config);
  io::save_reports(out / "report.jsonl", reports);
  print_reports(reports);
  return 0;
}

int run_pipeline_cmd(const CommonOptions& common, const PipelineOptionsCli& opts) {
  PipelineConfig config = resolve_config(common);
  if (opts.no_rotation) {
    config.pipeline.use_rotation = false;
  }
  const fs::path out = out_dir(common, config);
  const Skeleton skel = io::resolve_skeleton(config.skeleton);
  HOMI_CHECK(!opts.clip.empty(), ErrorCode::kConfig, "--clip is required");
  const LabeledClip clip = io::load_clip(data_dir(opts.data_dir, config), skel, opts.clip);
  HOMI_CHECK(clip.has_object, ErrorCode::kInvalidArgument, opts.clip + " has no object");

  const InfillModel infill_model =
      io::load_infill(opts.infill.empty() ? config.paths.infill_checkpoint : opts.infill, skel);
  const ObjectSampler sampler = io::load_sampler(opts.sampler.empty() ? config.paths.sampler_checkpoint : opts.sampler);
  std::uint64_t basis_seed = 0;
  const GoalNet goal = io::load_goal(opts.goal.empty() ? config.paths.goal_checkpoint : opts.goal, skel, &basis_seed);
  const BasisPointSet basis = sample_basis(basis_seed);

  PipelineInputs in;
  in.task = opts.task >= 0 ? opts.task : clip.scenario.task();
  in.beta = clip.scenario.beta;
  in.cloud = clip.cloud;
  in.primitive = clip.scenario.object;
  in.initial_object = clip.object_motion.poses.front();
  in.initial_frame = clip.motion.frame(0);

  PipelineOptions po;
  po.section = config.pipeline;
  po.thresholds = config.thresholds;
  po.seed = config.seed;
  // Grasp refinement would run here; keyframes are used as sampled.
  po.refine_grasp = nullptr;

  const PipelineResult res = run_pipeline(skel, {&infill_model, &sampler, &goal, &basis}, in, po);
  prepare_output(out, config);
  io::save_motion(out / "motion.motion", res.motion);
  io::save_motion(out / "approach.motion", res.approach);
  io::save_motion(out / "manipulation.motion", res.manipulation);
  io::save_object_motion(out / "object.object", res.object_motion);
  io::save_reports(out / "report.jsonl", res.reports);
  print_reports(res.reports);
  if (!res.gate_passed) {
    log(common, "rigid-consistency drift " + fmt(res.drift) + " exceeds the gate " + fmt(config.pipeline.drift_gate));
    return 4;
  }
  return 0;
}

} // namespace homi::cli
