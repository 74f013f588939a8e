#include <cstdio>
#include <exception>
#include <functional>

#include <CLI11.hpp>

#include <homi/error.h>

#include "cli.h"

namespace {

using homi::cli::CommonOptions;

int exit_code(homi::ErrorCategory c) {
  switch (c) {
    case homi::ErrorCategory::kConfig:
      return 2;
    case homi::ErrorCategory::kData:
      return 3;
    case homi::ErrorCategory::kNumerical:
      return 4;
    case homi::ErrorCategory::kOther:
      break;
  }
  return 1;
}

void add_common(CLI::App* cmd, CommonOptions& common) {
  cmd->add_option("-c,--config", common.config_path, "JSON config file")->check(CLI::ExistingFile);
  cmd->add_option("--seed", common.seed, "Seed (overrides config and HOMI_SEED)");
  cmd->add_option("--threads", common.threads, "Worker threads")->check(CLI::PositiveNumber);
  cmd->add_option("--skeleton", common.skeleton, "Skeleton preset or file");
  cmd->add_option("-o,--out", common.out, "Output directory");
  cmd->add_flag("-q,--quiet", common.quiet, "No progress output");
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Task-oriented human-object motion toolkit"};
  app.require_subcommand(1);
  CommonOptions common;
  std::function<int()> action;

  std::string gen_dir;
  int gen_clips = 0;
  auto* gen = app.add_subcommand("gen-data", "Generate a synthetic dataset");
  add_common(gen, common);
  gen->add_option("--data", gen_dir, "Dataset directory (default paths.data_dir)");
  gen->add_option("--clips", gen_clips, "Number of clips (default data.clips)");
  gen->callback([&] { action = [&] { return homi::cli::run_gen_data(common, gen_dir, gen_clips); }; });

  homi::cli::TrainInfillOptions ti;
  auto* train_infill = app.add_subcommand("train-infill", "Train the inbetweening model");
  add_common(train_infill, common);
  train_infill->add_option("--data", ti.data_dir, "Dataset directory");
  train_infill->add_option("--epochs", ti.epochs, "Epochs (default infill.epochs)");
  train_infill->add_flag("--no-contact-loss", ti.no_contact_loss, "Train without the contact term");
  train_infill->add_flag("--no-marker-loss", ti.no_marker_loss, "Train without the marker term");
  train_infill->callback([&] { action = [&] { return homi::cli::run_train_infill(common, ti); }; });

  std::string ts_data;
  bool ts_no_beta = false;
  int ts_epochs = -1;
  auto* train_sampler = app.add_subcommand("train-sampler", "Train the object end-pose sampler");
  add_common(train_sampler, common);
  train_sampler->add_option("--data", ts_data, "Dataset directory");
  train_sampler->add_option("--epochs", ts_epochs, "Epochs (default sampler.epochs)");
  train_sampler->add_flag("--no-beta", ts_no_beta, "Hide body shape from the network");
  train_sampler->callback(
      [&] { action = [&] { return homi::cli::run_train_sampler(common, ts_data, ts_no_beta, ts_epochs); }; });

  std::string tg_data;
  int tg_epochs = -1;
  auto* train_goal = app.add_subcommand("train-goal", "Train the grasp keyframe generator");
  add_common(train_goal, common);
  train_goal->add_option("--data", tg_data, "Dataset directory");
  train_goal->add_option("--epochs", tg_epochs, "Epochs (default goal.epochs)");
  train_goal->callback([&] { action = [&] { return homi::cli::run_train_goal(common, tg_data, tg_epochs); }; });

  homi::cli::InfillOptions io;
  auto* infill = app.add_subcommand("infill", "Inbetween two frames of a motion file");
  add_common(infill, common);
  infill->add_option("--checkpoint", io.checkpoint, "Infill checkpoint (default paths.infill_checkpoint)");
  infill->add_option("--motion", io.motion, "Motion file holding the keyframes")->required();
  infill->add_option("--first", io.first, "First keyframe index");
  infill->add_option("--last", io.last, "Last keyframe index (default last frame)");
  infill->add_option("--tau", io.tau, "uniform:T, speed:F or geo:R (default uniform over the span)");
  infill->callback([&] { action = [&] { return homi::cli::run_infill(common, io); }; });

  homi::cli::ResampleOptions ro;
  auto* resample = app.add_subcommand("resample", "Re-evaluate a stored context at new temporal coordinates");
  add_common(resample, common);
  resample->add_option("--checkpoint", ro.checkpoint, "Infill checkpoint (default paths.infill_checkpoint)");
  resample->add_option("--context", ro.context, "Two-frame motion file")->required();
  resample->add_option("--tau", ro.tau, "uniform:T, speed:F or geo:R")->required();
  resample->add_option("--base-frames", ro.base_frames, "Frame count speed and geo specs refer to");
  resample->callback([&] { action = [&] { return homi::cli::run_resample(common, ro); }; });

  homi::cli::EstimateOptions eo;
  auto* estimate = app.add_subcommand("estimate-object", "Propagate a grasped object with the right hand");
  add_common(estimate, common);
  estimate->add_option("--motion", eo.motion, "Motion file")->required();
  estimate->add_option("--object", eo.object, "Object motion file holding the pose at the grasp frame")->required();
  estimate->add_option("--grasp-frame", eo.grasp_frame, "First stable-grasp frame");
  estimate->add_option("--end-frame", eo.end_frame, "Last frame (default last frame)");
  estimate->add_option("--cloud", eo.cloud, "Object cloud for the rigid-consistency report");
  estimate->add_flag("--no-rotation", eo.no_rotation, "Translate only");
  estimate->callback([&] { action = [&] { return homi::cli::run_estimate_object(common, eo); }; });

  homi::cli::BpsOptions bo;
  auto* bps = app.add_subcommand("bps", "Encode a point cloud against a basis point set");
  add_common(bps, common);
  bps->add_option("--cloud", bo.cloud, "Cloud file")->required();
  bps->add_option("--basis-seed", bo.basis_seed, "Basis seed (default data.basis_seed)");
  bps->add_option("--basis-size", bo.basis_size, "Basis points");
  bps->add_flag("--center", bo.center, "Subtract the centroid first");
  bps->callback([&] { action = [&] { return homi::cli::run_bps(common, bo); }; });

  homi::cli::EvalOptions ev;
  auto* eval = app.add_subcommand("eval", "Compute the metric suite");
  add_common(eval, common);
  eval->add_option("--pred", ev.pred, "Predicted motion file");
  eval->add_option("--gt", ev.gt, "Ground-truth motion file");
  eval->add_option("--object", ev.object, "Object pose file; its first pose is the grasp at --from-frame");
  eval->add_option("--primitive", ev.primitive, "sphere:r, box:hx,hy,hz or capsule:r,half_length");
  eval->add_option("--from-frame", ev.from_frame, "Grasp frame of --pred; the object follows the hand from here");
  eval->add_option("--data", ev.data_dir, "Dataset directory (held-out mode)");
  eval->add_option("--checkpoint", ev.checkpoint, "Infill checkpoint to evaluate on held-out windows");
  eval->add_flag("--no-contact-loss", ev.no_contact_loss, "Require a checkpoint trained without the contact term");
  eval->add_flag("--no-marker-loss", ev.no_marker_loss, "Require a checkpoint trained without the marker term");
  eval->add_flag("--no-rotation", ev.no_rotation, "Estimate objects without rotation");
  eval->add_flag("--position-spectrum", ev.position_spectrum, "PSKL-J on positions instead of accelerations");
  eval->callback([&] { action = [&] { return homi::cli::run_eval(common, ev); }; });

  homi::cli::PipelineOptionsCli po;
  auto* pipeline = app.add_subcommand("pipeline", "Generate a full approach and manipulation sequence");
  add_common(pipeline, common);
  pipeline->add_option("--data", po.data_dir, "Dataset directory holding the scene clip");
  pipeline->add_option("--clip", po.clip, "Clip id supplying the start frame, body shape and object")->required();
  pipeline->add_option("--task", po.task, "Task id (default the clip's task)");
  pipeline->add_option("--infill", po.infill, "Infill checkpoint");
  pipeline->add_option("--sampler", po.sampler, "Sampler checkpoint");
  pipeline->add_option("--goal", po.goal, "Goal net checkpoint");
  pipeline->add_flag("--no-rotation", po.no_rotation, "Estimate the object without rotation");
  pipeline->callback([&] { action = [&] { return homi::cli::run_pipeline_cmd(common, po); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    return action();
  } catch (const homi::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_code(homi::category(e.code()));
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
