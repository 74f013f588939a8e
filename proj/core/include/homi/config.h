#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "homi/cvae.h"
#include "homi/infill.h"

namespace homi {

struct PathsConfig {
  std::string data_dir = "data";
  std::string out_dir = "out";
  std::string infill_checkpoint = "infill.ckpt";
  std::string sampler_checkpoint = "sampler.ckpt";
  std::string goal_checkpoint = "goal.ckpt";
};

struct DataConfig {
  int clips = 200;
  int window = 64;
  int skip = 16;
  /// Trailing clips kept out of training.
  int held_out = 20;
  std::uint64_t basis_seed = 1;
};

struct InfillConfig {
  int width = 0; // 0 picks the skeleton default
  int hyper_width = 0;
  int hyper_layers = 2;
  int rank = 10;
  int fourier = 8;
  std::string activation = "silu";
  bool pose_residual = false;
  int epochs = 40;
  int batch = 16;
  double learning_rate = 1e-3;
  double clip_norm = 5.0;
  LossWeightsMotion loss;
  std::string contact_source = "head";
};

struct SamplerSection {
  int latent = 16;
  int hidden = 256;
  bool use_beta = true;
  int epochs = 300;
  int batch = 32;
  double learning_rate = 1e-3;
  double final_lr_fraction = 0.1;
  LossWeightsSampler loss;
};

struct GoalSection {
  int latent = 16;
  int hidden = 256;
  int epochs = 300;
  int batch = 32;
  double learning_rate = 1e-3;
  double final_lr_fraction = 0.1;
  GoalLossWeights loss;
};

struct ThresholdConfig {
  double contact_height = kDefaultContactHeight;
  double contact_speed = kDefaultContactSpeed;
  double skating_height = 0.05;
  double skating_displacement = 0.0025;
  double contact_eps = 0.01;
  int blend_window = kDefaultBlendWindow;
};

struct PipelineSection {
  int approach_frames = 64;
  int manipulation_frames = 64;
  double fps = 30.0;
  bool use_rotation = true;
  /// Maximum rigid-consistency drift accepted by the pipeline gate.
  double drift_gate = 0.02;
};

struct PipelineConfig {
  std::string skeleton = "toy9";
  std::uint64_t seed = 0;
  int threads = 1;
  PathsConfig paths;
  DataConfig data;
  InfillConfig infill;
  SamplerSection sampler;
  GoalSection goal;
  ThresholdConfig thresholds;
  PipelineSection pipeline;

  /// Throws kConfig on out-of-range values.
  void validate() const;
};

/// Parses a JSON config. Missing keys keep their defaults; unknown keys and
/// wrongly typed values throw kConfig.
PipelineConfig parse_config(const std::string& text, const std::string& source = "config");
PipelineConfig load_config(const std::filesystem::path& path);
/// Fully resolved config as pretty-printed JSON.
std::string config_to_json(const PipelineConfig& config);

/// Applies HOMI_SEED and HOMI_THREADS when set.
void apply_env_overrides(PipelineConfig& config);

InfillSpec infill_spec(const PipelineConfig& config, const Skeleton& skel);
InfillTrainConfig infill_train_config(const PipelineConfig& config);
SamplerConfig sampler_config(const PipelineConfig& config);
GoalConfig goal_config(const PipelineConfig& config);

} // namespace homi
