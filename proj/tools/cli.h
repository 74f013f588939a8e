#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include <homi/config.h>
#include <homi/shape.h>
#include <homi/skeleton.h>

namespace homi::cli {

/// Options every subcommand accepts.
struct CommonOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::string skeleton;
  std::string out;
  bool quiet = false;
};

/// Defaults, then the config file, then HOMI_SEED / HOMI_THREADS, then
/// command-line flags. Validates the result.
PipelineConfig resolve_config(const CommonOptions& common);

/// Creates `dir` and writes config.json into it.
void prepare_output(const std::filesystem::path& dir, const PipelineConfig& config);

/// "sphere:r", "box:hx,hy,hz" or "capsule:r,half_length".
Primitive parse_primitive(const std::string& spec);

/// Progress line on stderr unless quiet.
void log(const CommonOptions& common, const std::string& line);

int run_gen_data(const CommonOptions& common, const std::string& data_dir, int clips);

struct TrainInfillOptions {
  std::string data_dir;
  int epochs = -1;
  bool no_contact_loss = false;
  bool no_marker_loss = false;
};
int run_train_infill(const CommonOptions& common, const TrainInfillOptions& opts);

int run_train_sampler(const CommonOptions& common, const std::string& data_dir, bool no_beta, int epochs);
int run_train_goal(const CommonOptions& common, const std::string& data_dir, int epochs);

struct InfillOptions {
  std::string checkpoint;
  std::string motion;
  int first = 0;
  int last = -1;
  std::string tau;
};
int run_infill(const CommonOptions& common, const InfillOptions& opts);

struct ResampleOptions {
  std::string checkpoint;
  std::string context;
  std::string tau;
  int base_frames = 64;
};
int run_resample(const CommonOptions& common, const ResampleOptions& opts);

struct EstimateOptions {
  std::string motion;
  std::string object;
  std::string cloud;
  int grasp_frame = 0;
  int end_frame = -1;
  bool no_rotation = false;
};
int run_estimate_object(const CommonOptions& common, const EstimateOptions& opts);

struct BpsOptions {
  std::string cloud;
  std::optional<std::uint64_t> basis_seed;
  int basis_size = kBasisSize;
  bool center = false;
};
int run_bps(const CommonOptions& common, const BpsOptions& opts);

struct EvalOptions {
  std::string pred;
  std::string gt;
  std::string object;
  std::string primitive;
  int from_frame = 0;
  std::string data_dir;
  std::string checkpoint;
  bool no_contact_loss = false;
  bool no_marker_loss = false;
  bool no_rotation = false;
  bool position_spectrum = false;
};
int run_eval(const CommonOptions& common, const EvalOptions& opts);

struct PipelineOptionsCli {
  std::string data_dir;
  std::string clip;
  int task = -1;
  std::string infill;
  std::string sampler;
  std::string goal;
  bool no_rotation = false;
};
int run_pipeline_cmd(const CommonOptions& common, const PipelineOptionsCli& opts);

} // namespace homi::cli
