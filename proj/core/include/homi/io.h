#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "homi/cvae.h"
#include "homi/infill.h"
#include "homi/metrics.h"
#include "homi/motion.h"
#include "homi/objmotion.h"
#include "homi/shape.h"
#include "homi/skeleton.h"
#include "homi/synth.h"

// File formats. Every text format writes doubles in shortest round-trip
// form, so a save/load cycle is exact and repeated runs are byte-identical.
//
// Skeleton (v1):
//   homi-skeleton 1
//   name <name>
//   joints <J>
//   joint <name> <parent> <ox> <oy> <oz>        (J lines)
//   markers <M>
//   marker <joint> <tag> <x> <y> <z>            (M lines)
//   samples <S>
//   sample <joint> <right_hand 0|1> <x> <y> <z> (S lines)
//
// Motion (v1): header lines "homi-motion 1", "skeleton <name>",
// "joints <J>", "frames <T>", "fps <f>", then 6J+3 rows of T values.
//
// Object motion (v1): "homi-object-motion 1", "name <name>",
// "frames <T>", "fps <f>", "degenerate <k> <i_1> ... <i_k>", then T rows
// "tx ty tz r0 r1 r2 r3 r4 r5".
//
// Cloud: header "<name> <N>", then N rows "x y z".
// BPS code: one row of values.
//
// Checkpoint (v1): "homi-checkpoint 1", "kind <kind>", key/value header
// lines, "blob <n>", a newline, then n IEEE-754 doubles, little-endian.

namespace homi::io {

std::string format_double(double v);

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

void save_skeleton(const std::filesystem::path& path, const Skeleton& skel);
Skeleton load_skeleton(const std::filesystem::path& path);
/// A preset name or a skeleton file.
Skeleton resolve_skeleton(const std::string& name_or_path);

void save_motion(const std::filesystem::path& path, const MotionImage& motion);
MotionImage load_motion(const std::filesystem::path& path);

void save_object_motion(const std::filesystem::path& path, const ObjectMotion& motion);
ObjectMotion load_object_motion(const std::filesystem::path& path);

void save_cloud(const std::filesystem::path& path, const ObjectCloud& cloud);
ObjectCloud load_cloud(const std::filesystem::path& path);

void save_vector_row(const std::filesystem::path& path, const Eigen::VectorXd& v);
Eigen::VectorXd load_vector_row(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Checkpoints

struct Checkpoint {
  std::string kind;
  std::vector<std::pair<std::string, std::string>> header;
  std::vector<double> blob;

  const std::string& get(const std::string& key) const;
  int get_int(const std::string& key) const;
  std::uint64_t get_u64(const std::string& key) const;
  double get_double(const std::string& key) const;
};

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
/// Throws kMissingCheckpoint when absent, kParse on a malformed file.
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// `weights` records the loss the model was trained with.
void save_infill(const std::filesystem::path& path, const InfillModel& model, const LossWeightsMotion& weights);
/// Throws kSkeletonMismatch when the checkpoint belongs to another skeleton.
InfillModel load_infill(const std::filesystem::path& path, const Skeleton& skel, LossWeightsMotion* weights = nullptr);

void save_sampler(const std::filesystem::path& path, const ObjectSampler& sampler);
ObjectSampler load_sampler(const std::filesystem::path& path);

/// `basis_seed` identifies the BPS basis the net was trained with.
void save_goal(
    const std::filesystem::path& path,
    const GoalNet& net,
    const std::string& skeleton,
    std::uint64_t basis_seed);
GoalNet load_goal(const std::filesystem::path& path, const Skeleton& skel, std::uint64_t* basis_seed = nullptr);

// ---------------------------------------------------------------------------
// Dataset directory

struct ClipRecord {
  std::string id;
  std::string kind;
  std::uint64_t seed = 0;
  int frames = 0;
  bool has_object = false;
};

struct Manifest {
  int version = 1;
  std::string skeleton;
  std::uint64_t seed = 0;
  double fps = kDatasetFps;
  std::vector<ClipRecord> clips;
};

/// Writes <dir>/<id>.motion, .labels.json and, for object clips, .object
/// and .cloud, plus manifest.json and skeleton.txt.
void save_dataset(
    const std::filesystem::path& dir,
    const Skeleton& skel,
    std::span<const LabeledClip> clips,
    std::uint64_t seed);
Manifest load_manifest(const std::filesystem::path& dir);
/// Reloads one clip by id.
LabeledClip load_clip(const std::filesystem::path& dir, const Skeleton& skel, const std::string& id);
/// Reloads every clip listed in the manifest.
std::vector<LabeledClip> load_dataset(const std::filesystem::path& dir, const Skeleton& skel);

// ---------------------------------------------------------------------------
// Metric reports

/// One JSON object per line.
std::string format_reports(std::span<const MetricReport> reports);
void save_reports(const std::filesystem::path& path, std::span<const MetricReport> reports);
std::vector<MetricReport> parse_reports(const std::string& text);

} // namespace homi::io
