#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "homi/geom.h"
#include "homi/nn.h"
#include "homi/rng.h"
#include "homi/shape.h"
#include "homi/skeleton.h"
#include "homi/task.h"

namespace homi {

// ---------------------------------------------------------------------------
// Generic conditional VAE

struct CvaeSpec {
  int x_dim = 0;
  int cond_dim = 0;
  int out_dim = 0;
  int latent = 16;
  int hidden = 256;
  /// Hidden layers per perceptron.
  int depth = 2;
  nn::Activation activation = nn::Activation::kSilu;
  std::uint64_t seed = 0;
};

struct LatentSample {
  Eigen::VectorXd mu;
  Eigen::VectorXd sigma;
  Eigen::VectorXd z;
};

/// Standardisation applied to encoder inputs and conditions. Features with
/// (near) zero spread keep unit scale.
struct Normalizer {
  Eigen::VectorXd mean;
  Eigen::VectorXd scale;

  static Normalizer identity(int dim);
  static Normalizer fit(const Eigen::MatrixXd& columns);
  Eigen::MatrixXd apply(const Eigen::MatrixXd& columns) const;
};

/// Encoder [x; cond] -> (mu, log sigma); decoder [z; cond] -> output.
class Cvae {
 public:
  Cvae() = default;
  explicit Cvae(const CvaeSpec& spec);

  const CvaeSpec& spec() const {
    return spec_;
  }
  Eigen::VectorXd& parameters() {
    return params_;
  }
  const Eigen::VectorXd& parameters() const {
    return params_;
  }
  Normalizer& x_norm() {
    return x_norm_;
  }
  const Normalizer& x_norm() const {
    return x_norm_;
  }
  Normalizer& cond_norm() {
    return c_norm_;
  }
  const Normalizer& cond_norm() const {
    return c_norm_;
  }
  /// Decoder outputs are mean + scale * raw.
  Normalizer& out_norm() {
    return y_norm_;
  }
  const Normalizer& out_norm() const {
    return y_norm_;
  }
  const nn::Mlp& encoder() const {
    return enc_;
  }
  const nn::Mlp& decoder() const {
    return dec_;
  }

  /// z = mu + sigma * eps with eps ~ N(0, I) from `rng`; z = mu when `rng`
  /// is null. Throws kShapeMismatch.
  LatentSample encode(const Eigen::VectorXd& x, const Eigen::VectorXd& cond, Rng* rng) const;
  Eigen::VectorXd decode(const Eigen::VectorXd& z, const Eigen::VectorXd& cond) const;
  /// Decodes a prior draw z ~ N(0, I).
  Eigen::VectorXd sample(const Eigen::VectorXd& cond, Rng& rng) const;

 private:
  CvaeSpec spec_;
  nn::Mlp enc_;
  nn::Mlp dec_;
  Normalizer x_norm_;
  Normalizer c_norm_;
  Normalizer y_norm_;
  Eigen::VectorXd params_;
};

/// Closed-form KL(N(mu, sigma^2) || N(0, I)). Throws kInvalidArgument on a
/// non-positive sigma.
double kl_loss(const Eigen::VectorXd& mu, const Eigen::VectorXd& sigma);

/// Reconstruction term of one batch: returns the summed loss over columns
/// and writes dLoss/dprediction into `grad`.
using ReconstructionLoss =
    std::function<double(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& target, Eigen::MatrixXd& grad)>;

struct CvaeTrainConfig {
  int epochs = 400;
  int batch = 32;
  double learning_rate = 1e-3;
  /// Learning rate of the last epoch relative to the first; exponential
  /// decay in between.
  double final_lr_fraction = 1.0;
  double clip_norm = 5.0;
  double kl_weight = 1e-2;
  std::uint64_t seed = 0;
  /// Called after every epoch with (epoch, mean reconstruction, mean KL).
  std::function<void(int, double, double)> on_epoch;
};

struct CvaeTrainCurve {
  std::vector<double> reconstruction;
  std::vector<double> kl;
};

/// Mini-batch Adam on mean(recon + kl_weight * KL). Fits the input and
/// output normalisers first. Deterministic for a given seed. Throws
/// kNonFiniteLoss.
CvaeTrainCurve train_cvae(
    Cvae& net,
    const Eigen::MatrixXd& x,
    const Eigen::MatrixXd& cond,
    const Eigen::MatrixXd& target,
    const ReconstructionLoss& recon,
    const CvaeTrainConfig& config);

// ---------------------------------------------------------------------------
// Object parameters sampler

struct LossWeightsSampler {
  double t = 1.0;
  double r = 1.0;
  double kl = 1e-2;

  /// Throws kInvalidArgument when negative or all zero.
  void validate() const;
};

struct SamplerExample {
  TaskSpec task;
  ObjectOffset offset;
};

struct SamplerConfig {
  int latent = 16;
  int hidden = 256;
  /// Feeds beta to the network; off for the shape-blind ablation.
  bool use_beta = true;
  LossWeightsSampler weights;
  CvaeTrainConfig train;
};

class ObjectSampler {
 public:
  ObjectSampler() = default;
  ObjectSampler(const CvaeSpec& spec, int task_count, bool use_beta);

  Cvae& net() {
    return net_;
  }
  const Cvae& net() const {
    return net_;
  }
  int task_count() const {
    return task_count_;
  }
  bool use_beta() const {
    return use_beta_;
  }

  /// [a_one, beta, t_init, r_init]; beta is zeroed when use_beta is off.
  Eigen::VectorXd condition(const TaskSpec& task) const;
  ObjectOffset decode(const Eigen::VectorXd& z, const TaskSpec& task) const;
  /// Decodes z = 0.
  ObjectOffset mean(const TaskSpec& task) const;

  static constexpr int kOutputDim = 9; // t_off, r_off
  static int condition_dim(int task_count) {
    return task_count + kBetaSize + 9;
  }

 private:
  Cvae net_;
  int task_count_ = 3;
  bool use_beta_ = true;
};

/// Throws kInvalidArgument unless at least two task types are present,
/// kNonFiniteLoss on divergence.
ObjectSampler sampler_train(
    std::span<const SamplerExample> data,
    const SamplerConfig& config,
    CvaeTrainCurve* curve = nullptr);

/// Offsets decoded from a prior draw; r_off is a valid rotation.
ObjectOffset sampler_sample(const ObjectSampler& sampler, const TaskSpec& task, Rng& rng);

// ---------------------------------------------------------------------------
// Goal net

struct GoalNetInput {
  Eigen::VectorXd theta;     // 6J
  Vec3 t = Vec3::Zero();
  Eigen::VectorXd beta;      // 10
  Eigen::Matrix3Xd v;        // 3 x 400 body samples
  Eigen::Matrix3Xd d_b_to_o; // 3 x 400, t_o - v
  Vec3 h = Vec3::UnitX();    // unit gaze direction
  Vec3 t_o = Vec3::Zero();
  Eigen::VectorXd b_o;       // BPS code
  int a = 0;
  int task_count = 3;

  void validate(int joints) const;
};

struct GoalNetOutput {
  Eigen::VectorXd theta_hat; // 6J, Gram-Schmidt normalised
  Vec3 t_hat = Vec3::Zero();
  Vec3 h_hat = Vec3::UnitX();
  Eigen::Matrix3Xd d_r_to_o_hat; // 3 x 99

  /// Motion-image column [rot6 ...; root].
  Eigen::VectorXd frame() const;
};

/// Gaze direction: world x axis of the head joint (spine3 when absent).
Vec3 gaze_direction(const Skeleton& skel, const Eigen::Ref<const Eigen::VectorXd>& frame);

/// BPS code of a cloud (object frame) in its world orientation, centred.
Eigen::VectorXd oriented_bps(const ObjectCloud& cloud, const Mat3& r_o, const BasisPointSet& basis);

/// Builds the goal-net record of a motion frame grasping an object whose
/// centred cloud is given in its own frame.
GoalNetInput make_goal_input(
    const Skeleton& skel,
    const Eigen::Ref<const Eigen::VectorXd>& frame,
    const Eigen::VectorXd& beta,
    const Vec3& t_o,
    const Mat3& r_o,
    const ObjectCloud& cloud,
    const BasisPointSet& basis,
    int task,
    int task_count = 3);

struct GoalLossWeights {
  double theta = 1.0;
  double t = 1.0;
  double h = 1.0;
  double d = 1.0;
  double kl = 5e-3;
};

struct GoalConfig {
  int latent = 16;
  int hidden = 256;
  GoalLossWeights weights;
  CvaeTrainConfig train;
};

class GoalNet {
 public:
  GoalNet() = default;
  GoalNet(const CvaeSpec& spec, int joints, int task_count);

  Cvae& net() {
    return net_;
  }
  const Cvae& net() const {
    return net_;
  }
  int joints() const {
    return joints_;
  }
  int task_count() const {
    return task_count_;
  }

  Eigen::VectorXd encoder_input(const GoalNetInput& in) const;
  /// [beta, b_o, t_o, a_one].
  Eigen::VectorXd condition(const Eigen::VectorXd& beta, const Eigen::VectorXd& b_o, const Vec3& t_o, int a) const;
  Eigen::VectorXd target(const GoalNetInput& in) const;
  GoalNetOutput unpack(const Eigen::VectorXd& out) const;

  GoalNetOutput decode(const Eigen::VectorXd& z, const Eigen::VectorXd& cond) const;
  /// Decoder output at the posterior mean of `in`.
  GoalNetOutput reconstruct(const GoalNetInput& in) const;

  static int input_dim(int joints) {
    return 6 * joints + 3 + 2 * 3 * kBodySampleCount + 3;
  }
  static int condition_dim(int task_count) {
    return kBetaSize + kBasisSize + 3 + task_count;
  }
  static int output_dim(int joints) {
    return 6 * joints + 3 + 3 + 3 * kRightHandSampleCount;
  }

 private:
  Cvae net_;
  int joints_ = 0;
  int task_count_ = 3;
};

/// Throws kSkeletonMismatch on inconsistent joint counts, kNonFiniteLoss
/// on divergence.
GoalNet goal_train(std::span<const GoalNetInput> data, const GoalConfig& config, CvaeTrainCurve* curve = nullptr);

GoalNetOutput goal_sample(
    const GoalNet& net,
    const Eigen::VectorXd& beta,
    const Eigen::VectorXd& b_o,
    const Vec3& t_o,
    int a,
    Rng& rng);

} // namespace homi
