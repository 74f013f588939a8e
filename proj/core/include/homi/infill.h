#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "homi/motion.h"
#include "homi/nn.h"
#include "homi/skeleton.h"

namespace homi {

// ---------------------------------------------------------------------------
// Temporal coordinates

enum class TauKind { kUniform, kSpeed, kGeometric };

/// Builds a coordinate vector on [0, 1].
///  - kUniform: `frames` points i / (frames - 1).
///  - kSpeed: uniform grid with frames / param points (param = speed-up).
///  - kGeometric: `frames` points whose interval lengths form a geometric
///    sequence with ratio `param`, normalised to sum 1. ratio < 1 puts the
///    dense end near 1 (fast then slow), ratio > 1 the reverse.
TemporalCoordinates make_tau(TauKind kind, int frames, double param = 1.0);

/// Parses "uniform:T", "speed:F" or "geo:R" (the latter two relative to
/// `base_frames`). Throws kBadTauSpec.
TemporalCoordinates parse_tau_spec(std::string_view spec, int base_frames = 64);

// ---------------------------------------------------------------------------
// Model

/// Endpoint conditioning: both keyframe poses and the root displacement.
struct ContextInput {
  Eigen::VectorXd theta_first; // 6J
  Eigen::VectorXd theta_last;  // 6J
  Vec3 d_first_to_last = Vec3::Zero();

  static ContextInput from_frames(
      const Eigen::Ref<const Eigen::VectorXd>& first,
      const Eigen::Ref<const Eigen::VectorXd>& last,
      int joints);

  Eigen::VectorXd flatten() const;
  void validate(int joints) const;
};

enum class ContactSource {
  /// Eight extra sigmoid outputs of the INR.
  kPredictedHead,
  /// Soft contact probabilities computed from the predicted foot markers.
  kDerivedFromMarkers,
};

std::string_view to_string(ContactSource source);
ContactSource contact_source_from_string(std::string_view text);

struct InfillSpec {
  std::string skeleton = "toy9";
  int joints = 9;
  int width = 64;
  int hyper_width = 64;
  int hyper_layers = 2;
  int rank = 10;
  int fourier = 8;
  nn::Activation activation = nn::Activation::kSilu;
  /// Adds the linear blend of the two endpoint poses to the pose head.
  bool pose_residual = false;
  std::uint64_t seed = 0;

  int encoding_dim() const {
    return 2 * fourier + 1;
  }
  int motion_rows() const {
    return 6 * joints + 3;
  }
  int output_dim() const {
    return motion_rows() + kContactChannels;
  }
  int context_dim() const {
    return 12 * joints + 3;
  }

  /// Default sizes: width 64 for toy9, 256 for paper55.
  static InfillSpec for_skeleton(const Skeleton& skel, std::uint64_t seed = 0);
  /// Under 2k parameters on toy9; used by gradient checks.
  static InfillSpec tiny(const Skeleton& skel, std::uint64_t seed = 0);

  static constexpr int kContactChannels = 8;
  static constexpr int kLayers = 4;
  /// Layer that additionally receives the encoded coordinate.
  static constexpr int kSkipLayer = 2;
};

/// One FMM-modulated layer: effective weight = base .* (a * b).
struct FmmLayer {
  Eigen::MatrixXd base; // out x in, shared
  Eigen::MatrixXd a;    // out x r, generated
  Eigen::MatrixXd b;    // r x in, generated
  Eigen::VectorXd bias; // shared

  Eigen::MatrixXd modulation() const {
    return a * b;
  }
  Eigen::MatrixXd effective() const {
    return base.cwiseProduct(a * b);
  }
};

struct FmmInrWeights {
  int rank = 0;
  std::vector<FmmLayer> layers;
  /// Endpoint-pose blend added to the pose head when pose_residual is on.
  Eigen::VectorXd theta_first;
  Eigen::VectorXd theta_last;
  bool pose_residual = false;
};

/// Raw INR evaluation over a coordinate vector.
struct InrOutput {
  Eigen::MatrixXd pose;           // 6J x T
  Eigen::Matrix3Xd t_off;         // 3 x T
  Eigen::MatrixXd contact_logits; // 8 x T
};

/// Hypernetwork + shared INR bases. All trainable parameters live in one
/// flat vector (see nn::ParameterLayout).
class InfillModel {
 public:
  explicit InfillModel(const InfillSpec& spec);

  const InfillSpec& spec() const {
    return spec_;
  }
  const Eigen::VectorXd& parameters() const {
    return params_;
  }
  Eigen::VectorXd& parameters() {
    return params_;
  }
  Eigen::Index parameter_count() const {
    return params_.size();
  }

  FmmInrWeights encode_context(const ContextInput& ctx) const;
  InrOutput eval_inr(const FmmInrWeights& weights, const TemporalCoordinates& tau) const;

  // Parameter blocks, exposed for tests and checkpoint tooling.
  const nn::Mlp& hypernet() const {
    return hyper_;
  }
  const nn::Dense& inr_layer(int l) const {
    return inr_[l];
  }
  int layer_in(int l) const;
  int layer_out(int l) const;
  /// Offset of layer l's A (then B) factors inside the hypernet output.
  Eigen::Index factor_offset(int l) const {
    return factor_offsets_[l];
  }
  Eigen::Index factor_size() const {
    return factor_size_;
  }

 private:
  InfillSpec spec_;
  nn::Mlp hyper_;
  std::vector<nn::Dense> inr_;
  std::vector<Eigen::Index> factor_offsets_;
  Eigen::Index factor_size_ = 0;
  Eigen::VectorXd params_;
};

/// Fourier features [tau, sin(2^k pi tau), cos(2^k pi tau)]_{k < K}.
Eigen::MatrixXd encode_tau(const TemporalCoordinates& tau, int fourier);

/// Full inference: hypernet, INR, root = lerp + offset, endpoint blend.
MotionImage infill(
    const InfillModel& model,
    const Eigen::Ref<const Eigen::VectorXd>& first_frame,
    const Eigen::Ref<const Eigen::VectorXd>& last_frame,
    const TemporalCoordinates& tau,
    double fps = 30.0,
    int window = kDefaultBlendWindow);

/// INR output assembled into a motion image before endpoint blending,
/// plus the contact probabilities of the head.
struct MotionPrediction {
  MotionImage motion;
  Eigen::MatrixXd contact_prob; // 8 x T
};

MotionPrediction predict_raw(
    const InfillModel& model,
    const Eigen::Ref<const Eigen::VectorXd>& first_frame,
    const Eigen::Ref<const Eigen::VectorXd>& last_frame,
    const TemporalCoordinates& tau,
    double fps = 30.0);

// ---------------------------------------------------------------------------
// Loss and training

struct LossWeightsMotion {
  double theta = 1.0;
  double t = 1.0;
  double v = 1.0;
  double contact = 0.1;

  /// Throws kInvalidArgument when negative or all zero.
  void validate() const;
};

struct MotionLossOptions {
  LossWeightsMotion weights;
  ContactSource contact_source = ContactSource::kPredictedHead;
  double height_eps = kDefaultContactHeight;
  double speed_eps = kDefaultContactSpeed;
};

/// Unweighted components plus the weighted total.
struct MotionLossTerms {
  double theta = 0.0;
  double t = 0.0;
  double v = 0.0;
  double contact = 0.0;
  double total = 0.0;

  MotionLossTerms& operator+=(const MotionLossTerms& o);
  MotionLossTerms scaled(double s) const;
};

/// Loss between a prediction and ground truth. Markers are the skeleton's
/// generic markers; ground-truth contacts come from contact_labels().
MotionLossTerms motion_loss(
    const MotionPrediction& pred,
    const MotionImage& gt,
    const Skeleton& skel,
    const MotionLossOptions& options);

/// Everything one training window needs, precomputed once.
struct TrainingSample {
  ContextInput context;
  TemporalCoordinates tau;
  Eigen::MatrixXd gt_pose;        // 6J x T
  Eigen::Matrix3Xd gt_root;       // 3 x T
  Eigen::Matrix3Xd root_base;     // lerp of the endpoints, 3 x T
  Eigen::MatrixXd gt_markers;     // 3M x T, generic markers
  Eigen::MatrixXd gt_contacts;    // 8 x T in {0, 1}
  double fps = 30.0;
};

TrainingSample make_training_sample(
    const Skeleton& skel,
    const MotionImage& window,
    double height_eps = kDefaultContactHeight,
    double speed_eps = kDefaultContactSpeed);

/// Loss for one sample; accumulates dLoss/dparams into `grad` when given.
MotionLossTerms sample_loss(
    const InfillModel& model,
    const Skeleton& skel,
    const TrainingSample& sample,
    const MotionLossOptions& options,
    Eigen::VectorXd* grad = nullptr);

struct InfillTrainConfig {
  int epochs = 300;
  int batch = 16;
  double learning_rate = 1e-3;
  double clip_norm = 5.0;
  std::uint64_t seed = 0;
  MotionLossOptions loss;
  int threads = 1;
  /// Called after every epoch with (epoch, mean terms).
  std::function<void(int, const MotionLossTerms&)> on_epoch;
};

struct InfillTrainResult {
  std::vector<MotionLossTerms> curve;
};

/// Mini-batch Adam over all windows. Deterministic for a given seed and
/// independent of `threads`. Throws kNonFiniteLoss.
InfillTrainResult train(
    InfillModel& model,
    const Skeleton& skel,
    std::span<const TrainingSample> dataset,
    const InfillTrainConfig& config);

struct GradCheckOptions {
  double epsilon = 1e-5;
  int parameters = 200;
  std::uint64_t seed = 0;
  /// Floor on the denominator of the relative error.
  double denominator_floor = 1e-6;
  /// Test hook applied to the analytic gradient before comparison.
  std::function<void(const InfillModel&, Eigen::VectorXd&)> mutate_analytic;
};

struct GradCheckResult {
  double max_relative_error = 0.0;
  double max_abs_analytic = 0.0;
  double max_abs_numeric = 0.0;
  int checked = 0;
};

/// Central finite differences against the analytic gradient on a seeded
/// random subset of parameters.
GradCheckResult grad_check(
    const InfillModel& model,
    const Skeleton& skel,
    const TrainingSample& sample,
    const MotionLossOptions& options,
    const GradCheckOptions& check = {});

/// A sample whose residuals sit well away from the kinks of the L1 / L2
/// terms so central differences are valid: the model's own prediction
/// shifted by seeded offsets of magnitude [0.05, 0.15].
TrainingSample make_gradcheck_sample(
    const InfillModel& model,
    const Skeleton& skel,
    int frames,
    std::uint64_t seed);

} // namespace homi
