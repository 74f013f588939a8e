#include "homi/infill.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>
#include <thread>

#include "homi/error.h"

namespace homi {

// ---------------------------------------------------------------------------
// Temporal coordinates

namespace {

TemporalCoordinates uniform_tau(int frames) {
  TemporalCoordinates out;
  out.tau.resize(frames);
  for (int i = 0; i < frames; ++i) {
    out.tau[i] = static_cast<double>(i) / (frames - 1);
  }
  out.tau.back() = 1.0;
  return out;
}

} // namespace

TemporalCoordinates make_tau(TauKind kind, int frames, double param) {
  HOMI_CHECK(frames >= 2, ErrorCode::kInvalidArgument, "make_tau needs at least two frames");
  switch (kind) {
    case TauKind::kUniform:
      return uniform_tau(frames);
    case TauKind::kSpeed: {
      HOMI_CHECK(std::isfinite(param) && param > 0.0, ErrorCode::kBadFactor, "speed factor must be positive");
      const int count = static_cast<int>(std::floor(frames / param));
      HOMI_CHECK(
          count >= 2,
          ErrorCode::kBadFactor,
          "speed factor leaves fewer than two frames");
      return uniform_tau(count);
    }
    case TauKind::kGeometric: {
      HOMI_CHECK(std::isfinite(param) && param > 0.0, ErrorCode::kBadRatio, "geometric ratio must be positive");
      const int intervals = frames - 1;
      std::vector<double> len(intervals);
      double sum = 0.0;
      for (int k = 0; k < intervals; ++k) {
        len[k] = std::pow(param, k);
        sum += len[k];
      }
      TemporalCoordinates out;
      out.tau.resize(frames);
      out.tau[0] = 0.0;
      for (int k = 0; k < intervals; ++k) {
        out.tau[k + 1] = out.tau[k] + len[k] / sum;
      }
      out.tau.back() = 1.0;
      return out;
    }
  }
  fail(ErrorCode::kInvalidArgument, "unknown tau kind");
}

TemporalCoordinates parse_tau_spec(std::string_view spec, int base_frames) {
  const auto colon = spec.find(':');
  HOMI_CHECK(
      colon != std::string_view::npos,
      ErrorCode::kBadTauSpec,
      "tau spec '" + std::string(spec) + "' is not of the form kind:value");
  const std::string_view kind = spec.substr(0, colon);
  const std::string_view value = spec.substr(colon + 1);
  double number = 0.0;
  const auto [end, ec] = std::from_chars(value.data(), value.data() + value.size(), number);
  HOMI_CHECK(
      ec == std::errc() && end == value.data() + value.size(),
      ErrorCode::kBadTauSpec,
      "tau spec '" + std::string(spec) + "' has a malformed value");
  if (kind == "uniform") {
    HOMI_CHECK(
        number == std::floor(number) && number >= 2 && number <= 1e7,
        ErrorCode::kBadTauSpec,
        "uniform tau needs an integer frame count >= 2");
    return make_tau(TauKind::kUniform, static_cast<int>(number));
  }
  if (kind == "speed") {
    return make_tau(TauKind::kSpeed, base_frames, number);
  }
  if (kind == "geo") {
    return make_tau(TauKind::kGeometric, base_frames, number);
  }
  fail(ErrorCode::kBadTauSpec, "unknown tau kind '" + std::string(kind) + "'");
}

// ---------------------------------------------------------------------------
// Context

ContextInput ContextInput::from_frames(
    const Eigen::Ref<const Eigen::VectorXd>& first,
    const Eigen::Ref<const Eigen::VectorXd>& last,
    int joints) {
  HOMI_CHECK(
      first.size() == 6 * joints + 3 && last.size() == 6 * joints + 3,
      ErrorCode::kShapeMismatch,
      "endpoint frame height does not match the skeleton");
  ContextInput ctx;
  ctx.theta_first = first.head(6 * joints);
  ctx.theta_last = last.head(6 * joints);
  ctx.d_first_to_last = last.segment<3>(6 * joints) - first.segment<3>(6 * joints);
  return ctx;
}

Eigen::VectorXd ContextInput::flatten() const {
  Eigen::VectorXd out(theta_first.size() + theta_last.size() + 3);
  out << theta_first, theta_last, d_first_to_last;
  return out;
}

void ContextInput::validate(int joints) const {
  HOMI_CHECK(
      theta_first.size() == 6 * joints && theta_last.size() == 6 * joints,
      ErrorCode::kShapeMismatch,
      "context pose has wrong length");
  for (int j = 0; j < joints; ++j) {
    rot6d_to_matrix(Vec6(theta_first.segment<6>(6 * j)));
    rot6d_to_matrix(Vec6(theta_last.segment<6>(6 * j)));
  }
}

std::string_view to_string(ContactSource source) {
  return source == ContactSource::kPredictedHead ? "head" : "markers";
}

ContactSource contact_source_from_string(std::string_view text) {
  if (text == "head") {
    return ContactSource::kPredictedHead;
  }
  if (text == "markers") {
    return ContactSource::kDerivedFromMarkers;
  }
  fail(ErrorCode::kConfig, "unknown contact source '" + std::string(text) + "'");
}

// ---------------------------------------------------------------------------
// Model

InfillSpec InfillSpec::for_skeleton(const Skeleton& skel, std::uint64_t seed) {
  InfillSpec spec;
  spec.skeleton = skel.name();
  spec.joints = skel.joint_count();
  spec.width = skel.joint_count() > 20 ? 256 : 64;
  spec.hyper_width = spec.width;
  spec.seed = seed;
  return spec;
}

InfillSpec InfillSpec::tiny(const Skeleton& skel, std::uint64_t seed) {
  InfillSpec spec;
  spec.skeleton = skel.name();
  spec.joints = skel.joint_count();
  spec.width = 4;
  spec.hyper_width = 4;
  spec.hyper_layers = 1;
  spec.rank = 2;
  spec.fourier = 2;
  spec.seed = seed;
  return spec;
}

InfillModel::InfillModel(const InfillSpec& spec) : spec_(spec) {
  HOMI_CHECK(spec.joints >= 1, ErrorCode::kConfig, "infill model needs joints");
  HOMI_CHECK(spec.width >= 1 && spec.hyper_width >= 1, ErrorCode::kConfig, "layer widths must be positive");
  HOMI_CHECK(spec.hyper_layers >= 1, ErrorCode::kConfig, "hypernetwork needs a hidden layer");
  HOMI_CHECK(spec.rank >= 1, ErrorCode::kConfig, "FMM rank must be positive");
  HOMI_CHECK(spec.fourier >= 0, ErrorCode::kConfig, "Fourier frequency count must be nonnegative");

  factor_offsets_.resize(InfillSpec::kLayers);
  factor_size_ = 0;
  for (int l = 0; l < InfillSpec::kLayers; ++l) {
    factor_offsets_[l] = factor_size_;
    factor_size_ += static_cast<Eigen::Index>(spec.rank) * (layer_out(l) + layer_in(l));
  }

  nn::ParameterLayout layout;
  std::vector<int> dims{spec.context_dim()};
  for (int i = 0; i < spec.hyper_layers; ++i) {
    dims.push_back(spec.hyper_width);
  }
  dims.push_back(static_cast<int>(factor_size_));
  hyper_ = nn::Mlp(dims, spec.activation, layout);
  for (int l = 0; l < InfillSpec::kLayers; ++l) {
    nn::Dense d;
    d.weight = layout.add(layer_out(l), layer_in(l));
    d.bias = layout.add(layer_out(l), 1);
    inr_.push_back(d);
  }

  params_ = Eigen::VectorXd::Zero(layout.size());
  Rng rng = make_rng(spec.seed);
  hyper_.init(params_, rng, 0.5);
  // Factor bias 1/sqrt(r) centres every entry of A B near 1.
  nn::view(params_, hyper_.layers().back().bias).setConstant(1.0 / std::sqrt(static_cast<double>(spec.rank)));
  for (int l = 0; l < InfillSpec::kLayers; ++l) {
    const bool last = l + 1 == InfillSpec::kLayers;
    init_uniform(params_, inr_[l].weight, layer_in(l), last ? 0.5 : std::sqrt(6.0), rng);
  }
  if (!spec.pose_residual) {
    auto bias = nn::view(params_, inr_.back().bias);
    const Vec6 identity = Rotation6D::identity().r;
    for (int j = 0; j < spec.joints; ++j) {
      bias.block<6, 1>(6 * j, 0) = identity;
    }
  }
}

int InfillModel::layer_in(int l) const {
  if (l == 0) {
    return spec_.encoding_dim();
  }
  if (l == InfillSpec::kSkipLayer) {
    return spec_.width + spec_.encoding_dim();
  }
  return spec_.width;
}

int InfillModel::layer_out(int l) const {
  return l + 1 == InfillSpec::kLayers ? spec_.output_dim() : spec_.width;
}

Eigen::MatrixXd encode_tau(const TemporalCoordinates& tau, int fourier) {
  Eigen::MatrixXd out(2 * fourier + 1, tau.size());
  for (int n = 0; n < tau.size(); ++n) {
    const double t = tau.tau[n];
    out(0, n) = t;
    for (int k = 0; k < fourier; ++k) {
      const double arg = std::ldexp(std::numbers::pi, k) * t;
      out(1 + 2 * k, n) = std::sin(arg);
      out(2 + 2 * k, n) = std::cos(arg);
    }
  }
  return out;
}

namespace {

using nn::Activation;

struct InrLayerView {
  Eigen::MatrixXd effective;
  Eigen::MatrixXd modulation;
  Eigen::VectorXd bias;
};

struct InrCache {
  std::vector<Eigen::MatrixXd> inputs;
  std::vector<Eigen::MatrixXd> pre;
};

// Evaluates every column with an identical instruction sequence (fresh,
// equally aligned temporaries) so a column depends on its own tau only,
// bit for bit, whatever the other columns are.
Eigen::MatrixXd inr_forward(
    const std::vector<InrLayerView>& layers,
    const Eigen::MatrixXd& encoded,
    int skip,
    Activation act,
    InrCache* cache) {
  const Eigen::Index frames = encoded.cols();
  const int count = static_cast<int>(layers.size());
  if (cache != nullptr) {
    cache->inputs.assign(count, Eigen::MatrixXd());
    cache->pre.assign(count, Eigen::MatrixXd());
    for (int l = 0; l < count; ++l) {
      cache->inputs[l].resize(layers[l].effective.cols(), frames);
      cache->pre[l].resize(layers[l].effective.rows(), frames);
    }
  }
  Eigen::MatrixXd out(layers.back().effective.rows(), frames);
  for (Eigen::Index n = 0; n < frames; ++n) {
    Eigen::VectorXd h = encoded.col(n);
    for (int l = 0; l < count; ++l) {
      const Eigen::MatrixXd& w = layers[l].effective;
      Eigen::VectorXd x;
      if (l == skip) {
        x.resize(h.size() + encoded.rows());
        x << h, encoded.col(n);
      } else {
        x = std::move(h);
      }
      Eigen::VectorXd z = layers[l].bias;
      for (Eigen::Index k = 0; k < w.cols(); ++k) {
        z += w.col(k) * x[k];
      }
      if (cache != nullptr) {
        cache->inputs[l].col(n) = x;
        cache->pre[l].col(n) = z;
      }
      if (l + 1 < count) {
        Eigen::MatrixXd zm = z;
        nn::activate(act, zm);
        h = zm.col(0);
      } else {
        out.col(n) = z;
      }
    }
  }
  return out;
}

std::vector<InrLayerView> layers_from_factors(const InfillModel& model, const Eigen::VectorXd& factors) {
  const InfillSpec& spec = model.spec();
  std::vector<InrLayerView> out(InfillSpec::kLayers);
  for (int l = 0; l < InfillSpec::kLayers; ++l) {
    const int rows = model.layer_out(l);
    const int cols = model.layer_in(l);
    const double* base = factors.data() + model.factor_offset(l);
    const nn::ConstMatMap a(base, rows, spec.rank);
    const nn::ConstMatMap b(base + static_cast<Eigen::Index>(rows) * spec.rank, spec.rank, cols);
    out[l].modulation = a * b;
    out[l].effective = nn::view(model.parameters(), model.inr_layer(l).weight).cwiseProduct(out[l].modulation);
    out[l].bias = nn::view(model.parameters(), model.inr_layer(l).bias).col(0);
  }
  return out;
}

inline double sigmoid(double x) {
  return 1.0 / (1.0 + std::exp(-x));
}

// log(1 + exp(x)) without overflow.
inline double softplus(double x) {
  return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

inline double sign(double x) {
  return static_cast<double>((x > 0.0) - (x < 0.0));
}

Eigen::MatrixXd pose_base(const ContextInput& ctx, const TemporalCoordinates& tau) {
  Eigen::MatrixXd out(ctx.theta_first.size(), tau.size());
  for (int n = 0; n < tau.size(); ++n) {
    const double u = tau.tau[n];
    out.col(n) = (1.0 - u) * ctx.theta_first + u * ctx.theta_last;
  }
  return out;
}

} // namespace

FmmInrWeights InfillModel::encode_context(const ContextInput& ctx) const {
  ctx.validate(spec_.joints);
  const Eigen::VectorXd factors = hyper_.forward(params_, ctx.flatten()).col(0);
  FmmInrWeights out;
  out.rank = spec_.rank;
  out.pose_residual = spec_.pose_residual;
  out.theta_first = ctx.theta_first;
  out.theta_last = ctx.theta_last;
  out.layers.resize(InfillSpec::kLayers);
  for (int l = 0; l < InfillSpec::kLayers; ++l) {
    const int rows = layer_out(l);
    const int cols = layer_in(l);
    const double* base = factors.data() + factor_offsets_[l];
    FmmLayer& layer = out.layers[l];
    layer.a = nn::ConstMatMap(base, rows, spec_.rank);
    layer.b = nn::ConstMatMap(base + static_cast<Eigen::Index>(rows) * spec_.rank, spec_.rank, cols);
    layer.base = nn::view(params_, inr_[l].weight);
    layer.bias = nn::view(params_, inr_[l].bias).col(0);
  }
  return out;
}

InrOutput InfillModel::eval_inr(const FmmInrWeights& weights, const TemporalCoordinates& tau) const {
  tau.validate();
  HOMI_CHECK(
      static_cast<int>(weights.layers.size()) == InfillSpec::kLayers,
      ErrorCode::kShapeMismatch,
      "INR weights have the wrong layer count");
  std::vector<InrLayerView> layers(InfillSpec::kLayers);
  for (int l = 0; l < InfillSpec::kLayers; ++l) {
    const FmmLayer& src = weights.layers[l];
    HOMI_CHECK(
        src.base.rows() == layer_out(l) && src.base.cols() == layer_in(l) && src.a.rows() == src.base.rows() &&
            src.b.cols() == src.base.cols() && src.a.cols() == src.b.rows(),
        ErrorCode::kShapeMismatch,
        "INR layer " + std::to_string(l) + " has inconsistent shapes");
    layers[l].effective = src.effective();
    layers[l].bias = src.bias;
  }
  const Eigen::MatrixXd y =
      inr_forward(layers, encode_tau(tau, spec_.fourier), InfillSpec::kSkipLayer, spec_.activation, nullptr);
  const int pose_rows = 6 * spec_.joints;
  InrOutput out;
  out.pose = y.topRows(pose_rows);
  if (weights.pose_residual) {
    ContextInput ctx;
    ctx.theta_first = weights.theta_first;
    ctx.theta_last = weights.theta_last;
    out.pose += pose_base(ctx, tau);
  }
  out.t_off = y.middleRows(pose_rows, 3);
  out.contact_logits = y.bottomRows(InfillSpec::kContactChannels);
  return out;
}

MotionPrediction predict_raw(
    const InfillModel& model,
    const Eigen::Ref<const Eigen::VectorXd>& first_frame,
    const Eigen::Ref<const Eigen::VectorXd>& last_frame,
    const TemporalCoordinates& tau,
    double fps) {
  const int joints = model.spec().joints;
  const ContextInput ctx = ContextInput::from_frames(first_frame, last_frame, joints);
  const FmmInrWeights weights = model.encode_context(ctx);
  const InrOutput inr = model.eval_inr(weights, tau);

  MotionPrediction pred{MotionImage(model.spec().skeleton, joints, tau.size(), fps), Eigen::MatrixXd()};
  pred.motion.data.topRows(6 * joints) = inr.pose;
  pred.motion.data.bottomRows(3) =
      root_lerp(first_frame.segment<3>(6 * joints), last_frame.segment<3>(6 * joints), tau) + inr.t_off;
  pred.contact_prob = inr.contact_logits.unaryExpr([](double z) { return sigmoid(z); });
  return pred;
}

MotionImage infill(
    const InfillModel& model,
    const Eigen::Ref<const Eigen::VectorXd>& first_frame,
    const Eigen::Ref<const Eigen::VectorXd>& last_frame,
    const TemporalCoordinates& tau,
    double fps,
    int window) {
  const MotionPrediction pred = predict_raw(model, first_frame, last_frame, tau, fps);
  return blend_endpoints(pred.motion, first_frame, last_frame, window);
}

// ---------------------------------------------------------------------------
// Loss

void LossWeightsMotion::validate() const {
  for (double w : {theta, t, v, contact}) {
    HOMI_CHECK(std::isfinite(w) && w >= 0.0, ErrorCode::kInvalidArgument, "loss weights must be nonnegative");
  }
  HOMI_CHECK(
      theta > 0.0 || t > 0.0 || v > 0.0 || contact > 0.0,
      ErrorCode::kInvalidArgument,
      "at least one motion loss weight must be nonzero");
}

MotionLossTerms& MotionLossTerms::operator+=(const MotionLossTerms& o) {
  theta += o.theta;
  t += o.t;
  v += o.v;
  contact += o.contact;
  total += o.total;
  return *this;
}

MotionLossTerms MotionLossTerms::scaled(double s) const {
  return {theta * s, t * s, v * s, contact * s, total * s};
}

namespace {

// Soft foot-contact probability used by ContactSource::kDerivedFromMarkers.
constexpr double kSoftHeight = 0.01; // m
constexpr double kSoftSpeed = 0.025; // m/s
constexpr double kProbClamp = 1e-12;

struct LossTargets {
  const Eigen::MatrixXd& pose;
  const Eigen::Matrix3Xd& root;
  const Eigen::MatrixXd& markers;
  const Eigen::MatrixXd& contacts;
  double fps;
};

struct LossGrads {
  Eigen::MatrixXd pose;
  Eigen::Matrix3Xd root;
  Eigen::MatrixXd logits;
};

double bce_prob(double p, double y) {
  p = std::clamp(p, kProbClamp, 1.0 - kProbClamp);
  return -(y * std::log(p) + (1.0 - y) * std::log(1.0 - p));
}

// FK backward for one frame. Accumulates into pose / root gradients.
void fk_backward(
    const Skeleton& skel,
    const PoseState& state,
    const Eigen::Ref<const Eigen::VectorXd>& pose6,
    std::vector<Vec3>& g_pos,
    std::vector<Mat3>& g_rot,
    Eigen::Ref<Eigen::VectorXd> g_pose,
    Eigen::Ref<Eigen::Vector3d> g_root) {
  const auto& parents = skel.parents();
  const auto& offsets = skel.offsets();
  for (int j = skel.joint_count() - 1; j >= 0; --j) {
    const int p = parents[j];
    Mat3 g_local;
    if (p < 0) {
      g_local = g_rot[j];
      g_root += g_pos[j];
    } else {
      g_local = state.global_rot[p].transpose() * g_rot[j];
      g_rot[p] += g_rot[j] * state.local_rot[j].transpose();
      g_pos[p] += g_pos[j];
      g_rot[p] += g_pos[j] * offsets[j].transpose();
    }
    g_pose.segment<6>(6 * j) += rot6d_to_matrix_vjp(Vec6(pose6.segment<6>(6 * j)), g_local);
  }
}

// Loss of a predicted (pose, root, contact) triple against targets. Exactly
// one of `logits` / `probs` is used for the head; the derived source ignores
// both. Fills `grads` (w.r.t. pose, root, logits) when non-null.
MotionLossTerms loss_terms(
    const Skeleton& skel,
    const Eigen::MatrixXd& pose_hat,
    const Eigen::Matrix3Xd& root_hat,
    const Eigen::MatrixXd* logits,
    const Eigen::MatrixXd* probs,
    const LossTargets& gt,
    const MotionLossOptions& options,
    LossGrads* grads) {
  const LossWeightsMotion& w = options.weights;
  w.validate();
  const int frames = static_cast<int>(pose_hat.cols());
  const int joints = skel.joint_count();
  const auto& generic = skel.generic_marker_ids();
  const auto& foot = skel.foot_marker_ids();
  const bool derived = options.contact_source == ContactSource::kDerivedFromMarkers;
  const int channels = InfillSpec::kContactChannels;
  HOMI_CHECK(
      pose_hat.rows() == 6 * joints && gt.pose.rows() == pose_hat.rows() && gt.pose.cols() == frames &&
          root_hat.cols() == frames && gt.root.cols() == frames &&
          gt.markers.rows() == 3 * static_cast<Eigen::Index>(generic.size()) && gt.markers.cols() == frames &&
          gt.contacts.rows() == channels && gt.contacts.cols() == frames,
      ErrorCode::kShapeMismatch,
      "motion loss inputs have inconsistent shapes");
  HOMI_CHECK(static_cast<int>(foot.size()) == channels, ErrorCode::kInvalidSkeleton, "expected eight foot markers");

  if (grads != nullptr) {
    grads->pose = Eigen::MatrixXd::Zero(pose_hat.rows(), frames);
    grads->root = Eigen::Matrix3Xd::Zero(3, frames);
    grads->logits = Eigen::MatrixXd::Zero(channels, frames);
  }

  MotionLossTerms terms;
  std::vector<PoseState> states(frames);
  std::vector<std::vector<Vec3>> g_pos(frames);
  std::vector<std::vector<Mat3>> g_rot(frames);
  Eigen::MatrixXd foot_pos(3 * channels, frames);

  for (int n = 0; n < frames; ++n) {
    // Pose term.
    const Eigen::VectorXd dpose = gt.pose.col(n) - pose_hat.col(n);
    const double norm = dpose.norm();
    terms.theta += norm;
    if (grads != nullptr && norm > 0.0) {
      grads->pose.col(n) -= (w.theta / norm) * dpose;
    }

    // Root term.
    const Vec3 droot = gt.root.col(n) - root_hat.col(n);
    terms.t += droot.cwiseAbs().sum();
    if (grads != nullptr) {
      for (int i = 0; i < 3; ++i) {
        grads->root(i, n) -= w.t * sign(droot[i]);
      }
    }

    // Marker term.
    states[n] = forward_kinematics(skel, pose_hat.col(n), root_hat.col(n));
    if (grads != nullptr) {
      g_pos[n].assign(joints, Vec3::Zero());
      g_rot[n].assign(joints, Mat3::Zero());
    }
    for (size_t k = 0; k < generic.size(); ++k) {
      const int id = generic[k];
      const Vec3 x = marker_position(skel, states[n], id);
      const Vec3 d = gt.markers.block<3, 1>(3 * k, n) - x;
      terms.v += d.cwiseAbs().sum();
      if (grads != nullptr) {
        const Vec3 gx = -w.v * d.unaryExpr([](double e) { return sign(e); });
        const Marker& m = skel.markers()[id];
        g_pos[n][m.joint] += gx;
        g_rot[n][m.joint] += gx * m.offset.transpose();
      }
    }
    for (int k = 0; k < channels; ++k) {
      foot_pos.block<3, 1>(3 * k, n) = marker_position(skel, states[n], foot[k]);
    }
  }

  // Contact term: mean over the eight labels, summed over frames.
  for (int n = 0; n < frames; ++n) {
    for (int k = 0; k < channels; ++k) {
      const double y = gt.contacts(k, n);
      if (!derived) {
        if (logits != nullptr) {
          const double z = (*logits)(k, n);
          terms.contact += (softplus(z) - y * z) / channels;
          if (grads != nullptr) {
            grads->logits(k, n) = w.contact * (sigmoid(z) - y) / channels;
          }
        } else {
          terms.contact += bce_prob((*probs)(k, n), y) / channels;
        }
        continue;
      }
      const int a = n == 0 ? 0 : n - 1;
      const int b = n == 0 ? 1 : n;
      const Vec3 x = foot_pos.block<3, 1>(3 * k, n);
      const Vec3 delta = foot_pos.block<3, 1>(3 * k, b) - foot_pos.block<3, 1>(3 * k, a);
      const double dist = std::sqrt(delta.squaredNorm() + 1e-12);
      const double speed = dist * gt.fps;
      const double sh = sigmoid((options.height_eps - x.z()) / kSoftHeight);
      const double ss = sigmoid((options.speed_eps - speed) / kSoftSpeed);
      const double p = sh * ss;
      terms.contact += bce_prob(p, y) / channels;
      if (grads != nullptr && p > kProbClamp && p < 1.0 - kProbClamp) {
        const double dp = w.contact * (-(y / p) + (1.0 - y) / (1.0 - p)) / channels;
        // d p / d z and d p / d speed
        const double dz = -dp * ss * sh * (1.0 - sh) / kSoftHeight;
        const double dspeed = -dp * sh * ss * (1.0 - ss) / kSoftSpeed;
        const Vec3 gdelta = dspeed * gt.fps * delta / dist;
        const Marker& m = skel.markers()[foot[k]];
        auto push = [&](int frame, const Vec3& g) {
          g_pos[frame][m.joint] += g;
          g_rot[frame][m.joint] += g * m.offset.transpose();
        };
        push(n, Vec3(0.0, 0.0, dz));
        push(b, gdelta);
        push(a, -gdelta);
      }
    }
  }

  if (grads != nullptr) {
    for (int n = 0; n < frames; ++n) {
      Eigen::VectorXd g_pose = grads->pose.col(n);
      Eigen::Vector3d g_root = grads->root.col(n);
      fk_backward(skel, states[n], pose_hat.col(n), g_pos[n], g_rot[n], g_pose, g_root);
      grads->pose.col(n) = g_pose;
      grads->root.col(n) = g_root;
    }
  }
  terms.total = w.theta * terms.theta + w.t * terms.t + w.v * terms.v + w.contact * terms.contact;
  return terms;
}

} // namespace

MotionLossTerms motion_loss(
    const MotionPrediction& pred,
    const MotionImage& gt,
    const Skeleton& skel,
    const MotionLossOptions& options) {
  HOMI_CHECK(
      pred.motion.joints == skel.joint_count() && gt.joints == skel.joint_count(),
      ErrorCode::kShapeMismatch,
      "motion joint count does not match the skeleton");
  HOMI_CHECK(
      pred.motion.frames() == gt.frames(), ErrorCode::kShapeMismatch, "prediction and target lengths differ");
  const int joints = skel.joint_count();
  const int frames = gt.frames();
  const bool head = options.contact_source == ContactSource::kPredictedHead;
  HOMI_CHECK(
      !head ||
          (pred.contact_prob.rows() == InfillSpec::kContactChannels && pred.contact_prob.cols() == frames),
      ErrorCode::kShapeMismatch,
      "contact probabilities must be 8 x T");

  const Eigen::MatrixXd gt_pose = gt.data.topRows(6 * joints);
  const Eigen::Matrix3Xd gt_root = gt.data.bottomRows(3);
  const Eigen::MatrixXd gt_markers = marker_sequence(skel, gt, skel.generic_marker_ids()).data;
  const Eigen::MatrixXd gt_contacts =
      contact_labels(marker_sequence(skel, gt, skel.foot_marker_ids()), gt.fps, options.height_eps, options.speed_eps)
          .c.cast<double>();
  const Eigen::MatrixXd pose_hat = pred.motion.data.topRows(6 * joints);
  const Eigen::Matrix3Xd root_hat = pred.motion.data.bottomRows(3);
  const LossTargets targets{gt_pose, gt_root, gt_markers, gt_contacts, gt.fps};
  return loss_terms(skel, pose_hat, root_hat, nullptr, &pred.contact_prob, targets, options, nullptr);
}

TrainingSample make_training_sample(
    const Skeleton& skel,
    const MotionImage& window,
    double height_eps,
    double speed_eps) {
  HOMI_CHECK(window.joints == skel.joint_count(), ErrorCode::kSkeletonMismatch, "window skeleton mismatch");
  const int joints = skel.joint_count();
  const int frames = window.frames();
  TrainingSample s;
  s.context = ContextInput::from_frames(window.data.col(0), window.data.col(frames - 1), joints);
  s.tau = make_tau(TauKind::kUniform, frames);
  s.gt_pose = window.data.topRows(6 * joints);
  s.gt_root = window.data.bottomRows(3);
  s.root_base = root_lerp(window.root(0), window.root(frames - 1), s.tau);
  s.gt_markers = marker_sequence(skel, window, skel.generic_marker_ids()).data;
  s.gt_contacts =
      contact_labels(marker_sequence(skel, window, skel.foot_marker_ids()), window.fps, height_eps, speed_eps)
          .c.cast<double>();
  s.fps = window.fps;
  return s;
}

MotionLossTerms sample_loss(
    const InfillModel& model,
    const Skeleton& skel,
    const TrainingSample& sample,
    const MotionLossOptions& options,
    Eigen::VectorXd* grad) {
  const InfillSpec& spec = model.spec();
  HOMI_CHECK(skel.joint_count() == spec.joints, ErrorCode::kSkeletonMismatch, "skeleton does not match model");
  const Eigen::VectorXd& params = model.parameters();
  const int joints = spec.joints;
  const int pose_rows = 6 * joints;

  nn::Mlp::Cache hcache;
  const Eigen::VectorXd factors =
      model.hypernet().forward(params, sample.context.flatten(), grad != nullptr ? &hcache : nullptr).col(0);
  const std::vector<InrLayerView> layers = layers_from_factors(model, factors);
  InrCache cache;
  const Eigen::MatrixXd encoded = encode_tau(sample.tau, spec.fourier);
  const Eigen::MatrixXd y = inr_forward(
      layers, encoded, InfillSpec::kSkipLayer, spec.activation, grad != nullptr ? &cache : nullptr);

  Eigen::MatrixXd pose_hat = y.topRows(pose_rows);
  if (spec.pose_residual) {
    pose_hat += pose_base(sample.context, sample.tau);
  }
  const Eigen::Matrix3Xd root_hat = sample.root_base + y.middleRows(pose_rows, 3);
  const Eigen::MatrixXd logits = y.bottomRows(InfillSpec::kContactChannels);
  const LossTargets targets{sample.gt_pose, sample.gt_root, sample.gt_markers, sample.gt_contacts, sample.fps};

  if (grad == nullptr) {
    return loss_terms(skel, pose_hat, root_hat, &logits, nullptr, targets, options, nullptr);
  }
  HOMI_CHECK(grad->size() == params.size(), ErrorCode::kShapeMismatch, "gradient buffer has wrong size");
  LossGrads lg;
  const MotionLossTerms terms = loss_terms(skel, pose_hat, root_hat, &logits, nullptr, targets, options, &lg);

  Eigen::MatrixXd g(y.rows(), y.cols());
  g.topRows(pose_rows) = lg.pose;
  g.middleRows(pose_rows, 3) = lg.root;
  g.bottomRows(InfillSpec::kContactChannels) = lg.logits;

  Eigen::VectorXd g_factors = Eigen::VectorXd::Zero(factors.size());
  for (int l = InfillSpec::kLayers - 1; l >= 0; --l) {
    if (l + 1 < InfillSpec::kLayers) {
      g = g.cwiseProduct(nn::activation_derivative(spec.activation, cache.pre[l]));
    }
    const Eigen::MatrixXd g_eff = g * cache.inputs[l].transpose();
    const nn::Dense& dense = model.inr_layer(l);
    nn::view(*grad, dense.bias).col(0) += g.rowwise().sum();
    const auto base = nn::view(params, dense.weight);
    nn::view(*grad, dense.weight) += g_eff.cwiseProduct(layers[l].modulation);
    const Eigen::MatrixXd g_mod = g_eff.cwiseProduct(base);

    const int rows = model.layer_out(l);
    const int cols = model.layer_in(l);
    const Eigen::Index off = model.factor_offset(l);
    const nn::ConstMatMap a(factors.data() + off, rows, spec.rank);
    const nn::ConstMatMap b(factors.data() + off + static_cast<Eigen::Index>(rows) * spec.rank, spec.rank, cols);
    nn::MatMap(g_factors.data() + off, rows, spec.rank) += g_mod * b.transpose();
    nn::MatMap(g_factors.data() + off + static_cast<Eigen::Index>(rows) * spec.rank, spec.rank, cols) +=
        a.transpose() * g_mod;

    if (l > 0) {
      Eigen::MatrixXd g_in = layers[l].effective.transpose() * g;
      g = l == InfillSpec::kSkipLayer ? Eigen::MatrixXd(g_in.topRows(spec.width)) : std::move(g_in);
    }
  }
  model.hypernet().backward(params, hcache, g_factors, *grad);
  return terms;
}

// ---------------------------------------------------------------------------
// Training

namespace {

bool finite(const MotionLossTerms& t) {
  return std::isfinite(t.theta) && std::isfinite(t.t) && std::isfinite(t.v) && std::isfinite(t.contact) &&
      std::isfinite(t.total);
}

std::string describe(const MotionLossTerms& t) {
  std::ostringstream os;
  os << "theta=" << t.theta << " t=" << t.t << " v=" << t.v << " contact=" << t.contact << " total=" << t.total;
  return os.str();
}

// Fisher-Yates with an explicit draw so the order is identical on every
// standard library.
void shuffle(std::vector<int>& v, Rng& rng) {
  for (size_t i = v.size(); i > 1; --i) {
    const size_t j = static_cast<size_t>(rng() % i);
    std::swap(v[i - 1], v[j]);
  }
}

} // namespace

InfillTrainResult train(
    InfillModel& model,
    const Skeleton& skel,
    std::span<const TrainingSample> dataset,
    const InfillTrainConfig& config) {
  config.loss.weights.validate();
  HOMI_CHECK(!dataset.empty(), ErrorCode::kInvalidArgument, "training set is empty");
  HOMI_CHECK(config.epochs >= 0 && config.batch >= 1, ErrorCode::kConfig, "epochs/batch must be positive");
  HOMI_CHECK(
      std::isfinite(config.learning_rate) && config.learning_rate > 0.0,
      ErrorCode::kConfig,
      "learning rate must be positive");

  const Eigen::Index size = model.parameter_count();
  nn::Adam adam(size, nn::AdamConfig{config.learning_rate});
  Rng rng = make_rng(config.seed);
  std::vector<int> order(dataset.size());
  std::iota(order.begin(), order.end(), 0);
  const int threads = std::max(1, config.threads);

  InfillTrainResult result;
  std::vector<Eigen::VectorXd> sample_grads;
  std::vector<MotionLossTerms> sample_terms;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    shuffle(order, rng);
    MotionLossTerms epoch_terms;
    for (size_t start = 0; start < order.size(); start += config.batch) {
      const size_t count = std::min(order.size() - start, static_cast<size_t>(config.batch));
      sample_grads.assign(count, Eigen::VectorXd());
      sample_terms.assign(count, MotionLossTerms());
      auto work = [&](size_t first, size_t step) {
        for (size_t i = first; i < count; i += step) {
          sample_grads[i] = Eigen::VectorXd::Zero(size);
          sample_terms[i] =
              sample_loss(model, skel, dataset[order[start + i]], config.loss, &sample_grads[i]);
        }
      };
      if (threads == 1 || count == 1) {
        work(0, 1);
      } else {
        std::vector<std::thread> pool;
        std::vector<std::exception_ptr> errors(threads);
        for (int t = 0; t < threads; ++t) {
          pool.emplace_back([&, t] {
            try {
              work(static_cast<size_t>(t), static_cast<size_t>(threads));
            } catch (...) {
              errors[t] = std::current_exception();
            }
          });
        }
        for (auto& th : pool) {
          th.join();
        }
        for (auto& e : errors) {
          if (e) {
            std::rethrow_exception(e);
          }
        }
      }

      // Fixed summation order keeps results independent of thread count.
      Eigen::VectorXd grad = Eigen::VectorXd::Zero(size);
      MotionLossTerms batch_terms;
      for (size_t i = 0; i < count; ++i) {
        grad += sample_grads[i];
        batch_terms += sample_terms[i];
      }
      const double inv = 1.0 / static_cast<double>(count);
      grad *= inv;
      batch_terms = batch_terms.scaled(inv);
      if (!finite(batch_terms) || !grad.allFinite()) {
        fail(
            ErrorCode::kNonFiniteLoss,
            "non-finite loss at epoch " + std::to_string(epoch) + ", batch starting at " + std::to_string(start) +
                ": " + describe(batch_terms));
      }
      nn::clip_grad_norm(grad, config.clip_norm);
      adam.step(model.parameters(), grad);
      epoch_terms += batch_terms.scaled(static_cast<double>(count));
    }
    epoch_terms = epoch_terms.scaled(1.0 / static_cast<double>(order.size()));
    result.curve.push_back(epoch_terms);
    if (config.on_epoch) {
      config.on_epoch(epoch, epoch_terms);
    }
  }
  return result;
}

// ---------------------------------------------------------------------------
// Gradient check

GradCheckResult grad_check(
    const InfillModel& model,
    const Skeleton& skel,
    const TrainingSample& sample,
    const MotionLossOptions& options,
    const GradCheckOptions& check) {
  const Eigen::Index size = model.parameter_count();
  Eigen::VectorXd analytic = Eigen::VectorXd::Zero(size);
  sample_loss(model, skel, sample, options, &analytic);
  if (check.mutate_analytic) {
    check.mutate_analytic(model, analytic);
  }

  // Partial Fisher-Yates for a seeded subset of distinct indices.
  std::vector<Eigen::Index> idx(size);
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  Rng rng = make_rng(check.seed);
  const Eigen::Index count = std::min<Eigen::Index>(size, check.parameters);
  for (Eigen::Index i = 0; i < count; ++i) {
    const Eigen::Index j = i + static_cast<Eigen::Index>(rng() % static_cast<std::uint64_t>(size - i));
    std::swap(idx[i], idx[j]);
  }

  InfillModel probe = model;
  GradCheckResult result;
  for (Eigen::Index i = 0; i < count; ++i) {
    const Eigen::Index p = idx[i];
    const double saved = probe.parameters()[p];
    probe.parameters()[p] = saved + check.epsilon;
    const double up = sample_loss(probe, skel, sample, options).total;
    probe.parameters()[p] = saved - check.epsilon;
    const double down = sample_loss(probe, skel, sample, options).total;
    probe.parameters()[p] = saved;
    const double numeric = (up - down) / (2.0 * check.epsilon);
    const double a = analytic[p];
    const double denom = std::max({std::abs(a), std::abs(numeric), check.denominator_floor});
    result.max_relative_error = std::max(result.max_relative_error, std::abs(a - numeric) / denom);
    result.max_abs_analytic = std::max(result.max_abs_analytic, std::abs(a));
    result.max_abs_numeric = std::max(result.max_abs_numeric, std::abs(numeric));
    ++result.checked;
  }
  return result;
}

TrainingSample make_gradcheck_sample(
    const InfillModel& model,
    const Skeleton& skel,
    int frames,
    std::uint64_t seed) {
  const int joints = skel.joint_count();
  Rng rng = make_rng(seed);
  MotionImage ends(skel.name(), joints, 2, 30.0);
  for (int n = 0; n < 2; ++n) {
    for (int j = 0; j < joints; ++j) {
      const Vec3 axis(normal(rng), normal(rng), normal(rng));
      ends.set_rot6(j, n, matrix_to_rot6d(axis_angle(axis.normalized(), uniform(rng, -0.6, 0.6))));
    }
    ends.set_root(n, Vec3(uniform(rng, -0.5, 0.5), uniform(rng, -0.5, 0.5), uniform(rng, 0.8, 1.0)));
  }
  const TemporalCoordinates tau = make_tau(TauKind::kUniform, frames);
  const MotionPrediction pred = predict_raw(model, ends.data.col(0), ends.data.col(1), tau);

  auto shift = [&](double value) {
    const double mag = uniform(rng, 0.05, 0.15);
    return value + (rng() % 2 == 0 ? mag : -mag);
  };
  TrainingSample s;
  s.context = ContextInput::from_frames(ends.data.col(0), ends.data.col(1), joints);
  s.tau = tau;
  s.fps = 30.0;
  s.gt_pose = pred.motion.data.topRows(6 * joints).unaryExpr(shift);
  s.root_base = root_lerp(ends.root(0), ends.root(1), tau);
  s.gt_root = pred.motion.data.bottomRows(3).unaryExpr(shift);
  s.gt_markers = marker_sequence(skel, pred.motion, skel.generic_marker_ids()).data.unaryExpr(shift);
  s.gt_contacts = Eigen::MatrixXd(InfillSpec::kContactChannels, frames);
  for (Eigen::Index i = 0; i < s.gt_contacts.size(); ++i) {
    s.gt_contacts(i) = static_cast<double>(rng() % 2);
  }
  return s;
}

} // namespace homi
