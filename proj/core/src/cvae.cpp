#include "homi/cvae.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "homi/error.h"
#include "homi/motion.h"

namespace homi {

Eigen::VectorXd TaskSpec::one_hot() const {
  validate();
  Eigen::VectorXd v = Eigen::VectorXd::Zero(task_count);
  v[task] = 1.0;
  return v;
}

void TaskSpec::validate() const {
  HOMI_CHECK(task_count >= 1, ErrorCode::kInvalidArgument, "task_count must be positive");
  HOMI_CHECK(task >= 0 && task < task_count, ErrorCode::kInvalidArgument, "task id out of range");
  HOMI_CHECK(beta.size() == kBetaSize, ErrorCode::kInvalidArgument, "beta must have 10 entries");
}

// ---------------------------------------------------------------------------
// Cvae

Normalizer Normalizer::identity(int dim) {
  return {Eigen::VectorXd::Zero(dim), Eigen::VectorXd::Ones(dim)};
}

Normalizer Normalizer::fit(const Eigen::MatrixXd& columns) {
  Normalizer n;
  const double count = static_cast<double>(std::max<Eigen::Index>(columns.cols(), 1));
  n.mean = columns.rowwise().sum() / count;
  const Eigen::MatrixXd centred = columns.colwise() - n.mean;
  n.scale = (centred.array().square().rowwise().sum() / count).sqrt().matrix();
  for (Eigen::Index i = 0; i < n.scale.size(); ++i) {
    if (n.scale[i] < 1e-6) {
      n.scale[i] = 1.0;
    }
  }
  return n;
}

Eigen::MatrixXd Normalizer::apply(const Eigen::MatrixXd& columns) const {
  return (columns.colwise() - mean).array().colwise() / scale.array();
}

Cvae::Cvae(const CvaeSpec& spec) : spec_(spec) {
  HOMI_CHECK(
      spec.x_dim > 0 && spec.cond_dim >= 0 && spec.out_dim > 0 && spec.latent > 0 && spec.hidden > 0 &&
          spec.depth >= 1,
      ErrorCode::kInvalidArgument,
      "invalid cVAE dimensions");
  nn::ParameterLayout layout;
  std::vector<int> enc_dims = {spec.x_dim + spec.cond_dim};
  std::vector<int> dec_dims = {spec.latent + spec.cond_dim};
  for (int i = 0; i < spec.depth; ++i) {
    enc_dims.push_back(spec.hidden);
    dec_dims.push_back(spec.hidden);
  }
  enc_dims.push_back(2 * spec.latent);
  dec_dims.push_back(spec.out_dim);
  enc_ = nn::Mlp(enc_dims, spec.activation, layout);
  dec_ = nn::Mlp(dec_dims, spec.activation, layout);
  params_ = Eigen::VectorXd::Zero(layout.size());
  Rng rng = make_rng(spec.seed);
  // Small encoder head starts the posterior near the prior.
  enc_.init(params_, rng, 0.1);
  dec_.init(params_, rng, 1.0);
  x_norm_ = Normalizer::identity(spec.x_dim);
  c_norm_ = Normalizer::identity(spec.cond_dim);
  y_norm_ = Normalizer::identity(spec.out_dim);
}

LatentSample Cvae::encode(const Eigen::VectorXd& x, const Eigen::VectorXd& cond, Rng* rng) const {
  HOMI_CHECK(
      x.size() == spec_.x_dim && cond.size() == spec_.cond_dim,
      ErrorCode::kShapeMismatch,
      "cVAE encoder input has the wrong size");
  Eigen::MatrixXd in(spec_.x_dim + spec_.cond_dim, 1);
  in.topRows(spec_.x_dim) = x_norm_.apply(x);
  in.bottomRows(spec_.cond_dim) = c_norm_.apply(cond);
  const Eigen::MatrixXd out = enc_.forward(params_, in);
  LatentSample s;
  s.mu = out.col(0).head(spec_.latent);
  s.sigma = out.col(0).tail(spec_.latent).array().exp().matrix();
  s.z = s.mu;
  if (rng != nullptr) {
    for (int i = 0; i < spec_.latent; ++i) {
      s.z[i] += s.sigma[i] * normal(*rng);
    }
  }
  return s;
}

Eigen::VectorXd Cvae::decode(const Eigen::VectorXd& z, const Eigen::VectorXd& cond) const {
  HOMI_CHECK(
      z.size() == spec_.latent && cond.size() == spec_.cond_dim,
      ErrorCode::kShapeMismatch,
      "cVAE decoder input has the wrong size");
  Eigen::MatrixXd in(spec_.latent + spec_.cond_dim, 1);
  in.topRows(spec_.latent) = z;
  in.bottomRows(spec_.cond_dim) = c_norm_.apply(cond);
  const Eigen::VectorXd raw = dec_.forward(params_, in).col(0);
  return y_norm_.mean + y_norm_.scale.cwiseProduct(raw);
}

Eigen::VectorXd Cvae::sample(const Eigen::VectorXd& cond, Rng& rng) const {
  Eigen::VectorXd z(spec_.latent);
  for (int i = 0; i < spec_.latent; ++i) {
    z[i] = normal(rng);
  }
  return decode(z, cond);
}

double kl_loss(const Eigen::VectorXd& mu, const Eigen::VectorXd& sigma) {
  HOMI_CHECK(mu.size() == sigma.size(), ErrorCode::kShapeMismatch, "mu and sigma differ in size");
  HOMI_CHECK((sigma.array() > 0.0).all(), ErrorCode::kInvalidArgument, "sigma must be positive");
  const Eigen::ArrayXd s2 = sigma.array().square();
  return 0.5 * (mu.array().square() + s2 - 1.0 - s2.log()).sum();
}

CvaeTrainCurve train_cvae(
    Cvae& net,
    const Eigen::MatrixXd& x,
    const Eigen::MatrixXd& cond,
    const Eigen::MatrixXd& target,
    const ReconstructionLoss& recon,
    const CvaeTrainConfig& config) {
  const CvaeSpec& spec = net.spec();
  const Eigen::Index n = x.cols();
  HOMI_CHECK(n > 0, ErrorCode::kInvalidArgument, "empty training set");
  HOMI_CHECK(
      x.rows() == spec.x_dim && cond.rows() == spec.cond_dim && target.rows() == spec.out_dim &&
          cond.cols() == n && target.cols() == n,
      ErrorCode::kShapeMismatch,
      "training matrices do not match the cVAE spec");
  HOMI_CHECK(config.epochs >= 0 && config.batch >= 1, ErrorCode::kInvalidArgument, "bad epoch or batch count");

  net.x_norm() = Normalizer::fit(x);
  net.cond_norm() = Normalizer::fit(cond);
  net.out_norm() = Normalizer::fit(target);
  const Normalizer& yn = net.out_norm();
  const Eigen::MatrixXd xn = net.x_norm().apply(x);
  const Eigen::MatrixXd cn = net.cond_norm().apply(cond);

  Eigen::VectorXd& params = net.parameters();
  nn::Adam adam(params.size(), nn::AdamConfig{config.learning_rate});
  Rng rng = make_rng(config.seed);
  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), 0);
  const int latent = spec.latent;

  HOMI_CHECK(config.final_lr_fraction > 0.0, ErrorCode::kInvalidArgument, "final_lr_fraction must be positive");
  CvaeTrainCurve curve;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    if (config.epochs > 1) {
      const double u = static_cast<double>(epoch) / (config.epochs - 1);
      adam.set_learning_rate(config.learning_rate * std::pow(config.final_lr_fraction, u));
    }
    for (Eigen::Index i = n - 1; i > 0; --i) {
      std::swap(order[i], order[rng() % static_cast<std::uint64_t>(i + 1)]);
    }
    double recon_sum = 0.0;
    double kl_sum = 0.0;
    for (Eigen::Index start = 0; start < n; start += config.batch) {
      const Eigen::Index b = std::min<Eigen::Index>(config.batch, n - start);
      Eigen::MatrixXd enc_in(spec.x_dim + spec.cond_dim, b);
      Eigen::MatrixXd tgt(spec.out_dim, b);
      for (Eigen::Index k = 0; k < b; ++k) {
        const Eigen::Index idx = order[start + k];
        enc_in.col(k).head(spec.x_dim) = xn.col(idx);
        enc_in.col(k).tail(spec.cond_dim) = cn.col(idx);
        tgt.col(k) = target.col(idx);
      }
      nn::Mlp::Cache enc_cache;
      const Eigen::MatrixXd enc_out = net.encoder().forward(params, enc_in, &enc_cache);
      const Eigen::MatrixXd mu = enc_out.topRows(latent);
      const Eigen::MatrixXd sigma = enc_out.bottomRows(latent).array().exp().matrix();
      Eigen::MatrixXd eps(latent, b);
      for (Eigen::Index k = 0; k < b; ++k) {
        for (int i = 0; i < latent; ++i) {
          eps(i, k) = normal(rng);
        }
      }
      Eigen::MatrixXd dec_in(latent + spec.cond_dim, b);
      dec_in.topRows(latent) = mu + sigma.cwiseProduct(eps);
      dec_in.bottomRows(spec.cond_dim) = enc_in.bottomRows(spec.cond_dim);
      nn::Mlp::Cache dec_cache;
      const Eigen::MatrixXd raw = net.decoder().forward(params, dec_in, &dec_cache);
      const Eigen::MatrixXd pred = ((raw.array().colwise() * yn.scale.array()).colwise() + yn.mean.array()).matrix();

      Eigen::MatrixXd d_pred = Eigen::MatrixXd::Zero(pred.rows(), b);
      const double rec = recon(pred, tgt, d_pred);
      double kl = 0.0;
      for (Eigen::Index k = 0; k < b; ++k) {
        kl += kl_loss(mu.col(k), sigma.col(k));
      }
      if (!std::isfinite(rec) || !std::isfinite(kl)) {
        fail(ErrorCode::kNonFiniteLoss, "cVAE loss became non-finite in epoch " + std::to_string(epoch));
      }
      recon_sum += rec;
      kl_sum += kl;

      const double inv_b = 1.0 / static_cast<double>(b);
      Eigen::VectorXd grad = Eigen::VectorXd::Zero(params.size());
      const Eigen::MatrixXd d_dec_in = net.decoder().backward(
          params, dec_cache, (d_pred.array().colwise() * yn.scale.array()).matrix() * inv_b, grad);
      const Eigen::MatrixXd dz = d_dec_in.topRows(latent);
      Eigen::MatrixXd d_enc_out(2 * latent, b);
      const double w = config.kl_weight * inv_b;
      d_enc_out.topRows(latent) = dz + w * mu;
      d_enc_out.bottomRows(latent) = (dz.array() * sigma.array() * eps.array() +
                                      w * (sigma.array().square() - 1.0))
                                         .matrix();
      net.encoder().backward(params, enc_cache, d_enc_out, grad);
      nn::clip_grad_norm(grad, config.clip_norm);
      adam.step(params, grad);
    }
    const double rec_mean = recon_sum / static_cast<double>(n);
    const double kl_mean = kl_sum / static_cast<double>(n);
    curve.reconstruction.push_back(rec_mean);
    curve.kl.push_back(kl_mean);
    if (config.on_epoch) {
      config.on_epoch(epoch, rec_mean, kl_mean);
    }
  }
  return curve;
}

// ---------------------------------------------------------------------------
// Object parameters sampler

void LossWeightsSampler::validate() const {
  HOMI_CHECK(t >= 0.0 && r >= 0.0 && kl >= 0.0, ErrorCode::kInvalidArgument, "sampler loss weights must be >= 0");
  HOMI_CHECK(t + r + kl > 0.0, ErrorCode::kInvalidArgument, "sampler loss weights are all zero");
}

ObjectSampler::ObjectSampler(const CvaeSpec& spec, int task_count, bool use_beta)
    : net_(spec), task_count_(task_count), use_beta_(use_beta) {}

Eigen::VectorXd ObjectSampler::condition(const TaskSpec& task) const {
  task.validate();
  HOMI_CHECK(task.task_count == task_count_, ErrorCode::kShapeMismatch, "task vocabulary size differs");
  Eigen::VectorXd c(condition_dim(task_count_));
  c << task.one_hot(), (use_beta_ ? task.beta : Eigen::VectorXd::Zero(kBetaSize)), task.t_init, task.r_init.r;
  return c;
}

namespace {

ObjectOffset offset_from(const Eigen::VectorXd& out) {
  ObjectOffset o;
  o.t_off = out.head<3>();
  o.r_off = Rotation6D(matrix_to_rot6d(rot6d_to_matrix(Vec6(out.segment<6>(3)))));
  return o;
}

Eigen::VectorXd offset_vector(const ObjectOffset& o) {
  Eigen::VectorXd v(9);
  v << o.t_off, o.r_off.r;
  return v;
}

} // namespace

ObjectOffset ObjectSampler::decode(const Eigen::VectorXd& z, const TaskSpec& task) const {
  return offset_from(net_.decode(z, condition(task)));
}

ObjectOffset ObjectSampler::mean(const TaskSpec& task) const {
  return decode(Eigen::VectorXd::Zero(net_.spec().latent), task);
}

ObjectSampler sampler_train(std::span<const SamplerExample> data, const SamplerConfig& config, CvaeTrainCurve* curve) {
  config.weights.validate();
  HOMI_CHECK(!data.empty(), ErrorCode::kInvalidArgument, "empty sampler dataset");
  const int task_count = data.front().task.task_count;
  std::vector<bool> seen(task_count, false);
  for (const auto& ex : data) {
    ex.task.validate();
    HOMI_CHECK(ex.task.task_count == task_count, ErrorCode::kShapeMismatch, "mixed task vocabularies");
    seen[ex.task.task] = true;
  }
  HOMI_CHECK(
      std::count(seen.begin(), seen.end(), true) >= 2,
      ErrorCode::kInvalidArgument,
      "sampler training needs at least two task types");

  CvaeSpec spec;
  spec.x_dim = ObjectSampler::kOutputDim;
  spec.cond_dim = ObjectSampler::condition_dim(task_count);
  spec.out_dim = ObjectSampler::kOutputDim;
  spec.latent = config.latent;
  spec.hidden = config.hidden;
  spec.seed = config.train.seed;
  ObjectSampler sampler(spec, task_count, config.use_beta);

  const auto n = static_cast<Eigen::Index>(data.size());
  Eigen::MatrixXd x(spec.x_dim, n);
  Eigen::MatrixXd c(spec.cond_dim, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    x.col(i) = offset_vector(data[i].offset);
    c.col(i) = sampler.condition(data[i].task);
  }
  const LossWeightsSampler w = config.weights;
  // lambda_t |t_hat - t|_2 + lambda_r |r_hat - r|_2 per example.
  auto recon = [w](const Eigen::MatrixXd& pred, const Eigen::MatrixXd& target, Eigen::MatrixXd& grad) {
    double loss = 0.0;
    for (Eigen::Index k = 0; k < pred.cols(); ++k) {
      const Vec3 dt = pred.col(k).head<3>() - target.col(k).head<3>();
      const Vec6 dr = pred.col(k).segment<6>(3) - target.col(k).segment<6>(3);
      const double nt = dt.norm();
      const double nr = dr.norm();
      loss += w.t * nt + w.r * nr;
      grad.col(k).head<3>() = w.t * dt / std::max(nt, 1e-12);
      grad.col(k).segment<6>(3) = w.r * dr / std::max(nr, 1e-12);
    }
    return loss;
  };
  CvaeTrainConfig train = config.train;
  train.kl_weight = w.kl;
  CvaeTrainCurve c_out = train_cvae(sampler.net(), x, c, x, recon, train);
  if (curve != nullptr) {
    *curve = std::move(c_out);
  }
  return sampler;
}

ObjectOffset sampler_sample(const ObjectSampler& sampler, const TaskSpec& task, Rng& rng) {
  return offset_from(sampler.net().sample(sampler.condition(task), rng));
}

// ---------------------------------------------------------------------------
// Goal net

void GoalNetInput::validate(int joints) const {
  HOMI_CHECK(theta.size() == 6 * joints, ErrorCode::kShapeMismatch, "goal input pose has the wrong size");
  HOMI_CHECK(beta.size() == kBetaSize, ErrorCode::kShapeMismatch, "beta must have 10 entries");
  HOMI_CHECK(
      v.cols() == kBodySampleCount && d_b_to_o.cols() == kBodySampleCount,
      ErrorCode::kShapeMismatch,
      "goal input needs 400 body samples and offsets");
  HOMI_CHECK(b_o.size() == kBasisSize, ErrorCode::kShapeMismatch, "BPS code has the wrong size");
  HOMI_CHECK((b_o.array() >= 0.0).all(), ErrorCode::kInvalidArgument, "BPS code must be nonnegative");
  HOMI_CHECK(a >= 0 && a < task_count, ErrorCode::kInvalidArgument, "task id out of range");
}

Eigen::VectorXd GoalNetOutput::frame() const {
  Eigen::VectorXd f(theta_hat.size() + 3);
  f << theta_hat, t_hat;
  return f;
}

Vec3 gaze_direction(const Skeleton& skel, const Eigen::Ref<const Eigen::VectorXd>& frame) {
  const int joints = skel.joint_count();
  const PoseState st = forward_kinematics(skel, frame.head(6 * joints), frame.segment<3>(6 * joints));
  auto head = skel.find_joint("head");
  const int j = head ? *head : skel.joint_index("spine3");
  return st.global_rot[j].col(0);
}

Eigen::VectorXd oriented_bps(const ObjectCloud& cloud, const Mat3& r_o, const BasisPointSet& basis) {
  ObjectCloud oriented = cloud;
  for (auto& p : oriented.points) {
    p = r_o * p;
  }
  return bps_encode(center_cloud(oriented), basis);
}

GoalNetInput make_goal_input(
    const Skeleton& skel,
    const Eigen::Ref<const Eigen::VectorXd>& frame,
    const Eigen::VectorXd& beta,
    const Vec3& t_o,
    const Mat3& r_o,
    const ObjectCloud& cloud,
    const BasisPointSet& basis,
    int task,
    int task_count) {
  const int joints = skel.joint_count();
  HOMI_CHECK(frame.size() == 6 * joints + 3, ErrorCode::kShapeMismatch, "frame does not match the skeleton");
  GoalNetInput in;
  in.theta = frame.head(6 * joints);
  in.t = frame.segment<3>(6 * joints);
  in.beta = beta;
  const PoseState st = forward_kinematics(skel, in.theta, in.t);
  in.v.resize(3, kBodySampleCount);
  in.d_b_to_o.resize(3, kBodySampleCount);
  for (int s = 0; s < kBodySampleCount; ++s) {
    in.v.col(s) = sample_position(skel, st, s);
    in.d_b_to_o.col(s) = t_o - in.v.col(s);
  }
  auto head = skel.find_joint("head");
  in.h = st.global_rot[head ? *head : skel.joint_index("spine3")].col(0);
  in.t_o = t_o;
  in.b_o = oriented_bps(cloud, r_o, basis);
  in.a = task;
  in.task_count = task_count;
  in.validate(joints);
  return in;
}

GoalNet::GoalNet(const CvaeSpec& spec, int joints, int task_count)
    : net_(spec), joints_(joints), task_count_(task_count) {}

Eigen::VectorXd GoalNet::encoder_input(const GoalNetInput& in) const {
  in.validate(joints_);
  Eigen::VectorXd x(input_dim(joints_));
  const Eigen::Index vs = 3 * kBodySampleCount;
  x << in.theta, in.t, Eigen::Map<const Eigen::VectorXd>(in.v.data(), vs),
      Eigen::Map<const Eigen::VectorXd>(in.d_b_to_o.data(), vs), in.h;
  return x;
}

Eigen::VectorXd GoalNet::condition(const Eigen::VectorXd& beta, const Eigen::VectorXd& b_o, const Vec3& t_o, int a)
    const {
  HOMI_CHECK(beta.size() == kBetaSize && b_o.size() == kBasisSize, ErrorCode::kShapeMismatch, "bad goal condition");
  HOMI_CHECK(a >= 0 && a < task_count_, ErrorCode::kInvalidArgument, "task id out of range");
  Eigen::VectorXd c = Eigen::VectorXd::Zero(condition_dim(task_count_));
  c.head(kBetaSize) = beta;
  c.segment(kBetaSize, kBasisSize) = b_o;
  c.segment<3>(kBetaSize + kBasisSize) = t_o;
  c[kBetaSize + kBasisSize + 3 + a] = 1.0;
  return c;
}

Eigen::VectorXd GoalNet::target(const GoalNetInput& in) const {
  Eigen::VectorXd y(output_dim(joints_));
  y.head(6 * joints_) = in.theta;
  y.segment<3>(6 * joints_) = in.t;
  y.segment<3>(6 * joints_ + 3) = in.h;
  // Right-hand samples come first in the body-sample table.
  y.tail(3 * kRightHandSampleCount) =
      Eigen::Map<const Eigen::VectorXd>(in.d_b_to_o.data(), 3 * kRightHandSampleCount);
  return y;
}

GoalNetOutput GoalNet::unpack(const Eigen::VectorXd& out) const {
  HOMI_CHECK(out.size() == output_dim(joints_), ErrorCode::kShapeMismatch, "goal output has the wrong size");
  GoalNetOutput o;
  o.theta_hat.resize(6 * joints_);
  for (int j = 0; j < joints_; ++j) {
    o.theta_hat.segment<6>(6 * j) = matrix_to_rot6d(rot6d_to_matrix(Vec6(out.segment<6>(6 * j))));
  }
  o.t_hat = out.segment<3>(6 * joints_);
  const Vec3 h = out.segment<3>(6 * joints_ + 3);
  o.h_hat = h.norm() > 1e-12 ? Vec3(h.normalized()) : Vec3::UnitX();
  o.d_r_to_o_hat = Eigen::Map<const Eigen::Matrix3Xd>(out.tail(3 * kRightHandSampleCount).data(), 3,
                                                       kRightHandSampleCount);
  return o;
}

GoalNetOutput GoalNet::decode(const Eigen::VectorXd& z, const Eigen::VectorXd& cond) const {
  return unpack(net_.decode(z, cond));
}

GoalNetOutput GoalNet::reconstruct(const GoalNetInput& in) const {
  const Eigen::VectorXd cond = condition(in.beta, in.b_o, in.t_o, in.a);
  const LatentSample s = net_.encode(encoder_input(in), cond, nullptr);
  return decode(s.mu, cond);
}

GoalNet goal_train(std::span<const GoalNetInput> data, const GoalConfig& config, CvaeTrainCurve* curve) {
  HOMI_CHECK(!data.empty(), ErrorCode::kInvalidArgument, "empty goal dataset");
  const auto joints = static_cast<int>(data.front().theta.size() / 6);
  const int task_count = data.front().task_count;
  for (const auto& in : data) {
    HOMI_CHECK(
        in.theta.size() == 6 * joints && in.task_count == task_count,
        ErrorCode::kSkeletonMismatch,
        "goal dataset mixes skeletons or task vocabularies");
    in.validate(joints);
  }
  CvaeSpec spec;
  spec.x_dim = GoalNet::input_dim(joints);
  spec.cond_dim = GoalNet::condition_dim(task_count);
  spec.out_dim = GoalNet::output_dim(joints);
  spec.latent = config.latent;
  spec.hidden = config.hidden;
  spec.seed = config.train.seed;
  GoalNet net(spec, joints, task_count);

  const auto n = static_cast<Eigen::Index>(data.size());
  Eigen::MatrixXd x(spec.x_dim, n);
  Eigen::MatrixXd c(spec.cond_dim, n);
  Eigen::MatrixXd y(spec.out_dim, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    x.col(i) = net.encoder_input(data[i]);
    c.col(i) = net.condition(data[i].beta, data[i].b_o, data[i].t_o, data[i].a);
    y.col(i) = net.target(data[i]);
  }
  // Per-block squared L2 with block weights.
  Eigen::VectorXd row_w(spec.out_dim);
  const GoalLossWeights w = config.weights;
  row_w.head(6 * joints).setConstant(w.theta);
  row_w.segment<3>(6 * joints).setConstant(w.t);
  row_w.segment<3>(6 * joints + 3).setConstant(w.h);
  row_w.tail(3 * kRightHandSampleCount).setConstant(w.d);
  auto recon = [row_w](const Eigen::MatrixXd& pred, const Eigen::MatrixXd& target, Eigen::MatrixXd& grad) {
    const Eigen::MatrixXd diff = pred - target;
    grad = 2.0 * (diff.array().colwise() * row_w.array()).matrix();
    return (diff.array().square().colwise() * row_w.array()).sum();
  };
  CvaeTrainConfig train = config.train;
  train.kl_weight = w.kl;
  CvaeTrainCurve c_out = train_cvae(net.net(), x, c, y, recon, train);
  if (curve != nullptr) {
    *curve = std::move(c_out);
  }
  return net;
}

GoalNetOutput goal_sample(
    const GoalNet& net,
    const Eigen::VectorXd& beta,
    const Eigen::VectorXd& b_o,
    const Vec3& t_o,
    int a,
    Rng& rng) {
  const Eigen::VectorXd cond = net.condition(beta, b_o, t_o, a);
  return net.unpack(net.net().sample(cond, rng));
}

} // namespace homi
