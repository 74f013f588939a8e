#include "homi/nn.h"

#include <cmath>

#include "homi/error.h"

namespace homi::nn {

std::string_view to_string(Activation act) {
  switch (act) {
    case Activation::kIdentity:
      return "identity";
    case Activation::kSilu:
      return "silu";
    case Activation::kSine:
      return "sine";
    case Activation::kTanh:
      return "tanh";
  }
  return "identity";
}

Activation activation_from_string(std::string_view text) {
  for (Activation a : {Activation::kIdentity, Activation::kSilu, Activation::kSine, Activation::kTanh}) {
    if (to_string(a) == text) {
      return a;
    }
  }
  fail(ErrorCode::kConfig, "unknown activation '" + std::string(text) + "'");
}

namespace {

inline double sigmoid(double x) {
  return 1.0 / (1.0 + std::exp(-x));
}

} // namespace

void activate(Activation act, Eigen::MatrixXd& x) {
  switch (act) {
    case Activation::kIdentity:
      return;
    case Activation::kSilu:
      x = x.unaryExpr([](double v) { return v * sigmoid(v); });
      return;
    case Activation::kSine:
      x = x.array().sin().matrix();
      return;
    case Activation::kTanh:
      x = x.array().tanh().matrix();
      return;
  }
}

Eigen::MatrixXd activation_derivative(Activation act, const Eigen::MatrixXd& pre) {
  switch (act) {
    case Activation::kIdentity:
      return Eigen::MatrixXd::Ones(pre.rows(), pre.cols());
    case Activation::kSilu:
      return pre.unaryExpr([](double v) {
        const double s = sigmoid(v);
        return s * (1.0 + v * (1.0 - s));
      });
    case Activation::kSine:
      return pre.array().cos().matrix();
    case Activation::kTanh:
      return (1.0 - pre.array().tanh().square()).matrix();
  }
  return Eigen::MatrixXd::Ones(pre.rows(), pre.cols());
}

Block ParameterLayout::add(Eigen::Index rows, Eigen::Index cols) {
  Block b{size_, rows, cols};
  size_ += rows * cols;
  return b;
}

Mlp::Mlp(const std::vector<int>& dims, Activation hidden_act, ParameterLayout& layout)
    : dims_(dims), act_(hidden_act) {
  HOMI_CHECK(dims.size() >= 2, ErrorCode::kInvalidArgument, "MLP needs at least input and output sizes");
  for (size_t l = 0; l + 1 < dims.size(); ++l) {
    Dense d;
    d.weight = layout.add(dims[l + 1], dims[l]);
    d.bias = layout.add(dims[l + 1], 1);
    layers_.push_back(d);
  }
}

Eigen::MatrixXd Mlp::forward(const Eigen::VectorXd& params, const Eigen::MatrixXd& x, Cache* cache) const {
  if (cache != nullptr) {
    cache->inputs.resize(layers_.size());
    cache->pre.resize(layers_.size());
  }
  Eigen::MatrixXd h = x;
  for (size_t l = 0; l < layers_.size(); ++l) {
    const auto w = view(params, layers_[l].weight);
    const auto b = view(params, layers_[l].bias);
    Eigen::MatrixXd z = w * h;
    z.colwise() += b.col(0);
    const bool last = l + 1 == layers_.size();
    if (cache != nullptr) {
      cache->inputs[l] = std::move(h);
      if (!last) {
        cache->pre[l] = z;
      }
    }
    if (!last) {
      activate(act_, z);
    }
    h = std::move(z);
  }
  return h;
}

Eigen::MatrixXd Mlp::backward(
    const Eigen::VectorXd& params,
    const Cache& cache,
    const Eigen::MatrixXd& grad_out,
    Eigen::VectorXd& grad) const {
  Eigen::MatrixXd g = grad_out;
  for (size_t l = layers_.size(); l-- > 0;) {
    const bool last = l + 1 == layers_.size();
    if (!last) {
      g = g.cwiseProduct(activation_derivative(act_, cache.pre[l]));
    }
    const auto w = view(params, layers_[l].weight);
    view(grad, layers_[l].weight).noalias() += g * cache.inputs[l].transpose();
    view(grad, layers_[l].bias).col(0) += g.rowwise().sum();
    g = w.transpose() * g;
  }
  return g;
}

void init_uniform(Eigen::VectorXd& params, const Block& block, int fan_in, double scale, Rng& rng) {
  const double bound = scale / std::sqrt(static_cast<double>(std::max(fan_in, 1)));
  auto m = view(params, block);
  // Column-major fill order keeps initialisation reproducible.
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      m(r, c) = uniform(rng, -bound, bound);
    }
  }
}

void Mlp::init(Eigen::VectorXd& params, Rng& rng, double last_scale) const {
  for (size_t l = 0; l < layers_.size(); ++l) {
    const bool last = l + 1 == layers_.size();
    // sqrt(6) ~ He-uniform gain for ReLU-like units.
    const double scale = last ? last_scale : std::sqrt(6.0);
    init_uniform(params, layers_[l].weight, dims_[l], scale, rng);
    view(params, layers_[l].bias).setZero();
  }
}

Adam::Adam(Eigen::Index size, AdamConfig config)
    : config_(config), m_(Eigen::VectorXd::Zero(size)), v_(Eigen::VectorXd::Zero(size)) {}

void Adam::step(Eigen::VectorXd& params, const Eigen::VectorXd& grad) {
  ++step_;
  m_ = config_.beta1 * m_ + (1.0 - config_.beta1) * grad;
  v_ = config_.beta2 * v_ + (1.0 - config_.beta2) * grad.cwiseProduct(grad);
  const double c1 = 1.0 - std::pow(config_.beta1, static_cast<double>(step_));
  const double c2 = 1.0 - std::pow(config_.beta2, static_cast<double>(step_));
  const double lr = config_.learning_rate * std::sqrt(c2) / c1;
  params.array() -= lr * m_.array() / (v_.array().sqrt() + config_.epsilon);
}

double clip_grad_norm(Eigen::VectorXd& grad, double max_norm) {
  const double norm = grad.norm();
  if (max_norm > 0.0 && norm > max_norm) {
    grad *= max_norm / norm;
  }
  return norm;
}

} // namespace homi::nn
