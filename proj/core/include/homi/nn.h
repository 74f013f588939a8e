#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "homi/rng.h"

namespace homi::nn {

enum class Activation { kIdentity, kSilu, kSine, kTanh };

std::string_view to_string(Activation act);
Activation activation_from_string(std::string_view text);

/// Applies the activation elementwise in place.
void activate(Activation act, Eigen::MatrixXd& x);
/// d act / d pre, evaluated at the pre-activation values.
Eigen::MatrixXd activation_derivative(Activation act, const Eigen::MatrixXd& pre);

/// Location of one matrix inside a flat parameter vector (column-major).
struct Block {
  Eigen::Index offset = 0;
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;

  Eigen::Index size() const {
    return rows * cols;
  }
};

/// Allocates blocks in a single flat parameter vector so optimisers,
/// checkpoints and gradient checks see one contiguous buffer.
class ParameterLayout {
 public:
  Block add(Eigen::Index rows, Eigen::Index cols);
  Eigen::Index size() const {
    return size_;
  }

 private:
  Eigen::Index size_ = 0;
};

using ConstMatMap = Eigen::Map<const Eigen::MatrixXd>;
using MatMap = Eigen::Map<Eigen::MatrixXd>;

inline ConstMatMap view(const Eigen::VectorXd& params, const Block& b) {
  return ConstMatMap(params.data() + b.offset, b.rows, b.cols);
}
inline MatMap view(Eigen::VectorXd& params, const Block& b) {
  return MatMap(params.data() + b.offset, b.rows, b.cols);
}

struct Dense {
  Block weight; // out x in
  Block bias;   // out x 1
};

/// Multi-layer perceptron over column batches; hidden layers use
/// `hidden_act`, the last layer is linear.
class Mlp {
 public:
  Mlp() = default;
  Mlp(const std::vector<int>& dims, Activation hidden_act, ParameterLayout& layout);

  struct Cache {
    std::vector<Eigen::MatrixXd> inputs; // input of each layer
    std::vector<Eigen::MatrixXd> pre;    // pre-activation of each layer
  };

  Eigen::MatrixXd forward(const Eigen::VectorXd& params, const Eigen::MatrixXd& x, Cache* cache = nullptr) const;

  /// Accumulates parameter gradients into `grad` and returns dL/dx.
  Eigen::MatrixXd backward(
      const Eigen::VectorXd& params,
      const Cache& cache,
      const Eigen::MatrixXd& grad_out,
      Eigen::VectorXd& grad) const;

  /// Uniform fan-in initialisation; biases zero.
  void init(Eigen::VectorXd& params, Rng& rng, double last_scale = 1.0) const;

  int input_dim() const {
    return dims_.front();
  }
  int output_dim() const {
    return dims_.back();
  }
  const std::vector<Dense>& layers() const {
    return layers_;
  }

 private:
  std::vector<int> dims_;
  std::vector<Dense> layers_;
  Activation act_ = Activation::kSilu;
};

/// Uniform(-bound, bound) fill of a block, bound = scale / sqrt(fan_in).
void init_uniform(Eigen::VectorXd& params, const Block& block, int fan_in, double scale, Rng& rng);

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

class Adam {
 public:
  Adam(Eigen::Index size, AdamConfig config);
  void step(Eigen::VectorXd& params, const Eigen::VectorXd& grad);
  void set_learning_rate(double lr) {
    config_.learning_rate = lr;
  }

 private:
  AdamConfig config_;
  Eigen::VectorXd m_;
  Eigen::VectorXd v_;
  long step_ = 0;
};

/// Rescales `grad` so its norm is at most `max_norm`; returns the norm
/// before clipping.
double clip_grad_norm(Eigen::VectorXd& grad, double max_norm);

} // namespace homi::nn
