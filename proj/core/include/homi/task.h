#pragma once

#include <Eigen/Core>

#include "homi/geom.h"

namespace homi {

inline constexpr int kBetaSize = 10;

/// Conditioning tuple shared by the object sampler and the goal net.
struct TaskSpec {
  int task = 0;
  int task_count = 3;
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(kBetaSize);
  Vec3 t_init = Vec3::Zero();
  Rotation6D r_init;

  /// task_count entries with a single 1 at `task`.
  Eigen::VectorXd one_hot() const;
  /// Throws kInvalidArgument on an out-of-range task or wrong beta size.
  void validate() const;
};

/// Object end pose relative to its initial pose:
/// t_end = t_init + t_off, R_end = R_off * R_init.
struct ObjectOffset {
  Vec3 t_off = Vec3::Zero();
  Rotation6D r_off;
};

} // namespace homi
