#include "homi/metrics.h"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include "homi/error.h"

namespace homi {

double MetricReport::value(const std::string& key) const {
  for (const auto& [k, v] : values) {
    if (k == key) {
      return v;
    }
  }
  fail(ErrorCode::kInvalidArgument, "metric '" + name + "' has no value '" + key + "'");
}

double ade(const PointSequence& pred, const PointSequence& gt) {
  HOMI_CHECK(
      pred.data.rows() == gt.data.rows() && pred.data.cols() == gt.data.cols(),
      ErrorCode::kShapeMismatch,
      "ADE inputs differ in shape");
  HOMI_CHECK(pred.points() > 0 && pred.frames() > 0, ErrorCode::kShapeMismatch, "ADE inputs are empty");
  double sum = 0.0;
  for (int n = 0; n < pred.frames(); ++n) {
    for (int m = 0; m < pred.points(); ++m) {
      sum += (pred.at(m, n) - gt.at(m, n)).norm();
    }
  }
  return sum / (static_cast<double>(pred.points()) * pred.frames());
}

double skating_ratio(const PointSequence& foot, double fps, double height_eps, double disp_eps) {
  HOMI_CHECK(foot.frames() >= 2, ErrorCode::kTooShort, "skating ratio needs at least two frames");
  HOMI_CHECK(fps > 0.0, ErrorCode::kInvalidArgument, "fps must be positive");
  const double limit = disp_eps * 30.0 / fps;
  int skating = 0;
  for (int n = 1; n < foot.frames(); ++n) {
    for (int k = 0; k < foot.points(); ++k) {
      const Vec3 p = foot.at(k, n);
      const Vec3 d = p - foot.at(k, n - 1);
      if (p.z() < height_eps && d.head<2>().norm() > limit) {
        ++skating;
        break;
      }
    }
  }
  return static_cast<double>(skating) / (foot.frames() - 1);
}

Eigen::VectorXd power_distribution(const Eigen::VectorXd& x) {
  const Eigen::Index n = x.size();
  const Eigen::Index bins = n / 2 + 1;
  Eigen::VectorXd p(bins);
  for (Eigen::Index k = 0; k < bins; ++k) {
    std::complex<double> acc(0.0, 0.0);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double angle = -2.0 * std::numbers::pi * static_cast<double>(k * i % n) / static_cast<double>(n);
      acc += x[i] * std::complex<double>(std::cos(angle), std::sin(angle));
    }
    p[k] = std::norm(acc) + 1e-8;
  }
  return p / p.sum();
}

namespace {

double kl(const Eigen::VectorXd& p, const Eigen::VectorXd& q) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    s += p[i] * std::log(p[i] / q[i]);
  }
  return std::max(s, 0.0);
}

Eigen::VectorXd channel(const PointSequence& seq, int row, double fps, SpectrumSignal signal) {
  const int frames = seq.frames();
  if (signal == SpectrumSignal::kPosition) {
    return seq.data.row(row).transpose();
  }
  Eigen::VectorXd acc(frames - 2);
  for (int n = 1; n + 1 < frames; ++n) {
    acc[n - 1] = (seq.data(row, n + 1) - 2.0 * seq.data(row, n) + seq.data(row, n - 1)) * fps * fps;
  }
  return acc;
}

} // namespace

PsklResult psklj(const PointSequence& a, const PointSequence& b, double fps, SpectrumSignal signal) {
  HOMI_CHECK(a.points() == b.points(), ErrorCode::kShapeMismatch, "PSKL-J inputs differ in joint count");
  HOMI_CHECK(a.frames() >= 8 && b.frames() >= 8, ErrorCode::kTooShort, "PSKL-J needs at least 8 frames");
  HOMI_CHECK(a.frames() == b.frames(), ErrorCode::kShapeMismatch, "PSKL-J inputs differ in length");
  PsklResult out;
  const auto rows = static_cast<int>(a.data.rows());
  for (int r = 0; r < rows; ++r) {
    const Eigen::VectorXd pa = power_distribution(channel(a, r, fps, signal));
    const Eigen::VectorXd pb = power_distribution(channel(b, r, fps, signal));
    out.ab += kl(pa, pb);
    out.ba += kl(pb, pa);
  }
  out.ab /= rows;
  out.ba /= rows;
  return out;
}

double apd(std::span<const Eigen::VectorXd> items) {
  HOMI_CHECK(items.size() >= 2, ErrorCode::kInvalidArgument, "APD needs at least two items");
  double sum = 0.0;
  for (size_t i = 0; i < items.size(); ++i) {
    HOMI_CHECK(
        items[i].size() == items[0].size(), ErrorCode::kShapeMismatch, "APD items differ in dimension");
    for (size_t j = i + 1; j < items.size(); ++j) {
      sum += (items[i] - items[j]).norm();
    }
  }
  const double k = static_cast<double>(items.size());
  return 2.0 * sum / (k * (k - 1.0));
}

std::vector<SdfObject> sdf_sequence(const Primitive& primitive, const ObjectMotion& motion) {
  std::vector<SdfObject> out;
  out.reserve(motion.poses.size());
  for (const ObjectPose& pose : motion.poses) {
    out.push_back({primitive, pose});
  }
  return out;
}

namespace {

template <typename F>
FrameSummary summarize(const PointSequence& hand, std::span<const SdfObject> objects, F per_frame) {
  HOMI_CHECK(
      static_cast<int>(objects.size()) == hand.frames(),
      ErrorCode::kShapeMismatch,
      "object sequence length does not match the hand sequence");
  HOMI_CHECK(hand.frames() >= 1, ErrorCode::kTooShort, "empty hand sequence");
  FrameSummary s;
  s.per_frame.resize(hand.frames());
  for (int n = 0; n < hand.frames(); ++n) {
    s.per_frame[n] = per_frame(n);
  }
  s.max = *std::max_element(s.per_frame.begin(), s.per_frame.end());
  s.min = *std::min_element(s.per_frame.begin(), s.per_frame.end());
  double sum = 0.0;
  for (double v : s.per_frame) {
    sum += v;
  }
  s.avg = sum / hand.frames();
  return s;
}

} // namespace

MotionImage interpolation_baseline(const MotionImage& gt) {
  HOMI_CHECK(gt.frames() >= 2, ErrorCode::kTooShort, "baseline needs at least two frames");
  const int T = gt.frames();
  MotionImage out = gt;
  for (int j = 0; j < gt.joints; ++j) {
    const Quat a(rot6d_to_matrix(gt.rot6(j, 0)));
    const Quat b(rot6d_to_matrix(gt.rot6(j, T - 1)));
    for (int n = 1; n < T - 1; ++n) {
      const double u = static_cast<double>(n) / (T - 1);
      out.set_rot6(j, n, matrix_to_rot6d(slerp(a, b, u).toRotationMatrix()));
    }
  }
  for (int n = 1; n < T - 1; ++n) {
    const double u = static_cast<double>(n) / (T - 1);
    out.set_root(n, (1.0 - u) * gt.root(0) + u * gt.root(T - 1));
  }
  return out;
}

FrameSummary contact_ratio(const PointSequence& hand, std::span<const SdfObject> objects, double eps) {
  return summarize(hand, objects, [&](int n) {
    int touching = 0;
    for (int m = 0; m < hand.points(); ++m) {
      if (std::abs(objects[n].signed_distance(hand.at(m, n))) <= eps) {
        ++touching;
      }
    }
    return static_cast<double>(touching) / hand.points();
  });
}

FrameSummary interpenetration_depth(const PointSequence& hand, std::span<const SdfObject> objects) {
  return summarize(hand, objects, [&](int n) {
    double depth = 0.0;
    for (int m = 0; m < hand.points(); ++m) {
      depth = std::max(depth, -objects[n].signed_distance(hand.at(m, n)));
    }
    return depth;
  });
}

} // namespace homi
