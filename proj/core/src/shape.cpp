#include "homi/shape.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "homi/error.h"

namespace homi {

BasisPointSet sample_basis(std::uint64_t seed, int size) {
  HOMI_CHECK(size >= 1, ErrorCode::kInvalidArgument, "basis size must be positive");
  BasisPointSet out;
  out.seed = seed;
  out.points.reserve(size);
  Rng rng = make_rng(seed);
  for (int i = 0; i < size; ++i) {
    const double x = uniform(rng, -kBasisHalfExtent, kBasisHalfExtent);
    const double y = uniform(rng, -kBasisHalfExtent, kBasisHalfExtent);
    const double z = uniform(rng, -kBasisHalfExtent, kBasisHalfExtent);
    out.points.emplace_back(x, y, z);
  }
  return out;
}

void ObjectCloud::validate() const {
  HOMI_CHECK(!points.empty(), ErrorCode::kEmptyCloud, "object cloud '" + name + "' is empty");
  for (const Vec3& p : points) {
    HOMI_CHECK(p.allFinite(), ErrorCode::kInvalidArgument, "object cloud has non-finite coordinates");
  }
}

ObjectCloud center_cloud(const ObjectCloud& cloud) {
  cloud.validate();
  Vec3 c = Vec3::Zero();
  for (const Vec3& p : cloud.points) {
    c += p;
  }
  c /= static_cast<double>(cloud.points.size());
  ObjectCloud out = cloud;
  for (Vec3& p : out.points) {
    p -= c;
  }
  return out;
}

namespace {

// Static kd-tree over a point array: nodes are index ranges split at the
// median of the widest axis.
class KdTree {
 public:
  explicit KdTree(const std::vector<Vec3>& points) : points_(points), order_(points.size()) {
    std::iota(order_.begin(), order_.end(), 0);
    nodes_.reserve(2 * points.size() / kLeaf + 2);
    build(0, static_cast<int>(order_.size()));
  }

  double nearest(const Vec3& q) const {
    double best = std::numeric_limits<double>::infinity();
    search(0, q, best);
    return std::sqrt(best);
  }

 private:
  static constexpr int kLeaf = 8;

  struct Node {
    int begin, end;
    int axis = -1;
    double split = 0.0;
    int left = -1, right = -1;
    Vec3 lo = Vec3::Zero();
    Vec3 hi = Vec3::Zero();
  };

  int build(int begin, int end) {
    const int id = static_cast<int>(nodes_.size());
    Node node;
    node.begin = begin;
    node.end = end;
    nodes_.push_back(node);
    Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
    Vec3 hi = -lo;
    for (int i = begin; i < end; ++i) {
      lo = lo.cwiseMin(points_[order_[i]]);
      hi = hi.cwiseMax(points_[order_[i]]);
    }
    nodes_[id].lo = lo;
    nodes_[id].hi = hi;
    if (end - begin <= kLeaf) {
      return id;
    }
    int axis = 0;
    (hi - lo).maxCoeff(&axis);
    const int mid = (begin + end) / 2;
    std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end, [&](int a, int b) {
      return points_[a][axis] < points_[b][axis];
    });
    nodes_[id].axis = axis;
    nodes_[id].split = points_[order_[mid]][axis];
    const int left = build(begin, mid);
    const int right = build(mid, end);
    nodes_[id].left = left;
    nodes_[id].right = right;
    return id;
  }

  static double box_distance2(const Node& n, const Vec3& q) {
    const Vec3 d = (n.lo - q).cwiseMax(Vec3::Zero()).cwiseMax(q - n.hi);
    return d.squaredNorm();
  }

  void search(int id, const Vec3& q, double& best) const {
    const Node& n = nodes_[id];
    if (box_distance2(n, q) >= best) {
      return;
    }
    if (n.axis < 0) {
      for (int i = n.begin; i < n.end; ++i) {
        best = std::min(best, (points_[order_[i]] - q).squaredNorm());
      }
      return;
    }
    const bool go_left = q[n.axis] < n.split;
    search(go_left ? n.left : n.right, q, best);
    search(go_left ? n.right : n.left, q, best);
  }

  const std::vector<Vec3>& points_;
  std::vector<int> order_;
  std::vector<Node> nodes_;
};

} // namespace

Eigen::VectorXd bps_encode(const ObjectCloud& cloud, const BasisPointSet& basis) {
  cloud.validate();
  const KdTree tree(cloud.points);
  Eigen::VectorXd out(static_cast<Eigen::Index>(basis.points.size()));
  for (size_t k = 0; k < basis.points.size(); ++k) {
    out[static_cast<Eigen::Index>(k)] = tree.nearest(basis.points[k]);
  }
  return out;
}

Eigen::VectorXd bps_encode_brute(const ObjectCloud& cloud, const BasisPointSet& basis) {
  cloud.validate();
  Eigen::VectorXd out(static_cast<Eigen::Index>(basis.points.size()));
  for (size_t k = 0; k < basis.points.size(); ++k) {
    double best = std::numeric_limits<double>::infinity();
    for (const Vec3& p : cloud.points) {
      best = std::min(best, (basis.points[k] - p).squaredNorm());
    }
    out[static_cast<Eigen::Index>(k)] = std::sqrt(best);
  }
  return out;
}

Primitive Primitive::sphere(double r) {
  Primitive p;
  p.kind = Kind::kSphere;
  p.radius = r;
  p.validate();
  return p;
}

Primitive Primitive::box(const Vec3& half) {
  Primitive p;
  p.kind = Kind::kBox;
  p.radius = 0.0;
  p.half_extents = half;
  p.validate();
  return p;
}

Primitive Primitive::capsule(double r, double half_len) {
  Primitive p;
  p.kind = Kind::kCapsule;
  p.radius = r;
  p.half_length = half_len;
  p.validate();
  return p;
}

void Primitive::validate() const {
  switch (kind) {
    case Kind::kSphere:
      HOMI_CHECK(radius > 0.0, ErrorCode::kInvalidArgument, "sphere radius must be positive");
      return;
    case Kind::kBox:
      HOMI_CHECK(half_extents.minCoeff() > 0.0, ErrorCode::kInvalidArgument, "box extents must be positive");
      return;
    case Kind::kCapsule:
      HOMI_CHECK(
          radius > 0.0 && half_length > 0.0, ErrorCode::kInvalidArgument, "capsule dimensions must be positive");
      return;
  }
}

double Primitive::signed_distance(const Vec3& p) const {
  switch (kind) {
    case Kind::kSphere:
      return p.norm() - radius;
    case Kind::kBox: {
      const Vec3 q = p.cwiseAbs() - half_extents;
      return q.cwiseMax(Vec3::Zero()).norm() + std::min(q.maxCoeff(), 0.0);
    }
    case Kind::kCapsule: {
      const double z = std::clamp(p.z(), -half_length, half_length);
      return (p - Vec3(0.0, 0.0, z)).norm() - radius;
    }
  }
  return 0.0;
}

double Primitive::bounding_radius() const {
  switch (kind) {
    case Kind::kSphere:
      return radius;
    case Kind::kBox:
      return half_extents.norm();
    case Kind::kCapsule:
      return half_length + radius;
  }
  return 0.0;
}

std::string to_string(Primitive::Kind kind) {
  switch (kind) {
    case Primitive::Kind::kSphere:
      return "sphere";
    case Primitive::Kind::kBox:
      return "box";
    case Primitive::Kind::kCapsule:
      return "capsule";
  }
  return "sphere";
}

Primitive::Kind primitive_kind_from_string(const std::string& text) {
  for (auto k : {Primitive::Kind::kSphere, Primitive::Kind::kBox, Primitive::Kind::kCapsule}) {
    if (to_string(k) == text) {
      return k;
    }
  }
  fail(ErrorCode::kParse, "unknown primitive '" + text + "'");
}

namespace {

Vec3 unit_vector(Rng& rng) {
  Vec3 v;
  do {
    v = Vec3(normal(rng), normal(rng), normal(rng));
  } while (v.norm() < 1e-12);
  return v.normalized();
}

} // namespace

ObjectCloud sample_surface(const Primitive& prim, const std::string& name, int count, Rng& rng) {
  prim.validate();
  HOMI_CHECK(count >= 1, ErrorCode::kInvalidArgument, "surface sample count must be positive");
  ObjectCloud out;
  out.name = name;
  out.points.reserve(count);
  for (int i = 0; i < count; ++i) {
    switch (prim.kind) {
      case Primitive::Kind::kSphere:
        out.points.push_back(prim.radius * unit_vector(rng));
        break;
      case Primitive::Kind::kBox: {
        const Vec3& h = prim.half_extents;
        const std::array<double, 3> area = {h.y() * h.z(), h.x() * h.z(), h.x() * h.y()};
        const double pick = uniform(rng, 0.0, area[0] + area[1] + area[2]);
        const int axis = pick < area[0] ? 0 : (pick < area[0] + area[1] ? 1 : 2);
        Vec3 p(uniform(rng, -h.x(), h.x()), uniform(rng, -h.y(), h.y()), uniform(rng, -h.z(), h.z()));
        p[axis] = uniform(rng, 0.0, 1.0) < 0.5 ? -h[axis] : h[axis];
        out.points.push_back(p);
        break;
      }
      case Primitive::Kind::kCapsule: {
        const double side = 4.0 * std::numbers::pi * prim.radius * prim.half_length;
        const double caps = 4.0 * std::numbers::pi * prim.radius * prim.radius;
        if (uniform(rng, 0.0, side + caps) < side) {
          const double a = uniform(rng, 0.0, 2.0 * std::numbers::pi);
          out.points.emplace_back(
              prim.radius * std::cos(a), prim.radius * std::sin(a), uniform(rng, -prim.half_length, prim.half_length));
        } else {
          Vec3 u = unit_vector(rng);
          const double shift = u.z() >= 0.0 ? prim.half_length : -prim.half_length;
          out.points.push_back(prim.radius * u + Vec3(0.0, 0.0, shift));
        }
        break;
      }
    }
  }
  return out;
}

} // namespace homi
