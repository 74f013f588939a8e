#include "homi/synth.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>

#include "homi/error.h"

namespace homi {

std::string to_string(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::kReachLift:
      return "reach_lift";
    case ScenarioKind::kReachPass:
      return "reach_pass";
    case ScenarioKind::kReachPlace:
      return "reach_place";
    case ScenarioKind::kWalkCycle:
      return "walk_cycle";
  }
  return "reach_lift";
}

ScenarioKind scenario_kind_from_string(const std::string& text) {
  for (auto k : {ScenarioKind::kReachLift, ScenarioKind::kReachPass, ScenarioKind::kReachPlace, ScenarioKind::kWalkCycle}) {
    if (to_string(k) == text) {
      return k;
    }
  }
  fail(ErrorCode::kParse, "unknown scenario kind '" + text + "'");
}

int task_of(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::kReachLift:
      return 0;
    case ScenarioKind::kReachPass:
      return 1;
    case ScenarioKind::kReachPlace:
      return 2;
    case ScenarioKind::kWalkCycle:
      return -1;
  }
  return -1;
}

Scenario Scenario::sample(ScenarioKind kind, std::uint64_t seed) {
  Rng rng = make_rng(seed);
  Scenario s;
  s.kind = kind;
  s.seed = seed;
  for (int i = 0; i < kBetaSize; ++i) {
    s.beta[i] = uniform(rng, -1.0, 1.0);
  }
  s.duration = uniform(rng, 3.6, 4.6);
  switch (rng() % 3) {
    case 0:
      s.object = Primitive::sphere(uniform(rng, 0.045, 0.065));
      s.object_name = "sphere";
      break;
    case 1:
      s.object = Primitive::box(Vec3(uniform(rng, 0.03, 0.05), uniform(rng, 0.03, 0.05), uniform(rng, 0.03, 0.06)));
      s.object_name = "box";
      break;
    default:
      s.object = Primitive::capsule(uniform(rng, 0.03, 0.045), uniform(rng, 0.03, 0.05));
      s.object_name = "capsule";
      break;
  }
  return s;
}

double offset_rule_yaw(int task, const Eigen::VectorXd& beta) {
  HOMI_CHECK(beta.size() == kBetaSize, ErrorCode::kShapeMismatch, "beta must have 10 entries");
  switch (task) {
    case 0:
      return 0.2 * beta[1];
    case 1:
      return 0.4 + 0.2 * beta[1];
    case 2:
      return -0.2 * beta[1];
    default:
      fail(ErrorCode::kInvalidArgument, "task id out of range");
  }
}

ObjectOffset offset_rule(int task, const Eigen::VectorXd& beta) {
  const double yaw = offset_rule_yaw(task, beta);
  ObjectOffset out;
  switch (task) {
    case 0:
      out.t_off = Vec3(0.0, 0.0, 0.3 + 0.2 * beta[0]);
      break;
    case 1:
      out.t_off = Vec3(0.10 + 0.05 * beta[1], 0.20 + 0.10 * beta[0], 0.05 + 0.05 * beta[2]);
      break;
    default:
      out.t_off = Vec3(0.05 + 0.05 * beta[2], -0.10 - 0.08 * beta[0], -0.05 + 0.05 * beta[1]);
      break;
  }
  out.r_off = Rotation6D(matrix_to_rot6d(axis_angle(Vec3::UnitZ(), yaw)));
  return out;
}

TaskSpec LabeledClip::task_spec() const {
  TaskSpec spec;
  spec.task = scenario.task();
  spec.task_count = kTaskCount;
  spec.beta = scenario.beta;
  if (has_object && !object_motion.poses.empty()) {
    spec.t_init = object_motion.poses.front().t;
    spec.r_init = Rotation6D(matrix_to_rot6d(object_motion.poses.front().rot));
  }
  return spec;
}

namespace {

double smoothstep(double u) {
  u = std::clamp(u, 0.0, 1.0);
  return u * u * (3.0 - 2.0 * u);
}

// Orthonormal frame with x along `d` and y towards `pole`.
Mat3 frame_from(const Vec3& d, const Vec3& pole) {
  const Vec3 x = d.normalized();
  Vec3 y = pole - pole.dot(x) * x;
  if (y.norm() < 1e-9) {
    y = std::abs(x.z()) < 0.9 ? Vec3(x.cross(Vec3::UnitZ())) : Vec3(x.cross(Vec3::UnitX()));
  }
  y.normalize();
  Mat3 f;
  f.col(0) = x;
  f.col(1) = y;
  f.col(2) = x.cross(y);
  return f;
}

struct TwoBone {
  Mat3 upper;
  Mat3 lower;
  bool reached = true;
};

// Analytic two-bone IK. `bone1` / `bone2` are the rest bone vectors in their
// own frames; the chain bends towards `pole`, and the rest pose bends
// towards `pole_rest`.
TwoBone solve_two_bone(
    const Vec3& root,
    const Vec3& target,
    const Vec3& bone1,
    const Vec3& bone2,
    const Vec3& pole,
    const Vec3& pole_rest) {
  const double l1 = bone1.norm();
  const double l2 = bone2.norm();
  const Vec3 d = target - root;
  const double dist = d.norm();
  const double lo = std::abs(l1 - l2) + 1e-9;
  const double hi = l1 + l2 - 1e-9;
  const double reach = std::clamp(dist, lo, hi);
  const Vec3 n = dist > 1e-12 ? Vec3(d / dist) : Vec3(-Vec3::UnitZ());
  Vec3 m = pole - pole.dot(n) * n;
  if (m.norm() < 1e-9) {
    m = frame_from(n, Vec3::UnitX()).col(1);
  }
  m.normalize();
  const double c = std::clamp((l1 * l1 + reach * reach - l2 * l2) / (2.0 * l1 * reach), -1.0, 1.0);
  const double s = std::sqrt(std::max(0.0, 1.0 - c * c));
  const Vec3 elbow = root + l1 * (c * n + s * m);
  const Vec3 end = root + reach * n;
  TwoBone out;
  out.reached = reach == dist;
  out.upper = frame_from(elbow - root, m) * frame_from(bone1, pole_rest).transpose();
  out.lower = frame_from(end - elbow, m) * frame_from(bone2, pole_rest).transpose();
  return out;
}

Mat3 rot_y(double a) {
  return axis_angle(Vec3::UnitY(), a);
}
Mat3 rot_z(double a) {
  return axis_angle(Vec3::UnitZ(), a);
}

struct Rig {
  const Skeleton* skel = nullptr;
  int pelvis = 0;
  std::vector<int> spine; // chain receiving the torso lean
  int shoulder = -1, elbow = -1, wrist = -1;
  std::array<int, 2> hip{}, knee{};
  std::array<int, 2> ankle{-1, -1};
  std::array<Vec3, 2> shin{}; // leg end point in the knee frame
  double ankle_height = 0.025;
  double pelvis_height = 0.0;
  Vec3 arm_pole = Vec3(-0.3, -1.0, 0.0).normalized();
  Vec3 leg_pole = Vec3::UnitX();

  explicit Rig(const Skeleton& s) : skel(&s) {
    pelvis = 0;
    for (const char* name : {"spine1", "spine2", "spine3"}) {
      if (auto j = s.find_joint(name)) {
        spine.push_back(*j);
      }
    }
    HOMI_CHECK(!spine.empty(), ErrorCode::kInvalidSkeleton, "generator needs a spine3 joint");
    shoulder = s.joint_index("right_shoulder");
    elbow = s.joint_index("right_elbow");
    wrist = s.joint_index("right_wrist");
    const char* sides[2] = {"left", "right"};
    for (int i = 0; i < 2; ++i) {
      hip[i] = s.joint_index(std::string(sides[i]) + "_hip");
      knee[i] = s.joint_index(std::string(sides[i]) + "_knee");
      if (auto a = s.find_joint(std::string(sides[i]) + "_ankle")) {
        ankle[i] = *a;
        shin[i] = s.offsets()[*a];
      } else {
        Vec3 sum = Vec3::Zero();
        int count = 0;
        for (int id : s.foot_marker_ids()) {
          if (s.markers()[id].joint == knee[i]) {
            sum += s.markers()[id].offset;
            ++count;
          }
        }
        HOMI_CHECK(count > 0, ErrorCode::kInvalidSkeleton, "no foot markers below the knee");
        shin[i] = sum / count;
      }
    }
    const double leg = s.offsets()[knee[0]].norm() + shin[0].norm();
    pelvis_height = ankle_height - s.offsets()[hip[0]].z() + 0.96 * leg;
  }

  double arm_length() const {
    return skel->offsets()[elbow].norm() + skel->offsets()[wrist].norm();
  }
};

// Pose assembled from world-space rotations, converted to local 6D at the end.
struct PoseBuilder {
  const Rig& rig;
  std::vector<Mat3> global;
  std::vector<std::optional<Mat3>> fixed; // overrides; others inherit the parent
  std::vector<Vec3> pos;
  Vec3 root = Vec3::Zero();

  explicit PoseBuilder(const Rig& r) : rig(r) {
    const int count = r.skel->joint_count();
    global.assign(count, Mat3::Identity());
    fixed.assign(count, std::nullopt);
    pos.assign(count, Vec3::Zero());
  }

  void evaluate() {
    const auto& parents = rig.skel->parents();
    const auto& offsets = rig.skel->offsets();
    for (int j = 0; j < rig.skel->joint_count(); ++j) {
      const int p = parents[j];
      if (p < 0) {
        global[j] = fixed[j].value_or(Mat3::Identity());
        pos[j] = root;
      } else {
        global[j] = fixed[j].value_or(global[p]);
        pos[j] = pos[p] + global[p] * offsets[j];
      }
    }
  }

  void write(MotionImage& motion, int frame) const {
    const auto& parents = rig.skel->parents();
    for (int j = 0; j < rig.skel->joint_count(); ++j) {
      const int p = parents[j];
      const Mat3 local = p < 0 ? global[j] : Mat3(global[p].transpose() * global[j]);
      motion.set_rot6(j, frame, matrix_to_rot6d(local));
    }
    motion.set_root(frame, root);
  }

  void lean(double angle) {
    const double per = angle / static_cast<double>(rig.spine.size());
    // Each spine joint adds its share on top of its parent.
    evaluate();
    for (int j : rig.spine) {
      const int p = rig.skel->parents()[j];
      fixed[j] = Mat3(global[p] * rot_y(per));
      evaluate();
    }
  }

  // Both feet at the given end-point targets.
  void legs(const std::array<Vec3, 2>& targets) {
    evaluate();
    const auto& offsets = rig.skel->offsets();
    for (int i = 0; i < 2; ++i) {
      const TwoBone ik = solve_two_bone(
          pos[rig.hip[i]], targets[i], offsets[rig.knee[i]], rig.shin[i], rig.leg_pole, rig.leg_pole);
      fixed[rig.hip[i]] = ik.upper;
      fixed[rig.knee[i]] = ik.lower;
      if (rig.ankle[i] >= 0) {
        fixed[rig.ankle[i]] = Mat3::Identity();
      }
    }
    evaluate();
  }

  // Right wrist at `target` with world orientation `orientation`.
  bool arm(const Vec3& target, const Mat3& orientation) {
    evaluate();
    const auto& offsets = rig.skel->offsets();
    const TwoBone ik = solve_two_bone(
        pos[rig.shoulder], target, offsets[rig.elbow], offsets[rig.wrist], rig.arm_pole, rig.arm_pole);
    fixed[rig.shoulder] = ik.upper;
    fixed[rig.elbow] = ik.lower;
    fixed[rig.wrist] = orientation;
    evaluate();
    return ik.reached;
  }
};

Vec3 shoulder_position(const Rig& rig, const Vec3& root, double lean) {
  PoseBuilder b(rig);
  b.root = root;
  b.lean(lean);
  return b.pos[rig.shoulder];
}

std::array<Vec3, 2> planted_feet(const Rig& rig, const Vec3& root) {
  PoseBuilder b(rig);
  b.root = root;
  b.evaluate();
  std::array<Vec3, 2> out;
  for (int i = 0; i < 2; ++i) {
    out[i] = b.pos[rig.hip[i]];
    out[i].z() = rig.ankle_height;
  }
  return out;
}

int frames_for(double duration) {
  return static_cast<int>(std::lround(duration * kDatasetFps)) + 1;
}

struct RawClip {
  MotionImage motion;
  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> stance;
};

// Wrist point of the hand-object attachment: object centre in the wrist
// frame for a side grasp with the palm facing +y.
Vec3 grip_center(const Primitive& prim) {
  double r = prim.radius;
  if (prim.kind == Primitive::Kind::kBox) {
    r = std::min(prim.half_extents.x(), prim.half_extents.y());
  }
  return Vec3(0.01, 0.02 + r, -0.15);
}

LabeledClip gen_reach(const Skeleton& skel, const Scenario& sc) {
  const Rig rig(skel);
  Rng rng = make_rng(derive_seed(sc.seed, 1));
  const int task = sc.task();

  const int out_frames = frames_for(sc.duration);
  const int stride = static_cast<int>(kGenerationFps / kDatasetFps);
  const int frames = (out_frames - 1) * stride + 1;
  const int grasp_out = static_cast<int>(std::lround(0.45 * (out_frames - 1)));
  const int release_out = static_cast<int>(std::lround(0.85 * (out_frames - 1)));
  const int rest_end = static_cast<int>(std::lround(0.12 * (frames - 1)));
  const int grasp = grasp_out * stride;
  const int release = release_out * stride;

  const Vec3 root(uniform(rng, -0.3, 0.3), uniform(rng, -0.3, 0.3), rig.pelvis_height);
  const Vec3 s0 = shoulder_position(rig, root, 0.0);
  const Vec3 t_init = s0 + Vec3(0.30 + uniform(rng, -0.03, 0.05), -0.05 + uniform(rng, -0.05, 0.05),
                                -0.40 + uniform(rng, -0.05, 0.05));
  const Mat3 r_init = rot_z(uniform(rng, -std::numbers::pi, std::numbers::pi));
  const Mat3 hand_g = rot_z(uniform(rng, -0.3, 0.3)) * rot_y(-std::numbers::pi / 2 + uniform(rng, -0.2, 0.2));
  const Vec3 c_local = grip_center(sc.object);

  ObjectOffset rule = offset_rule(task, sc.beta);
  const double yaw = offset_rule_yaw(task, sc.beta) + normal(rng, 0.0, kOffsetNoise);
  const Vec3 t_off = rule.t_off + Vec3(normal(rng, 0.0, kOffsetNoise), normal(rng, 0.0, kOffsetNoise),
                                       normal(rng, 0.0, kOffsetNoise));

  // Object path during manipulation: smooth straight line plus yaw.
  auto object_at = [&](double u) {
    const double s = smoothstep(u);
    return std::make_pair(Vec3(t_init + s * t_off), Mat3(rot_z(s * yaw)));
  };
  auto wrist_at = [&](double u) {
    const auto [p, r] = object_at(u);
    const Mat3 orient = r * hand_g;
    return std::make_pair(Vec3(p - orient * c_local), orient);
  };

  // Smallest torso lean that keeps every manipulation target reachable.
  const double reach = rig.arm_length() - 0.01;
  double lean = -1.0;
  for (int step = 0; step <= 6 && lean < 0.0; ++step) {
    const double candidate = 0.1 * step;
    const Vec3 s = shoulder_position(rig, root, candidate);
    bool ok = true;
    for (int k = 0; k <= 20 && ok; ++k) {
      ok = (wrist_at(k / 20.0).first - s).norm() <= reach;
    }
    if (ok) {
      lean = candidate;
    }
  }
  HOMI_CHECK(lean >= 0.0, ErrorCode::kInfeasibleScenario, "object targets are out of reach");

  const std::array<Vec3, 2> feet = planted_feet(rig, root);
  PoseBuilder b(rig);
  b.root = root;
  b.legs(feet);
  const Vec3 wrist_rest = b.pos[rig.wrist];
  const Mat3 hand_rest = b.global[rig.wrist];
  const Vec3 wrist_g = wrist_at(0.0).first;

  RawClip raw{MotionImage(skel.name(), skel.joint_count(), frames, kGenerationFps), {}};
  raw.stance.setConstant(8, frames, true);
  for (int n = 0; n < frames; ++n) {
    PoseBuilder pb(rig);
    pb.root = root;
    double progress = 0.0;
    if (n > rest_end) {
      progress = smoothstep(static_cast<double>(n - rest_end) / (grasp - rest_end));
    }
    pb.lean(lean * progress);
    pb.legs(feet);
    Vec3 target;
    Mat3 orient;
    if (n <= grasp) {
      target = wrist_rest + progress * (wrist_g - wrist_rest) + Vec3(0.0, 0.0, 0.08 * std::sin(std::numbers::pi * progress));
      orient = slerp(Quat(hand_rest), Quat(hand_g), progress).toRotationMatrix();
    } else {
      const double u = std::min(1.0, static_cast<double>(n - grasp) / (release - grasp));
      std::tie(target, orient) = wrist_at(u);
    }
    const bool reached = pb.arm(target, orient);
    HOMI_CHECK(
        reached || n < grasp, ErrorCode::kInfeasibleScenario, "wrist target out of reach while holding the object");
    pb.write(raw.motion, n);
  }

  LabeledClip clip;
  clip.scenario = sc;
  clip.motion = downsample(raw.motion, kGenerationFps, kDatasetFps);
  clip.stance = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(8, clip.motion.frames(), true);
  clip.has_object = true;
  Rng cloud_rng = make_rng(derive_seed(sc.seed, 2));
  clip.cloud = sample_surface(sc.object, sc.object_name, 512, cloud_rng);
  clip.grasp_frame = grasp_out;
  clip.manipulation_end = release_out;

  // Object poses follow the stored (round-tripped) wrist exactly.
  const int wrist = rig.wrist;
  const PoseState g_state =
      forward_kinematics(skel, clip.motion.pose(grasp_out), clip.motion.root(grasp_out));
  const Mat3 g_rot = g_state.global_rot[wrist];
  const Vec3 g_pos = g_state.position[wrist];
  const Vec3 local_t = g_rot.transpose() * (t_init - g_pos);
  const Mat3 local_r = g_rot.transpose() * r_init;
  clip.object_motion.name = sc.object_name;
  clip.object_motion.fps = kDatasetFps;
  clip.object_motion.poses.resize(clip.motion.frames());
  for (int n = grasp_out; n < clip.motion.frames(); ++n) {
    const PoseState st = forward_kinematics(skel, clip.motion.pose(n), clip.motion.root(n));
    clip.object_motion.poses[n].t = st.position[wrist] + st.global_rot[wrist] * local_t;
    clip.object_motion.poses[n].rot = st.global_rot[wrist] * local_r;
  }
  for (int n = 0; n < grasp_out; ++n) {
    clip.object_motion.poses[n] = clip.object_motion.poses[grasp_out];
  }
  clip.offset = offset_between(clip.object_motion.poses.front(), clip.object_motion.poses.back());
  return clip;
}

LabeledClip gen_walk(const Skeleton& skel, const Scenario& sc) {
  const Rig rig(skel);
  Rng rng = make_rng(derive_seed(sc.seed, 1));
  const int out_frames = frames_for(sc.duration);
  const int stride = static_cast<int>(kGenerationFps / kDatasetFps);
  const int frames = (out_frames - 1) * stride + 1;
  const double dt = 1.0 / kGenerationFps;
  const double duration = (frames - 1) * dt;

  const double speed = uniform(rng, 0.4, 0.6);
  const double period = uniform(rng, 0.95, 1.1);
  const double swing = 0.35 * period;
  const double lift = uniform(rng, 0.06, 0.09);
  const Vec3 start(uniform(rng, -0.5, 0.0), uniform(rng, -0.3, 0.3), rig.pelvis_height);

  auto ramp = [&](double t) {
    return smoothstep((t - 0.3) / 0.7) * smoothstep((duration - 0.3 - t) / 0.7);
  };
  // Pelvis progress by trapezoidal integration of the velocity profile,
  // sampled finely enough to be queried at arbitrary times.
  std::vector<double> x(frames, 0.0);
  for (int n = 1; n < frames; ++n) {
    x[n] = x[n - 1] + 0.5 * dt * speed * (ramp((n - 1) * dt) + ramp(n * dt));
  }
  auto pelvis_x = [&](double t) {
    const double f = std::clamp(t / dt, 0.0, static_cast<double>(frames - 1));
    const int i = std::min(static_cast<int>(f), frames - 2);
    const double u = f - i;
    return (1.0 - u) * x[i] + u * x[i + 1];
  };

  const std::array<Vec3, 2> feet0 = planted_feet(rig, start);
  // Swing windows per foot: [begin, begin + swing) each period, offset by
  // half a period between feet.
  struct Swing {
    double begin, end;
    double from, to;
  };
  std::array<std::vector<Swing>, 2> swings;
  for (int i = 0; i < 2; ++i) {
    double planted = feet0[i].x();
    for (int k = 0;; ++k) {
      const double begin = k * period + (i == 0 ? 0.05 : 0.55) * period;
      if (begin + swing > duration) {
        break;
      }
      const double land = start.x() + pelvis_x(begin + swing + 0.25 * period) + (feet0[i].x() - start.x());
      if (land - planted > 0.02) {
        swings[i].push_back({begin, begin + swing, planted, land});
        planted = land;
      }
    }
  }

  RawClip raw{MotionImage(skel.name(), skel.joint_count(), frames, kGenerationFps), {}};
  raw.stance.setConstant(8, frames, true);
  const auto& foot_ids = skel.foot_marker_ids();
  for (int n = 0; n < frames; ++n) {
    const double t = n * dt;
    const double phase = 2.0 * std::numbers::pi * t / period;
    PoseBuilder pb(rig);
    pb.root = Vec3(start.x() + x[n], start.y(), start.z() - 0.01 * (1.0 - std::cos(2.0 * phase)) * 0.5 * ramp(t));
    std::array<Vec3, 2> feet = feet0;
    std::array<bool, 2> stance = {true, true};
    for (int i = 0; i < 2; ++i) {
      double fx = feet0[i].x();
      double fz = rig.ankle_height;
      for (const Swing& s : swings[i]) {
        if (t >= s.end) {
          fx = s.to;
        } else if (t > s.begin) {
          const double u = (t - s.begin) / (s.end - s.begin);
          fx = s.from + u * (s.to - s.from);
          fz = rig.ankle_height + lift * std::sin(std::numbers::pi * u);
          stance[i] = false;
          break;
        } else {
          fx = s.from;
          break;
        }
      }
      feet[i].x() = fx;
      feet[i].z() = fz;
    }
    pb.lean(0.05 * ramp(t));
    pb.legs(feet);
    // Arm swing opposite to the right leg.
    const double a = 0.25 * std::sin(phase) * ramp(t);
    pb.evaluate();
    const int sh_parent = skel.parents()[rig.shoulder];
    pb.fixed[rig.shoulder] = Mat3(pb.global[sh_parent] * rot_y(-a));
    pb.evaluate();
    pb.fixed[rig.elbow] = Mat3(pb.global[rig.shoulder] * rot_y(-0.25));
    pb.evaluate();
    pb.write(raw.motion, n);
    for (size_t k = 0; k < foot_ids.size(); ++k) {
      const int joint = skel.markers()[foot_ids[k]].joint;
      const int side = (joint == rig.knee[0] || joint == rig.ankle[0]) ? 0 : 1;
      raw.stance(static_cast<Eigen::Index>(k), n) = stance[side];
    }
  }

  LabeledClip clip;
  clip.scenario = sc;
  clip.motion = downsample(raw.motion, kGenerationFps, kDatasetFps);
  clip.stance.resize(8, clip.motion.frames());
  for (int n = 0; n < clip.motion.frames(); ++n) {
    clip.stance.col(n) = raw.stance.col(n * stride);
  }
  return clip;
}

} // namespace

LabeledClip gen_clip(const Skeleton& skel, const Scenario& scenario) {
  HOMI_CHECK(
      frames_for(scenario.duration) >= 64,
      ErrorCode::kInfeasibleScenario,
      "scenario shorter than 64 frames at 30 fps");
  HOMI_CHECK(scenario.beta.size() == kBetaSize, ErrorCode::kInvalidArgument, "beta must have 10 entries");
  scenario.object.validate();
  if (scenario.kind == ScenarioKind::kWalkCycle) {
    return gen_walk(skel, scenario);
  }
  return gen_reach(skel, scenario);
}

MotionImage downsample(const MotionImage& motion, double from_fps, double to_fps) {
  HOMI_CHECK(from_fps > 0.0 && to_fps > 0.0, ErrorCode::kInvalidArgument, "frame rates must be positive");
  const double ratio = from_fps / to_fps;
  const long stride = std::lround(ratio);
  HOMI_CHECK(
      stride >= 1 && std::abs(ratio - static_cast<double>(stride)) < 1e-9,
      ErrorCode::kNonIntegerStride,
      "frame-rate ratio is not a positive integer");
  const int frames = static_cast<int>((motion.frames() - 1) / stride) + 1;
  MotionImage out(motion.skeleton, motion.joints, frames, to_fps);
  for (int n = 0; n < frames; ++n) {
    out.data.col(n) = motion.data.col(n * stride);
  }
  return out;
}

std::vector<TrainingWindow> window_dataset(std::span<const MotionImage> clips, int win, int skip) {
  HOMI_CHECK(win >= 2 && skip >= 1, ErrorCode::kInvalidArgument, "window and skip must be positive");
  std::vector<TrainingWindow> out;
  for (size_t c = 0; c < clips.size(); ++c) {
    const MotionImage& clip = clips[c];
    HOMI_CHECK(
        clip.frames() >= win,
        ErrorCode::kClipTooShort,
        "clip " + std::to_string(c) + " has " + std::to_string(clip.frames()) + " frames, need " +
            std::to_string(win));
    for (int start = 0; start + win <= clip.frames(); start += skip) {
      TrainingWindow w;
      w.motion = MotionImage(clip.skeleton, clip.joints, win, clip.fps);
      w.motion.data = clip.data.middleCols(start, win);
      w.context = ContextInput::from_frames(w.motion.data.col(0), w.motion.data.col(win - 1), clip.joints);
      w.clip = static_cast<int>(c);
      w.start = start;
      out.push_back(std::move(w));
    }
  }
  return out;
}

std::vector<LabeledClip> gen_dataset(const Skeleton& skel, int count, std::uint64_t seed) {
  static constexpr std::array<ScenarioKind, 4> kCycle = {
      ScenarioKind::kReachLift, ScenarioKind::kReachPass, ScenarioKind::kReachPlace, ScenarioKind::kWalkCycle};
  std::vector<LabeledClip> out;
  out.reserve(count);
  std::uint64_t salt = 0;
  for (int i = 0; i < count; ++i) {
    const ScenarioKind kind = kCycle[i % kCycle.size()];
    for (int attempt = 0;; ++attempt) {
      HOMI_CHECK(attempt < 100, ErrorCode::kInfeasibleScenario, "could not draw a feasible scenario");
      const Scenario sc = Scenario::sample(kind, derive_seed(seed, salt++));
      try {
        out.push_back(gen_clip(skel, sc));
        break;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kInfeasibleScenario) {
          throw;
        }
      }
    }
  }
  return out;
}

} // namespace homi
