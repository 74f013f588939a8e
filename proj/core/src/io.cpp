#include "homi/io.h"

#include <cctype>
#include <charconv>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

#include "homi/error.h"

namespace homi::io {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary);
  HOMI_CHECK(out.good(), ErrorCode::kIo, "cannot write " + path.string());
  out << text;
  HOMI_CHECK(out.good(), ErrorCode::kIo, "write failed for " + path.string());
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  HOMI_CHECK(in.good(), ErrorCode::kIo, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

namespace {

// Whitespace tokenizer with typed reads and file-named errors.
class Reader {
 public:
  Reader(std::string text, std::string source) : text_(std::move(text)), source_(std::move(source)) {}

  std::string token() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) {
      ++pos_;
    }
    HOMI_CHECK(pos_ < text_.size(), ErrorCode::kParse, source_ + ": unexpected end of file");
    const size_t start = pos_;
    while (pos_ < text_.size() && !std::isspace(static_cast<unsigned char>(text_[pos_]))) {
      ++pos_;
    }
    return text_.substr(start, pos_ - start);
  }

  void expect(const std::string& word) {
    const std::string t = token();
    HOMI_CHECK(t == word, ErrorCode::kParse, source_ + ": expected '" + word + "', found '" + t + "'");
  }

  double number() {
    const std::string t = token();
    double v = 0.0;
    const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
    HOMI_CHECK(
        res.ec == std::errc() && res.ptr == t.data() + t.size(),
        ErrorCode::kParse,
        source_ + ": bad number '" + t + "'");
    return v;
  }

  long integer() {
    const std::string t = token();
    long v = 0;
    const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
    HOMI_CHECK(
        res.ec == std::errc() && res.ptr == t.data() + t.size(),
        ErrorCode::kParse,
        source_ + ": bad integer '" + t + "'");
    return v;
  }

  int count(long max = 100000000) {
    const long v = integer();
    HOMI_CHECK(v >= 0 && v <= max, ErrorCode::kParse, source_ + ": count out of range");
    return static_cast<int>(v);
  }

  Vec3 vec3() {
    const double x = number();
    const double y = number();
    const double z = number();
    return Vec3(x, y, z);
  }

  void version(const std::string& magic) {
    expect(magic);
    const long v = integer();
    HOMI_CHECK(v == 1, ErrorCode::kParse, source_ + ": unsupported version " + std::to_string(v));
  }

  bool done() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) {
      ++pos_;
    }
    return pos_ == text_.size();
  }

  void finish() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) {
      ++pos_;
    }
    HOMI_CHECK(pos_ == text_.size(), ErrorCode::kParse, source_ + ": trailing data");
  }

 private:
  std::string text_;
  std::string source_;
  size_t pos_ = 0;
};

Reader open_reader(const fs::path& path) {
  return Reader(read_text(path), path.string());
}

void append_row(std::string& out, const double* data, Eigen::Index n, Eigen::Index stride = 1) {
  for (Eigen::Index i = 0; i < n; ++i) {
    if (i > 0) {
      out += ' ';
    }
    out += format_double(data[i * stride]);
  }
  out += '\n';
}

std::string vec3_text(const Vec3& v) {
  return format_double(v.x()) + " " + format_double(v.y()) + " " + format_double(v.z());
}

} // namespace

// ---------------------------------------------------------------------------
// Skeleton

void save_skeleton(const fs::path& path, const Skeleton& skel) {
  std::string out = "homi-skeleton 1\nname " + skel.name() + "\njoints " + std::to_string(skel.joint_count()) + "\n";
  for (int j = 0; j < skel.joint_count(); ++j) {
    out += "joint " + skel.joint_names()[j] + " " + std::to_string(skel.parents()[j]) + " " +
        vec3_text(skel.offsets()[j]) + "\n";
  }
  out += "markers " + std::to_string(skel.markers().size()) + "\n";
  for (const Marker& m : skel.markers()) {
    out += "marker " + std::to_string(m.joint) + " " + std::string(to_string(m.tag)) + " " + vec3_text(m.offset) + "\n";
  }
  out += "samples " + std::to_string(skel.samples().size()) + "\n";
  for (const BodySample& s : skel.samples()) {
    out += "sample " + std::to_string(s.joint) + " " + (s.right_hand ? "1" : "0") + " " + vec3_text(s.offset) + "\n";
  }
  write_text(path, out);
}

Skeleton load_skeleton(const fs::path& path) {
  Reader r = open_reader(path);
  r.version("homi-skeleton");
  r.expect("name");
  const std::string name = r.token();
  r.expect("joints");
  const int joints = r.count();
  std::vector<std::string> names;
  std::vector<int> parents;
  std::vector<Vec3> offsets;
  for (int j = 0; j < joints; ++j) {
    r.expect("joint");
    names.push_back(r.token());
    parents.push_back(static_cast<int>(r.integer()));
    offsets.push_back(r.vec3());
  }
  r.expect("markers");
  const int m = r.count();
  std::vector<Marker> markers(m);
  for (auto& mk : markers) {
    r.expect("marker");
    mk.joint = static_cast<int>(r.integer());
    mk.tag = marker_tag_from_string(r.token());
    mk.offset = r.vec3();
  }
  r.expect("samples");
  const int s = r.count();
  std::vector<BodySample> samples(s);
  for (auto& bs : samples) {
    r.expect("sample");
    bs.joint = static_cast<int>(r.integer());
    bs.right_hand = r.integer() != 0;
    bs.offset = r.vec3();
  }
  r.finish();
  return Skeleton(name, names, parents, offsets, markers, samples);
}

Skeleton resolve_skeleton(const std::string& name_or_path) {
  if (name_or_path == "toy9" || name_or_path == "paper55") {
    return Skeleton::preset(name_or_path);
  }
  return load_skeleton(name_or_path);
}

// ---------------------------------------------------------------------------
// Motion

void save_motion(const fs::path& path, const MotionImage& motion) {
  motion.validate();
  std::string out = "homi-motion 1\nskeleton " + motion.skeleton + "\njoints " + std::to_string(motion.joints) +
      "\nframes " + std::to_string(motion.frames()) + "\nfps " + format_double(motion.fps) + "\n";
  for (Eigen::Index row = 0; row < motion.data.rows(); ++row) {
    append_row(out, motion.data.data() + row, motion.data.cols(), motion.data.rows());
  }
  write_text(path, out);
}

MotionImage load_motion(const fs::path& path) {
  Reader r = open_reader(path);
  r.version("homi-motion");
  r.expect("skeleton");
  const std::string skel = r.token();
  r.expect("joints");
  const int joints = r.count(100000);
  r.expect("frames");
  const int frames = r.count();
  r.expect("fps");
  const double fps = r.number();
  HOMI_CHECK(fps > 0.0, ErrorCode::kParse, path.string() + ": fps must be positive");
  MotionImage m(skel, joints, frames, fps);
  for (Eigen::Index row = 0; row < m.data.rows(); ++row) {
    for (int n = 0; n < frames; ++n) {
      m.data(row, n) = r.number();
    }
  }
  r.finish();
  m.validate();
  return m;
}

// ---------------------------------------------------------------------------
// Object motion

void save_object_motion(const fs::path& path, const ObjectMotion& motion) {
  std::string out = "homi-object-motion 1\nname " + (motion.name.empty() ? std::string("object") : motion.name) +
      "\nframes " + std::to_string(motion.frames()) + "\nfps " + format_double(motion.fps) + "\ndegenerate " +
      std::to_string(motion.degenerate_frames.size());
  for (int i : motion.degenerate_frames) {
    out += " " + std::to_string(i);
  }
  out += "\n";
  for (const ObjectPose& p : motion.poses) {
    Eigen::Matrix<double, 9, 1> row;
    row << p.t, matrix_to_rot6d(p.rot);
    append_row(out, row.data(), 9);
  }
  write_text(path, out);
}

ObjectMotion load_object_motion(const fs::path& path) {
  Reader r = open_reader(path);
  r.version("homi-object-motion");
  ObjectMotion m;
  r.expect("name");
  m.name = r.token();
  r.expect("frames");
  const int frames = r.count();
  r.expect("fps");
  m.fps = r.number();
  r.expect("degenerate");
  const int k = r.count();
  for (int i = 0; i < k; ++i) {
    m.degenerate_frames.push_back(static_cast<int>(r.integer()));
  }
  m.poses.resize(frames);
  for (auto& p : m.poses) {
    p.t = r.vec3();
    Vec6 r6;
    for (int i = 0; i < 6; ++i) {
      r6[i] = r.number();
    }
    p.rot = rot6d_to_matrix(r6);
  }
  r.finish();
  return m;
}

// ---------------------------------------------------------------------------
// Clouds and vectors

void save_cloud(const fs::path& path, const ObjectCloud& cloud) {
  cloud.validate();
  std::string out = cloud.name + " " + std::to_string(cloud.points.size()) + "\n";
  for (const Vec3& p : cloud.points) {
    out += vec3_text(p) + "\n";
  }
  write_text(path, out);
}

ObjectCloud load_cloud(const fs::path& path) {
  Reader r = open_reader(path);
  ObjectCloud c;
  c.name = r.token();
  const int n = r.count();
  c.points.resize(n);
  for (auto& p : c.points) {
    p = r.vec3();
  }
  r.finish();
  c.validate();
  return c;
}

void save_vector_row(const fs::path& path, const Eigen::VectorXd& v) {
  std::string out;
  append_row(out, v.data(), v.size());
  write_text(path, out);
}

Eigen::VectorXd load_vector_row(const fs::path& path) {
  Reader r = open_reader(path);
  std::vector<double> values;
  while (!r.done()) {
    values.push_back(r.number());
  }
  return Eigen::Map<Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

// ---------------------------------------------------------------------------
// Checkpoints

const std::string& Checkpoint::get(const std::string& key) const {
  for (const auto& [k, v] : header) {
    if (k == key) {
      return v;
    }
  }
  fail(ErrorCode::kParse, "checkpoint header lacks '" + key + "'");
}

int Checkpoint::get_int(const std::string& key) const {
  const std::string& v = get(key);
  int out = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  HOMI_CHECK(res.ec == std::errc() && res.ptr == v.data() + v.size(), ErrorCode::kParse, "bad integer for " + key);
  return out;
}

std::uint64_t Checkpoint::get_u64(const std::string& key) const {
  const std::string& v = get(key);
  std::uint64_t out = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  HOMI_CHECK(res.ec == std::errc() && res.ptr == v.data() + v.size(), ErrorCode::kParse, "bad integer for " + key);
  return out;
}

double Checkpoint::get_double(const std::string& key) const {
  const std::string& v = get(key);
  double out = 0.0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  HOMI_CHECK(res.ec == std::errc() && res.ptr == v.data() + v.size(), ErrorCode::kParse, "bad number for " + key);
  return out;
}

void save_checkpoint(const fs::path& path, const Checkpoint& ckpt) {
  std::string out = "homi-checkpoint 1\nkind " + ckpt.kind + "\n";
  for (const auto& [k, v] : ckpt.header) {
    out += k + " " + v + "\n";
  }
  out += "blob " + std::to_string(ckpt.blob.size()) + "\n";
  std::string bytes(8 * ckpt.blob.size(), '\0');
  for (size_t i = 0; i < ckpt.blob.size(); ++i) {
    std::uint64_t bits = 0;
    std::memcpy(&bits, &ckpt.blob[i], 8);
    for (int b = 0; b < 8; ++b) {
      bytes[8 * i + b] = static_cast<char>((bits >> (8 * b)) & 0xffu);
    }
  }
  write_text(path, out + bytes);
}

Checkpoint load_checkpoint(const fs::path& path) {
  HOMI_CHECK(fs::exists(path), ErrorCode::kMissingCheckpoint, "checkpoint not found: " + path.string());
  const std::string text = read_text(path);
  Checkpoint c;
  size_t pos = 0;
  auto next_line = [&]() {
    const size_t end = text.find('\n', pos);
    HOMI_CHECK(end != std::string::npos, ErrorCode::kParse, path.string() + ": truncated header");
    std::string line = text.substr(pos, end - pos);
    pos = end + 1;
    return line;
  };
  HOMI_CHECK(next_line() == "homi-checkpoint 1", ErrorCode::kParse, path.string() + ": not a v1 checkpoint");
  for (;;) {
    const std::string line = next_line();
    const size_t space = line.find(' ');
    HOMI_CHECK(space != std::string::npos, ErrorCode::kParse, path.string() + ": bad header line '" + line + "'");
    const std::string key = line.substr(0, space);
    const std::string value = line.substr(space + 1);
    if (key == "kind") {
      c.kind = value;
    } else if (key == "blob") {
      size_t n = 0;
      const auto res = std::from_chars(value.data(), value.data() + value.size(), n);
      HOMI_CHECK(res.ec == std::errc(), ErrorCode::kParse, path.string() + ": bad blob size");
      HOMI_CHECK(text.size() - pos == 8 * n, ErrorCode::kParse, path.string() + ": blob size mismatch");
      c.blob.resize(n);
      for (size_t i = 0; i < n; ++i) {
        std::uint64_t bits = 0;
        for (int b = 0; b < 8; ++b) {
          bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(text[pos + 8 * i + b])) << (8 * b);
        }
        std::memcpy(&c.blob[i], &bits, 8);
      }
      break;
    } else {
      c.header.emplace_back(key, value);
    }
  }
  return c;
}

namespace {

void push(std::vector<double>& blob, const Eigen::VectorXd& v) {
  blob.insert(blob.end(), v.data(), v.data() + v.size());
}

Eigen::VectorXd take(const std::vector<double>& blob, size_t& pos, Eigen::Index n) {
  HOMI_CHECK(pos + static_cast<size_t>(n) <= blob.size(), ErrorCode::kParse, "checkpoint blob too short");
  Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(blob.data() + pos, n);
  pos += static_cast<size_t>(n);
  return v;
}

void cvae_header(Checkpoint& c, const Cvae& net) {
  const CvaeSpec& s = net.spec();
  c.header.emplace_back("x_dim", std::to_string(s.x_dim));
  c.header.emplace_back("cond_dim", std::to_string(s.cond_dim));
  c.header.emplace_back("out_dim", std::to_string(s.out_dim));
  c.header.emplace_back("latent", std::to_string(s.latent));
  c.header.emplace_back("hidden", std::to_string(s.hidden));
  c.header.emplace_back("depth", std::to_string(s.depth));
  c.header.emplace_back("activation", std::string(nn::to_string(s.activation)));
  c.header.emplace_back("seed", std::to_string(s.seed));
  push(c.blob, net.x_norm().mean);
  push(c.blob, net.x_norm().scale);
  push(c.blob, net.cond_norm().mean);
  push(c.blob, net.cond_norm().scale);
  push(c.blob, net.out_norm().mean);
  push(c.blob, net.out_norm().scale);
  push(c.blob, net.parameters());
}

CvaeSpec cvae_spec(const Checkpoint& c) {
  CvaeSpec s;
  s.x_dim = c.get_int("x_dim");
  s.cond_dim = c.get_int("cond_dim");
  s.out_dim = c.get_int("out_dim");
  s.latent = c.get_int("latent");
  s.hidden = c.get_int("hidden");
  s.depth = c.get_int("depth");
  s.activation = nn::activation_from_string(c.get("activation"));
  s.seed = c.get_u64("seed");
  return s;
}

void cvae_blob(const Checkpoint& c, Cvae& net) {
  size_t pos = 0;
  const CvaeSpec& s = net.spec();
  net.x_norm().mean = take(c.blob, pos, s.x_dim);
  net.x_norm().scale = take(c.blob, pos, s.x_dim);
  net.cond_norm().mean = take(c.blob, pos, s.cond_dim);
  net.cond_norm().scale = take(c.blob, pos, s.cond_dim);
  net.out_norm().mean = take(c.blob, pos, s.out_dim);
  net.out_norm().scale = take(c.blob, pos, s.out_dim);
  net.parameters() = take(c.blob, pos, net.parameters().size());
  HOMI_CHECK(pos == c.blob.size(), ErrorCode::kParse, "checkpoint blob has trailing values");
}

void expect_kind(const Checkpoint& c, const std::string& kind, const fs::path& path) {
  HOMI_CHECK(
      c.kind == kind, ErrorCode::kParse, path.string() + ": expected a " + kind + " checkpoint, found " + c.kind);
}

} // namespace

void save_infill(const fs::path& path, const InfillModel& model, const LossWeightsMotion& weights) {
  const InfillSpec& s = model.spec();
  Checkpoint c;
  c.kind = "infill";
  c.header = {
      {"skeleton", s.skeleton},
      {"joints", std::to_string(s.joints)},
      {"width", std::to_string(s.width)},
      {"hyper_width", std::to_string(s.hyper_width)},
      {"hyper_layers", std::to_string(s.hyper_layers)},
      {"rank", std::to_string(s.rank)},
      {"fourier", std::to_string(s.fourier)},
      {"activation", std::string(nn::to_string(s.activation))},
      {"pose_residual", s.pose_residual ? "1" : "0"},
      {"seed", std::to_string(s.seed)},
      {"loss_theta", format_double(weights.theta)},
      {"loss_t", format_double(weights.t)},
      {"loss_v", format_double(weights.v)},
      {"loss_contact", format_double(weights.contact)},
  };
  push(c.blob, model.parameters());
  save_checkpoint(path, c);
}

InfillModel load_infill(const fs::path& path, const Skeleton& skel, LossWeightsMotion* weights) {
  const Checkpoint c = load_checkpoint(path);
  expect_kind(c, "infill", path);
  InfillSpec s;
  s.skeleton = c.get("skeleton");
  s.joints = c.get_int("joints");
  HOMI_CHECK(
      s.skeleton == skel.name() && s.joints == skel.joint_count(),
      ErrorCode::kSkeletonMismatch,
      path.string() + ": checkpoint was trained for skeleton '" + s.skeleton + "', not '" + skel.name() + "'");
  s.width = c.get_int("width");
  s.hyper_width = c.get_int("hyper_width");
  s.hyper_layers = c.get_int("hyper_layers");
  s.rank = c.get_int("rank");
  s.fourier = c.get_int("fourier");
  s.activation = nn::activation_from_string(c.get("activation"));
  s.pose_residual = c.get_int("pose_residual") != 0;
  s.seed = c.get_u64("seed");
  InfillModel model(s);
  HOMI_CHECK(
      static_cast<Eigen::Index>(c.blob.size()) == model.parameter_count(),
      ErrorCode::kParse,
      path.string() + ": parameter count does not match the header");
  model.parameters() = Eigen::Map<const Eigen::VectorXd>(c.blob.data(), model.parameter_count());
  if (weights != nullptr) {
    weights->theta = c.get_double("loss_theta");
    weights->t = c.get_double("loss_t");
    weights->v = c.get_double("loss_v");
    weights->contact = c.get_double("loss_contact");
  }
  return model;
}

void save_sampler(const fs::path& path, const ObjectSampler& sampler) {
  Checkpoint c;
  c.kind = "sampler";
  c.header = {{"task_count", std::to_string(sampler.task_count())}, {"use_beta", sampler.use_beta() ? "1" : "0"}};
  cvae_header(c, sampler.net());
  save_checkpoint(path, c);
}

ObjectSampler load_sampler(const fs::path& path) {
  const Checkpoint c = load_checkpoint(path);
  expect_kind(c, "sampler", path);
  ObjectSampler s(cvae_spec(c), c.get_int("task_count"), c.get_int("use_beta") != 0);
  cvae_blob(c, s.net());
  return s;
}

void save_goal(const fs::path& path, const GoalNet& net, const std::string& skeleton, std::uint64_t basis_seed) {
  Checkpoint c;
  c.kind = "goal";
  c.header = {
      {"skeleton", skeleton},
      {"joints", std::to_string(net.joints())},
      {"task_count", std::to_string(net.task_count())},
      {"basis_seed", std::to_string(basis_seed)}};
  cvae_header(c, net.net());
  save_checkpoint(path, c);
}

GoalNet load_goal(const fs::path& path, const Skeleton& skel, std::uint64_t* basis_seed) {
  const Checkpoint c = load_checkpoint(path);
  expect_kind(c, "goal", path);
  HOMI_CHECK(
      c.get("skeleton") == skel.name() && c.get_int("joints") == skel.joint_count(),
      ErrorCode::kSkeletonMismatch,
      path.string() + ": goal net was trained for skeleton '" + c.get("skeleton") + "'");
  GoalNet net(cvae_spec(c), c.get_int("joints"), c.get_int("task_count"));
  cvae_blob(c, net.net());
  if (basis_seed != nullptr) {
    *basis_seed = c.get_u64("basis_seed");
  }
  return net;
}

// ---------------------------------------------------------------------------
// Dataset

namespace {

std::string clip_id(size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "clip_%04zu", i);
  return buf;
}

ojson vec_json(const Eigen::VectorXd& v) {
  ojson a = ojson::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    a.push_back(v[i]);
  }
  return a;
}

Eigen::VectorXd json_vec(const ojson& a) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(a.size()));
  for (size_t i = 0; i < a.size(); ++i) {
    v[static_cast<Eigen::Index>(i)] = a[i].get<double>();
  }
  return v;
}

ojson labels_json(const LabeledClip& clip, const std::string& id) {
  ojson j;
  j["version"] = 1;
  j["id"] = id;
  j["kind"] = to_string(clip.scenario.kind);
  j["task"] = clip.scenario.task();
  j["seed"] = clip.scenario.seed;
  j["duration"] = clip.scenario.duration;
  j["beta"] = vec_json(clip.scenario.beta);
  j["has_object"] = clip.has_object;
  if (clip.has_object) {
    const Primitive& p = clip.scenario.object;
    j["object"] = {
        {"name", clip.scenario.object_name},
        {"primitive", to_string(p.kind)},
        {"radius", p.radius},
        {"half_extents", vec_json(p.half_extents)},
        {"half_length", p.half_length}};
    j["grasp_frame"] = clip.grasp_frame;
    j["manipulation_end"] = clip.manipulation_end;
    j["offset"] = {{"t", vec_json(clip.offset.t_off)}, {"r", vec_json(clip.offset.r_off.r)}};
  }
  ojson stance = ojson::array();
  for (Eigen::Index m = 0; m < clip.stance.rows(); ++m) {
    std::string row(static_cast<size_t>(clip.stance.cols()), '0');
    for (Eigen::Index n = 0; n < clip.stance.cols(); ++n) {
      row[static_cast<size_t>(n)] = clip.stance(m, n) ? '1' : '0';
    }
    stance.push_back(row);
  }
  j["stance"] = stance;
  return j;
}

template <typename F>
auto json_guard(const std::string& source, F&& f) {
  try {
    return f();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kParse, source + ": " + e.what());
  }
}

} // namespace

void save_dataset(const fs::path& dir, const Skeleton& skel, std::span<const LabeledClip> clips, std::uint64_t seed) {
  fs::create_directories(dir);
  save_skeleton(dir / "skeleton.txt", skel);
  ojson manifest;
  manifest["version"] = 1;
  manifest["skeleton"] = skel.name();
  manifest["seed"] = seed;
  manifest["fps"] = kDatasetFps;
  manifest["clips"] = ojson::array();
  for (size_t i = 0; i < clips.size(); ++i) {
    const LabeledClip& clip = clips[i];
    const std::string id = clip_id(i);
    save_motion(dir / (id + ".motion"), clip.motion);
    if (clip.has_object) {
      save_object_motion(dir / (id + ".object"), clip.object_motion);
      save_cloud(dir / (id + ".cloud"), clip.cloud);
    }
    write_text(dir / (id + ".labels.json"), labels_json(clip, id).dump(2) + "\n");
    manifest["clips"].push_back(
        {{"id", id},
         {"kind", to_string(clip.scenario.kind)},
         {"seed", clip.scenario.seed},
         {"frames", clip.motion.frames()},
         {"has_object", clip.has_object}});
  }
  write_text(dir / "manifest.json", manifest.dump(2) + "\n");
}

Manifest load_manifest(const fs::path& dir) {
  const fs::path path = dir / "manifest.json";
  const std::string text = read_text(path);
  return json_guard(path.string(), [&] {
    const ojson j = ojson::parse(text);
    Manifest m;
    m.version = j.at("version").get<int>();
    HOMI_CHECK(m.version == 1, ErrorCode::kParse, path.string() + ": unsupported manifest version");
    m.skeleton = j.at("skeleton").get<std::string>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.fps = j.at("fps").get<double>();
    for (const auto& c : j.at("clips")) {
      ClipRecord r;
      r.id = c.at("id").get<std::string>();
      r.kind = c.at("kind").get<std::string>();
      r.seed = c.at("seed").get<std::uint64_t>();
      r.frames = c.at("frames").get<int>();
      r.has_object = c.at("has_object").get<bool>();
      m.clips.push_back(r);
    }
    return m;
  });
}

LabeledClip load_clip(const fs::path& dir, const Skeleton& skel, const std::string& id) {
  LabeledClip clip;
  clip.motion = load_motion(dir / (id + ".motion"));
  HOMI_CHECK(clip.motion.skeleton == skel.name(), ErrorCode::kSkeletonMismatch, id + ": skeleton mismatch");
  const fs::path label_path = dir / (id + ".labels.json");
  const std::string text = read_text(label_path);
  json_guard(label_path.string(), [&] {
    const ojson j = ojson::parse(text);
    clip.scenario.kind = scenario_kind_from_string(j.at("kind").get<std::string>());
    clip.scenario.seed = j.at("seed").get<std::uint64_t>();
    clip.scenario.duration = j.at("duration").get<double>();
    clip.scenario.beta = json_vec(j.at("beta"));
    clip.has_object = j.at("has_object").get<bool>();
    if (clip.has_object) {
      const ojson& o = j.at("object");
      clip.scenario.object_name = o.at("name").get<std::string>();
      Primitive p;
      p.kind = primitive_kind_from_string(o.at("primitive").get<std::string>());
      p.radius = o.at("radius").get<double>();
      p.half_extents = json_vec(o.at("half_extents"));
      p.half_length = o.at("half_length").get<double>();
      clip.scenario.object = p;
      clip.grasp_frame = j.at("grasp_frame").get<int>();
      clip.manipulation_end = j.at("manipulation_end").get<int>();
      clip.offset.t_off = json_vec(j.at("offset").at("t"));
      clip.offset.r_off = Rotation6D(Vec6(json_vec(j.at("offset").at("r"))));
    }
    const ojson& stance = j.at("stance");
    clip.stance.resize(static_cast<Eigen::Index>(stance.size()), clip.motion.frames());
    for (size_t m = 0; m < stance.size(); ++m) {
      const std::string row = stance[m].get<std::string>();
      HOMI_CHECK(
          static_cast<int>(row.size()) == clip.motion.frames(),
          ErrorCode::kParse,
          label_path.string() + ": stance length differs from the motion");
      for (size_t n = 0; n < row.size(); ++n) {
        clip.stance(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n)) = row[n] == '1';
      }
    }
    return 0;
  });
  if (clip.has_object) {
    clip.object_motion = load_object_motion(dir / (id + ".object"));
    clip.cloud = load_cloud(dir / (id + ".cloud"));
  }
  return clip;
}

std::vector<LabeledClip> load_dataset(const fs::path& dir, const Skeleton& skel) {
  const Manifest manifest = load_manifest(dir);
  HOMI_CHECK(
      manifest.skeleton == skel.name(),
      ErrorCode::kSkeletonMismatch,
      "dataset was generated for skeleton '" + manifest.skeleton + "'");
  std::vector<LabeledClip> out;
  for (const ClipRecord& rec : manifest.clips) {
    out.push_back(load_clip(dir, skel, rec.id));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Reports

std::string format_reports(std::span<const MetricReport> reports) {
  std::string out;
  for (const MetricReport& r : reports) {
    ojson j;
    j["metric"] = r.name;
    j["unit"] = r.unit;
    j["lower_is_better"] = r.lower_is_better;
    ojson values = ojson::object();
    for (const auto& [k, v] : r.values) {
      values[k] = v;
    }
    ojson params = ojson::object();
    for (const auto& [k, v] : r.parameters) {
      params[k] = v;
    }
    j["values"] = values;
    j["parameters"] = params;
    out += j.dump() + "\n";
  }
  return out;
}

void save_reports(const fs::path& path, std::span<const MetricReport> reports) {
  write_text(path, format_reports(reports));
}

std::vector<MetricReport> parse_reports(const std::string& text) {
  std::vector<MetricReport> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) {
      continue;
    }
    out.push_back(json_guard("metric report", [&] {
      const ojson j = ojson::parse(line);
      MetricReport r;
      r.name = j.at("metric").get<std::string>();
      r.unit = j.at("unit").get<std::string>();
      r.lower_is_better = j.at("lower_is_better").get<bool>();
      for (const auto& [k, v] : j.at("values").items()) {
        r.values.emplace_back(k, v.is_null() ? std::numeric_limits<double>::quiet_NaN() : v.get<double>());
      }
      for (const auto& [k, v] : j.at("parameters").items()) {
        r.parameters.emplace_back(k, v.get<double>());
      }
      return r;
    }));
  }
  return out;
}

} // namespace homi::io
