#include "homi/config.h"

#include <cstdlib>
#include <set>

#include <nlohmann/json.hpp>

#include "homi/error.h"
#include "homi/io.h"

namespace homi {

namespace {

using ojson = nlohmann::ordered_json;

// Binds config fields to a JSON object in either direction, so parsing and
// dumping share one field list.
class Binder {
 public:
  Binder(const ojson* in, ojson* out, std::string path) : in_(in), out_(out), path_(std::move(path)) {
    if (in_ != nullptr) {
      HOMI_CHECK(in_->is_object(), ErrorCode::kConfig, where() + " must be an object");
    }
  }

  template <typename T>
  void field(const char* key, T& value) {
    seen_.insert(key);
    if (out_ != nullptr) {
      (*out_)[key] = value;
      return;
    }
    if (!in_->contains(key)) {
      return;
    }
    const ojson& v = in_->at(key);
    const std::string name = join(key);
    if constexpr (std::is_same_v<T, bool>) {
      HOMI_CHECK(v.is_boolean(), ErrorCode::kConfig, name + " must be a boolean");
    } else if constexpr (std::is_integral_v<T>) {
      HOMI_CHECK(v.is_number_integer(), ErrorCode::kConfig, name + " must be an integer");
      if constexpr (std::is_unsigned_v<T>) {
        HOMI_CHECK(
            v.is_number_unsigned() || v.get<long long>() >= 0, ErrorCode::kConfig, name + " must be nonnegative");
      }
    } else if constexpr (std::is_floating_point_v<T>) {
      HOMI_CHECK(v.is_number(), ErrorCode::kConfig, name + " must be a number");
    } else {
      HOMI_CHECK(v.is_string(), ErrorCode::kConfig, name + " must be a string");
    }
    value = v.get<T>();
  }

  template <typename F>
  void section(const char* key, F&& body) {
    seen_.insert(key);
    if (out_ != nullptr) {
      ojson child = ojson::object();
      Binder b(nullptr, &child, join(key));
      body(b);
      (*out_)[key] = child;
      return;
    }
    if (!in_->contains(key)) {
      return;
    }
    Binder b(&in_->at(key), nullptr, join(key));
    body(b);
    b.finish();
  }

  void finish() const {
    if (in_ == nullptr) {
      return;
    }
    for (const auto& [k, v] : in_->items()) {
      HOMI_CHECK(seen_.count(k) > 0, ErrorCode::kConfig, "unknown key " + join(k));
    }
  }

 private:
  std::string join(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  std::string where() const {
    return path_.empty() ? std::string("config") : path_;
  }

  const ojson* in_;
  ojson* out_;
  std::string path_;
  std::set<std::string> seen_;
};

void bind(Binder& b, PipelineConfig& c) {
  b.field("skeleton", c.skeleton);
  b.field("seed", c.seed);
  b.field("threads", c.threads);
  b.section("paths", [&](Binder& s) {
    s.field("data_dir", c.paths.data_dir);
    s.field("out_dir", c.paths.out_dir);
    s.field("infill_checkpoint", c.paths.infill_checkpoint);
    s.field("sampler_checkpoint", c.paths.sampler_checkpoint);
    s.field("goal_checkpoint", c.paths.goal_checkpoint);
  });
  b.section("data", [&](Binder& s) {
    s.field("clips", c.data.clips);
    s.field("window", c.data.window);
    s.field("skip", c.data.skip);
    s.field("held_out", c.data.held_out);
    s.field("basis_seed", c.data.basis_seed);
  });
  b.section("infill", [&](Binder& s) {
    InfillConfig& i = c.infill;
    s.field("width", i.width);
    s.field("hyper_width", i.hyper_width);
    s.field("hyper_layers", i.hyper_layers);
    s.field("rank", i.rank);
    s.field("fourier", i.fourier);
    s.field("activation", i.activation);
    s.field("pose_residual", i.pose_residual);
    s.field("epochs", i.epochs);
    s.field("batch", i.batch);
    s.field("learning_rate", i.learning_rate);
    s.field("clip_norm", i.clip_norm);
    s.field("contact_source", i.contact_source);
    s.section("loss", [&](Binder& l) {
      l.field("theta", i.loss.theta);
      l.field("t", i.loss.t);
      l.field("v", i.loss.v);
      l.field("contact", i.loss.contact);
    });
  });
  b.section("sampler", [&](Binder& s) {
    SamplerSection& i = c.sampler;
    s.field("latent", i.latent);
    s.field("hidden", i.hidden);
    s.field("use_beta", i.use_beta);
    s.field("epochs", i.epochs);
    s.field("batch", i.batch);
    s.field("learning_rate", i.learning_rate);
    s.field("final_lr_fraction", i.final_lr_fraction);
    s.section("loss", [&](Binder& l) {
      l.field("t", i.loss.t);
      l.field("r", i.loss.r);
      l.field("kl", i.loss.kl);
    });
  });
  b.section("goal", [&](Binder& s) {
    GoalSection& i = c.goal;
    s.field("latent", i.latent);
    s.field("hidden", i.hidden);
    s.field("epochs", i.epochs);
    s.field("batch", i.batch);
    s.field("learning_rate", i.learning_rate);
    s.field("final_lr_fraction", i.final_lr_fraction);
    s.section("loss", [&](Binder& l) {
      l.field("theta", i.loss.theta);
      l.field("t", i.loss.t);
      l.field("h", i.loss.h);
      l.field("d", i.loss.d);
      l.field("kl", i.loss.kl);
    });
  });
  b.section("thresholds", [&](Binder& s) {
    ThresholdConfig& t = c.thresholds;
    s.field("contact_height", t.contact_height);
    s.field("contact_speed", t.contact_speed);
    s.field("skating_height", t.skating_height);
    s.field("skating_displacement", t.skating_displacement);
    s.field("contact_eps", t.contact_eps);
    s.field("blend_window", t.blend_window);
  });
  b.section("pipeline", [&](Binder& s) {
    PipelineSection& p = c.pipeline;
    s.field("approach_frames", p.approach_frames);
    s.field("manipulation_frames", p.manipulation_frames);
    s.field("fps", p.fps);
    s.field("use_rotation", p.use_rotation);
    s.field("drift_gate", p.drift_gate);
  });
}

void require(bool cond, const std::string& msg) {
  HOMI_CHECK(cond, ErrorCode::kConfig, msg);
}

} // namespace

void PipelineConfig::validate() const {
  require(!skeleton.empty(), "skeleton must be set");
  require(threads >= 1, "threads must be >= 1");
  require(data.clips >= 1 && data.window >= 2 && data.skip >= 1, "data sizes must be positive");
  require(data.held_out >= 0 && data.held_out < data.clips, "data.held_out must be in [0, clips)");
  require(infill.width >= 0 && infill.hyper_width >= 0, "infill widths must be >= 0");
  require(infill.hyper_layers >= 1 && infill.rank >= 1 && infill.fourier >= 0, "bad infill layer spec");
  nn::activation_from_string(infill.activation);
  contact_source_from_string(infill.contact_source);
  require(infill.epochs >= 0 && infill.batch >= 1, "bad infill epochs or batch");
  require(infill.learning_rate > 0.0 && infill.clip_norm >= 0.0, "bad infill optimiser settings");
  try {
    infill.loss.validate();
    sampler.loss.validate();
  } catch (const Error& e) {
    fail(ErrorCode::kConfig, e.what());
  }
  require(sampler.latent >= 1 && sampler.hidden >= 1, "bad sampler sizes");
  require(sampler.epochs >= 0 && sampler.batch >= 1 && sampler.learning_rate > 0.0, "bad sampler optimiser");
  require(sampler.final_lr_fraction > 0.0, "sampler.final_lr_fraction must be positive");
  require(goal.latent >= 1 && goal.hidden >= 1, "bad goal sizes");
  require(goal.epochs >= 0 && goal.batch >= 1 && goal.learning_rate > 0.0, "bad goal optimiser");
  require(goal.final_lr_fraction > 0.0, "goal.final_lr_fraction must be positive");
  const GoalLossWeights& g = goal.loss;
  require(g.theta >= 0 && g.t >= 0 && g.h >= 0 && g.d >= 0 && g.kl >= 0, "goal loss weights must be >= 0");
  require(thresholds.contact_height > 0 && thresholds.contact_speed > 0, "contact thresholds must be positive");
  require(thresholds.skating_height > 0 && thresholds.skating_displacement > 0, "skating thresholds must be positive");
  require(thresholds.contact_eps > 0 && thresholds.blend_window >= 1, "bad contact eps or blend window");
  require(pipeline.approach_frames >= 2 * thresholds.blend_window + 1, "approach_frames too short for the blend");
  require(
      pipeline.manipulation_frames >= 2 * thresholds.blend_window + 1, "manipulation_frames too short for the blend");
  require(pipeline.fps > 0.0 && pipeline.drift_gate > 0.0, "pipeline fps and drift gate must be positive");
}

PipelineConfig parse_config(const std::string& text, const std::string& source) {
  ojson j;
  try {
    j = ojson::parse(text);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kConfig, source + ": " + e.what());
  }
  PipelineConfig c;
  try {
    Binder b(&j, nullptr, "");
    bind(b, c);
    b.finish();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kConfig, source + ": " + e.what());
  }
  c.validate();
  return c;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::string text;
  try {
    text = io::read_text(path);
  } catch (const Error& e) {
    fail(ErrorCode::kConfig, e.what());
  }
  return parse_config(text, path.string());
}

std::string config_to_json(const PipelineConfig& config) {
  ojson j = ojson::object();
  PipelineConfig copy = config;
  Binder b(nullptr, &j, "");
  bind(b, copy);
  return j.dump(2) + "\n";
}

void apply_env_overrides(PipelineConfig& config) {
  auto parse = [](const char* name, const char* text) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(text, &end, 10);
    HOMI_CHECK(
        end != text && *end == '\0', ErrorCode::kConfig, std::string(name) + " must be a nonnegative integer");
    return v;
  };
  if (const char* s = std::getenv("HOMI_SEED")) {
    config.seed = parse("HOMI_SEED", s);
  }
  if (const char* s = std::getenv("HOMI_THREADS")) {
    const auto v = parse("HOMI_THREADS", s);
    HOMI_CHECK(v >= 1 && v <= 1024, ErrorCode::kConfig, "HOMI_THREADS must be in [1, 1024]");
    config.threads = static_cast<int>(v);
  }
}

InfillSpec infill_spec(const PipelineConfig& config, const Skeleton& skel) {
  InfillSpec s = InfillSpec::for_skeleton(skel, derive_seed(config.seed, 11));
  if (config.infill.width > 0) {
    s.width = config.infill.width;
  }
  if (config.infill.hyper_width > 0) {
    s.hyper_width = config.infill.hyper_width;
  }
  s.hyper_layers = config.infill.hyper_layers;
  s.rank = config.infill.rank;
  s.fourier = config.infill.fourier;
  s.activation = nn::activation_from_string(config.infill.activation);
  s.pose_residual = config.infill.pose_residual;
  return s;
}

InfillTrainConfig infill_train_config(const PipelineConfig& config) {
  InfillTrainConfig t;
  t.epochs = config.infill.epochs;
  t.batch = config.infill.batch;
  t.learning_rate = config.infill.learning_rate;
  t.clip_norm = config.infill.clip_norm;
  t.seed = derive_seed(config.seed, 12);
  t.threads = config.threads;
  t.loss.weights = config.infill.loss;
  t.loss.contact_source = contact_source_from_string(config.infill.contact_source);
  t.loss.height_eps = config.thresholds.contact_height;
  t.loss.speed_eps = config.thresholds.contact_speed;
  return t;
}

SamplerConfig sampler_config(const PipelineConfig& config) {
  SamplerConfig s;
  s.latent = config.sampler.latent;
  s.hidden = config.sampler.hidden;
  s.use_beta = config.sampler.use_beta;
  s.weights = config.sampler.loss;
  s.train.epochs = config.sampler.epochs;
  s.train.batch = config.sampler.batch;
  s.train.learning_rate = config.sampler.learning_rate;
  s.train.final_lr_fraction = config.sampler.final_lr_fraction;
  s.train.seed = derive_seed(config.seed, 13);
  return s;
}

GoalConfig goal_config(const PipelineConfig& config) {
  GoalConfig g;
  g.latent = config.goal.latent;
  g.hidden = config.goal.hidden;
  g.weights = config.goal.loss;
  g.train.epochs = config.goal.epochs;
  g.train.batch = config.goal.batch;
  g.train.learning_rate = config.goal.learning_rate;
  g.train.final_lr_fraction = config.goal.final_lr_fraction;
  g.train.seed = derive_seed(config.seed, 14);
  return g;
}

} // namespace homi
