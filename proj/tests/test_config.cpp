#include <cstdlib>
#include <string>

#include <gtest/gtest.h>

#include <homi/config.h>
#include <homi/error.h>

namespace homi {
namespace {

template <typename F>
void expect_config_error(F&& f) {
  try {
    f();
    FAIL() << "no throw";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kConfig) << e.what();
  }
}

TEST(Config, EmptyObjectGivesDefaults) {
  const PipelineConfig c = parse_config("{}");
  const PipelineConfig d;
  EXPECT_EQ(config_to_json(c), config_to_json(d));
  EXPECT_NO_THROW(c.validate());
}

TEST(Config, OverridesNestedValues) {
  const PipelineConfig c = parse_config(R"({
    "skeleton": "paper55",
    "seed": 12,
    "infill": {"rank": 4, "loss": {"contact": 0.0}},
    "pipeline": {"use_rotation": false, "drift_gate": 0.05}
  })");
  EXPECT_EQ(c.skeleton, "paper55");
  EXPECT_EQ(c.seed, 12u);
  EXPECT_EQ(c.infill.rank, 4);
  EXPECT_EQ(c.infill.loss.contact, 0.0);
  EXPECT_EQ(c.infill.loss.theta, LossWeightsMotion{}.theta);
  EXPECT_FALSE(c.pipeline.use_rotation);
  EXPECT_EQ(c.pipeline.drift_gate, 0.05);
}

TEST(Config, ResolvedJsonRoundTrips) {
  PipelineConfig c;
  c.seed = 99;
  c.sampler.use_beta = false;
  c.goal.loss.kl = 0.125;
  c.thresholds.contact_eps = 0.02;
  const std::string text = config_to_json(c);
  EXPECT_EQ(config_to_json(parse_config(text)), text);
}

TEST(Config, RejectsUnknownKeysAndWrongTypes) {
  expect_config_error([] { parse_config(R"({"sed": 1})"); });
  expect_config_error([] { parse_config(R"({"infill": {"loss": {"contacts": 1.0}}})"); });
  expect_config_error([] { parse_config(R"({"seed": "1"})"); });
  expect_config_error([] { parse_config(R"({"seed": -1})"); });
  expect_config_error([] { parse_config(R"({"infill": {"rank": 2.5}})"); });
  expect_config_error([] { parse_config(R"({"pipeline": {"use_rotation": 1}})"); });
  expect_config_error([] { parse_config(R"({"infill": 3})"); });
  expect_config_error([] { parse_config("{"); });
  expect_config_error([] { parse_config("[]"); });
}

TEST(Config, RejectsOutOfRangeValues) {
  expect_config_error([] { parse_config(R"({"threads": 0})"); });
  expect_config_error([] { parse_config(R"({"data": {"clips": 10, "held_out": 10}})"); });
  expect_config_error([] { parse_config(R"({"infill": {"activation": "relu6"}})"); });
  expect_config_error([] { parse_config(R"({"infill": {"contact_source": "oracle"}})"); });
  expect_config_error([] {
    parse_config(R"({"infill": {"loss": {"theta": 0, "t": 0, "v": 0, "contact": 0}}})");
  });
  expect_config_error([] { parse_config(R"({"pipeline": {"approach_frames": 3}})"); });
}

TEST(Config, EnvironmentOverrides) {
  PipelineConfig c;
  ::setenv("HOMI_SEED", "31", 1);
  ::setenv("HOMI_THREADS", "2", 1);
  apply_env_overrides(c);
  EXPECT_EQ(c.seed, 31u);
  EXPECT_EQ(c.threads, 2);
  ::setenv("HOMI_THREADS", "two", 1);
  expect_config_error([&] { apply_env_overrides(c); });
  ::unsetenv("HOMI_SEED");
  ::unsetenv("HOMI_THREADS");
}

TEST(Config, DerivedModuleConfigs) {
  PipelineConfig c = parse_config(R"({"infill": {"rank": 3, "fourier": 4}, "sampler": {"use_beta": false}})");
  const Skeleton skel = Skeleton::preset("toy9");
  const InfillSpec s = infill_spec(c, skel);
  EXPECT_EQ(s.rank, 3);
  EXPECT_EQ(s.fourier, 4);
  EXPECT_FALSE(sampler_config(c).use_beta);
  EXPECT_EQ(goal_config(c).latent, c.goal.latent);
  EXPECT_EQ(infill_train_config(c).epochs, c.infill.epochs);
}

} // namespace
} // namespace homi
