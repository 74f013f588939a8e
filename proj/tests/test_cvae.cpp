#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include <homi/cvae.h>
#include <homi/error.h>
#include <homi/metrics.h>
#include <homi/pipeline.h>
#include <homi/synth.h>

#include "support.h"

namespace homi {
namespace {

CvaeSpec small_spec() {
  CvaeSpec spec;
  spec.x_dim = 3;
  spec.cond_dim = 2;
  spec.out_dim = 3;
  spec.latent = 4;
  spec.hidden = 16;
  spec.seed = 12;
  return spec;
}

TEST(KlLoss, ClosedFormExamples) {
  EXPECT_EQ(kl_loss(Eigen::VectorXd::Zero(16), Eigen::VectorXd::Ones(16)), 0.0);
  Eigen::VectorXd mu = Eigen::VectorXd::Zero(16);
  mu[0] = 1.0;
  EXPECT_DOUBLE_EQ(kl_loss(mu, Eigen::VectorXd::Ones(16)), 0.5);
  // sigma = e: 0.5 * (e^2 - 1 - 2).
  const double e = std::numbers::e;
  EXPECT_NEAR(kl_loss(Eigen::VectorXd::Zero(1), Eigen::VectorXd::Constant(1, e)), 0.5 * (e * e - 3.0), 1e-14);
}

TEST(KlLoss, NonNegative) {
  Rng rng = make_rng(4);
  for (int i = 0; i < 1000; ++i) {
    Eigen::VectorXd mu(8);
    Eigen::VectorXd sigma(8);
    for (int k = 0; k < 8; ++k) {
      mu[k] = normal(rng);
      sigma[k] = std::exp(uniform(rng, -3, 3));
    }
    EXPECT_GE(kl_loss(mu, sigma), 0.0);
  }
}

TEST(KlLoss, MatchesMonteCarloEstimate) {
  Rng rng = make_rng(5);
  Eigen::VectorXd mu(3);
  Eigen::VectorXd sigma(3);
  mu << 0.5, -1.0, 0.2;
  sigma << 0.7, 1.3, 0.4;
  // E_q[log q(z) - log p(z)] with z ~ q.
  const int n = 1000000;
  double sum = 0.0;
  for (int s = 0; s < n; ++s) {
    double term = 0.0;
    for (int k = 0; k < 3; ++k) {
      const double eps = normal(rng);
      const double z = mu[k] + sigma[k] * eps;
      term += -std::log(sigma[k]) - 0.5 * eps * eps + 0.5 * z * z;
    }
    sum += term;
  }
  EXPECT_NEAR(sum / n, kl_loss(mu, sigma), 1e-2);
}

TEST(Cvae, EncodeDeterministicModeReturnsMean) {
  const Cvae net(small_spec());
  const Eigen::VectorXd x = Eigen::Vector3d(0.1, -0.2, 0.3);
  const Eigen::VectorXd c = Eigen::Vector2d(1.0, 0.0);
  const LatentSample s = net.encode(x, c, nullptr);
  EXPECT_EQ(s.z, s.mu);
  EXPECT_TRUE((s.sigma.array() > 0).all());
}

TEST(Cvae, EncodeIsReproducibleForASeed) {
  const Cvae net(small_spec());
  const Eigen::VectorXd x = Eigen::Vector3d(0.1, -0.2, 0.3);
  const Eigen::VectorXd c = Eigen::Vector2d(1.0, 0.0);
  Rng a = make_rng(9);
  Rng b = make_rng(9);
  EXPECT_EQ(net.encode(x, c, &a).z, net.encode(x, c, &b).z);
}

TEST(Cvae, EncodeRejectsWrongShapes) {
  const Cvae net(small_spec());
  try {
    net.encode(Eigen::VectorXd::Zero(4), Eigen::VectorXd::Zero(2), nullptr);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kShapeMismatch);
  }
}

TEST(Cvae, ReparameterisationStatistics) {
  const Cvae net(small_spec());
  const Eigen::VectorXd x = Eigen::Vector3d(0.4, 0.1, -0.3);
  const Eigen::VectorXd c = Eigen::Vector2d(0.0, 1.0);
  Rng rng = make_rng(6);
  const int n = 100000;
  const LatentSample ref = net.encode(x, c, nullptr);
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(ref.mu.size());
  for (int s = 0; s < n; ++s) {
    mean += net.encode(x, c, &rng).z;
  }
  mean /= n;
  for (int k = 0; k < mean.size(); ++k) {
    EXPECT_LT(std::abs(mean[k] - ref.mu[k]), 3.0 * ref.sigma[k] / std::sqrt(static_cast<double>(n))) << k;
  }
}

// Sampler data following the generator rule, with small noise.
std::vector<SamplerExample> rule_examples(int count, std::uint64_t seed) {
  Rng rng = make_rng(seed);
  std::vector<SamplerExample> out;
  for (int i = 0; i < count; ++i) {
    SamplerExample ex;
    ex.task.task = i % 3;
    for (int k = 0; k < kBetaSize; ++k) {
      ex.task.beta[k] = uniform(rng, -1, 1);
    }
    ex.task.t_init = Vec3(uniform(rng, 0.3, 0.6), uniform(rng, -0.3, 0.3), uniform(rng, 0.7, 1.0));
    ex.task.r_init = Rotation6D(matrix_to_rot6d(test::rot_z(uniform(rng, -1, 1))));
    ex.offset = offset_rule(ex.task.task, ex.task.beta);
    ex.offset.t_off += 0.01 * Vec3(normal(rng), normal(rng), normal(rng));
    out.push_back(ex);
  }
  return out;
}

SamplerConfig quick_sampler(bool use_beta) {
  SamplerConfig cfg;
  cfg.hidden = 64;
  cfg.use_beta = use_beta;
  cfg.train.epochs = 60;
  cfg.train.batch = 32;
  cfg.train.seed = 3;
  return cfg;
}

TEST(Sampler, LatentSizeAndConditioning) {
  const std::vector<SamplerExample> data = rule_examples(60, 1);
  const ObjectSampler s = sampler_train(data, quick_sampler(true));
  EXPECT_EQ(s.net().spec().latent, 16);
  EXPECT_EQ(s.net().spec().cond_dim, ObjectSampler::condition_dim(3));
  EXPECT_EQ(s.net().spec().out_dim, ObjectSampler::kOutputDim);
}

TEST(Sampler, KlStaysNonNegativeAndTrainingIsSeeded) {
  const std::vector<SamplerExample> data = rule_examples(90, 2);
  CvaeTrainCurve ca;
  CvaeTrainCurve cb;
  const ObjectSampler a = sampler_train(data, quick_sampler(true), &ca);
  const ObjectSampler b = sampler_train(data, quick_sampler(true), &cb);
  EXPECT_EQ(a.net().parameters(), b.net().parameters());
  EXPECT_EQ(ca.reconstruction, cb.reconstruction);
  for (double kl : ca.kl) {
    EXPECT_GE(kl, 0.0);
  }
  EXPECT_LT(ca.reconstruction.back(), ca.reconstruction.front());
}

TEST(Sampler, SamplesAreDiverseAndValid) {
  const std::vector<SamplerExample> data = rule_examples(90, 3);
  const ObjectSampler s = sampler_train(data, quick_sampler(true));
  Rng rng = make_rng(8);
  std::vector<Eigen::VectorXd> t;
  for (int i = 0; i < 100; ++i) {
    const ObjectOffset o = sampler_sample(s, data[0].task, rng);
    EXPECT_TRUE(is_rotation(rot6d_to_matrix(o.r_off), 1e-9));
    t.emplace_back(o.t_off);
  }
  EXPECT_GT(apd(t), 0.0);
}

TEST(Sampler, BodyShapeMovesTheMean) {
  const std::vector<SamplerExample> data = rule_examples(300, 4);
  SamplerConfig cfg = quick_sampler(true);
  cfg.train.epochs = 150;
  const ObjectSampler s = sampler_train(data, cfg);
  TaskSpec small = data[0].task;
  small.task = 0;
  small.beta.setZero();
  small.beta[0] = -0.8;
  TaskSpec tall = small;
  tall.beta[0] = 0.8;
  // Rule: lift height 0.3 + 0.2 b0.
  const double lo = s.mean(small).t_off.z();
  const double hi = s.mean(tall).t_off.z();
  EXPECT_GT(hi - lo, 0.15);
  EXPECT_NEAR(lo, offset_rule(0, small.beta).t_off.z(), 0.05);
  EXPECT_NEAR(hi, offset_rule(0, tall.beta).t_off.z(), 0.05);
}

TEST(Sampler, BetaBlindVariantIgnoresShape) {
  const std::vector<SamplerExample> data = rule_examples(60, 5);
  const ObjectSampler s = sampler_train(data, quick_sampler(false));
  TaskSpec a = data[0].task;
  TaskSpec b = a;
  b.beta = -a.beta;
  EXPECT_EQ(s.mean(a).t_off, s.mean(b).t_off);
}

TEST(Sampler, RejectsSingleTaskData) {
  std::vector<SamplerExample> data = rule_examples(30, 6);
  for (SamplerExample& ex : data) {
    ex.task.task = 1;
  }
  EXPECT_THROW(sampler_train(data, quick_sampler(true)), Error);
}

class GoalNetTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    skel_ = new Skeleton(Skeleton::preset("toy9"));
    basis_ = new BasisPointSet(sample_basis(0));
    clips_ = new std::vector<LabeledClip>(gen_dataset(*skel_, 9, 40));
    records_ = new std::vector<GoalNetInput>(goal_examples(*skel_, *clips_, *basis_));
  }
  static void TearDownTestSuite() {
    delete records_;
    delete clips_;
    delete basis_;
    delete skel_;
  }

  static Skeleton* skel_;
  static BasisPointSet* basis_;
  static std::vector<LabeledClip>* clips_;
  static std::vector<GoalNetInput>* records_;
};

Skeleton* GoalNetTest::skel_ = nullptr;
BasisPointSet* GoalNetTest::basis_ = nullptr;
std::vector<LabeledClip>* GoalNetTest::clips_ = nullptr;
std::vector<GoalNetInput>* GoalNetTest::records_ = nullptr;

TEST_F(GoalNetTest, ShapeContracts) {
  const GoalNetInput& in = records_->front();
  EXPECT_NO_THROW(in.validate(9));
  EXPECT_EQ(in.v.cols(), kBodySampleCount);
  EXPECT_EQ(in.b_o.size(), kBasisSize);
  const GoalNet net(CvaeSpec{GoalNet::input_dim(9), GoalNet::condition_dim(3), GoalNet::output_dim(9), 16, 32}, 9, 3);
  EXPECT_EQ(net.encoder_input(in).size(), GoalNet::input_dim(9));
  EXPECT_EQ(net.condition(in.beta, in.b_o, in.t_o, in.a).size(), GoalNet::condition_dim(3));
  EXPECT_EQ(net.target(in).size(), GoalNet::output_dim(9));
  const GoalNetOutput out = net.reconstruct(in);
  EXPECT_EQ(out.d_r_to_o_hat.cols(), kRightHandSampleCount);
  EXPECT_NEAR(out.h_hat.norm(), 1.0, 1e-12);
}

TEST_F(GoalNetTest, OverfitsTenGraspFrames) {
  const std::vector<GoalNetInput> ten(records_->begin(), records_->begin() + 10);
  GoalConfig cfg;
  cfg.hidden = 128;
  cfg.train.epochs = 1500;
  cfg.train.batch = 10;
  cfg.train.seed = 2;
  CvaeTrainCurve curve;
  const GoalNet net = goal_train(ten, cfg, &curve);
  for (double kl : curve.kl) {
    ASSERT_GE(kl, 0.0);
  }
  double worst = 0.0;
  for (const GoalNetInput& in : ten) {
    const GoalNetOutput out = net.reconstruct(in);
    Eigen::VectorXd gt(6 * 9 + 3);
    gt << in.theta, in.t;
    const auto a = markers(*skel_, out.frame().head(54), out.t_hat);
    const auto b = markers(*skel_, gt.head(54), in.t);
    double err = 0.0;
    int count = 0;
    for (size_t m = 0; m < a.size(); ++m) {
      if (a[m].tag == MarkerTag::kGeneric) {
        err += (a[m].position - b[m].position).norm();
        ++count;
      }
    }
    worst = std::max(worst, err / count);
  }
  EXPECT_LT(worst, 0.01);
}

TEST_F(GoalNetTest, SampledPosesAreValidAndNearTheObject) {
  GoalConfig cfg;
  cfg.hidden = 128;
  cfg.train.epochs = 300;
  cfg.train.seed = 4;
  const GoalNet net = goal_train(*records_, cfg);
  Rng rng = make_rng(3);
  auto tip_distance = [&](const Eigen::VectorXd& theta, const Vec3& root, const Vec3& t_o) {
    double sum = 0.0;
    for (const TaggedPoint& m : markers(*skel_, theta, root)) {
      if (m.tag >= MarkerTag::kTip1 && m.tag <= MarkerTag::kTip5) {
        sum += (m.position - t_o).norm();
      }
    }
    return sum / 5.0;
  };
  std::vector<double> ratios;
  size_t record = 0;
  for (const LabeledClip& clip : *clips_) {
    if (!clip.has_object) {
      continue;
    }
    const GoalNetInput& rec = (*records_)[record];
    record += 2;
    const double radius = clip.scenario.object.bounding_radius();
    std::vector<double> d;
    for (int i = 0; i < 20; ++i) {
      const GoalNetOutput out = goal_sample(net, rec.beta, rec.b_o, rec.t_o, rec.a, rng);
      d.push_back(tip_distance(out.theta_hat, out.t_hat, rec.t_o));
    }
    std::nth_element(d.begin(), d.begin() + 10, d.end());
    ratios.push_back(d[10] / (2 * radius));
  }
  // Typical sampled fingertips sit within twice the object's bounding radius.
  ASSERT_GE(ratios.size(), 3u);
  std::nth_element(ratios.begin(), ratios.begin() + ratios.size() / 2, ratios.end());
  EXPECT_LT(ratios[ratios.size() / 2], 1.0);

  const GoalNetInput& in = records_->front();
  std::vector<Eigen::VectorXd> thetas;
  for (int i = 0; i < 20; ++i) {
    const GoalNetOutput out = goal_sample(net, in.beta, in.b_o, in.t_o, in.a, rng);
    for (int j = 0; j < 9; ++j) {
      EXPECT_NO_THROW(rot6d_to_matrix(Vec6(out.theta_hat.segment<6>(6 * j))));
    }
    thetas.push_back(out.theta_hat);
  }
  EXPECT_GT(apd(thetas), 0.0);

  // Moving the object pulls the decoded root along with it.
  const Vec3 shift(0.25, 0.0, 0.0);
  const Eigen::VectorXd z = Eigen::VectorXd::Zero(16);
  const GoalNetOutput near = net.decode(z, net.condition(in.beta, in.b_o, in.t_o, in.a));
  const GoalNetOutput far = net.decode(z, net.condition(in.beta, in.b_o, in.t_o + shift, in.a));
  EXPECT_GT((far.t_hat - near.t_hat).dot(shift.normalized()), 0.0);
}

} // namespace
} // namespace homi
