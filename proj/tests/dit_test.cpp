// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>

#include "eqdit/diffusion/diffusion.h"
#include "eqdit/dit/model.h"
#include "eqdit/encoding/channel_tensor.h"
#include "eqdit/error.h"
#include "eqdit/molgraph/hydrogens.h"
#include "gradcheck.h"
#include "test_support.h"

namespace eqdit {
namespace {

using ad::Mat;
using testing::random_mat;

void randomize(ParameterSet &ps, std::mt19937_64 &rng, double scale) {
  for (ParamId i = 0; i < ps.size(); ++i)
    ps.value(i) = random_mat(ps.value(i).rows(), ps.value(i).cols(), rng, scale);
}

// --- sinusoidal encoding -------------------------------------------------

TEST(SinusoidalEncoding, OriginAlternatesZeroOne) {
  Eigen::VectorXd e = sinusoidal_encoding(0, 8);
  for (int i = 0; i < 8; ++i) EXPECT_EQ(e(i), i % 2 == 0 ? 0.0 : 1.0);
}

TEST(SinusoidalEncoding, SmallCaseByHand) {
  Eigen::VectorXd e = sinusoidal_encoding(1, 2);
  EXPECT_NEAR(e(0), 0.84147, 1e-5);
  EXPECT_NEAR(e(1), 0.54030, 1e-5);
}

TEST(SinusoidalEncoding, InjectiveOverStepRange) {
  std::vector<Eigen::VectorXd> codes;
  for (int k = 0; k < 1000; ++k) codes.push_back(sinusoidal_encoding(k, 256));
  double closest = 1e9;
  for (std::size_t a = 0; a < codes.size(); ++a)
    for (std::size_t b = a + 1; b < codes.size(); ++b)
      closest = std::min(closest, (codes[a] - codes[b]).norm());
  EXPECT_GT(closest, 1e-3);
}

TEST(SinusoidalEncoding, OddDimensionIsRejected) {
  EXPECT_THROW(sinusoidal_encoding(3, 7), ConfigError);
}

// --- scaled dot-product attention ----------------------------------------

TEST(ScaledDotAttention, IdenticalKeysAverageValues) {
  std::mt19937_64 rng(1);
  Mat Q = random_mat(3, 4, rng), V = random_mat(5, 2, rng);
  Mat K = random_mat(1, 4, rng).replicate(5, 1);
  Mat out = scaled_dot_attention(Q, K, V);
  for (Eigen::Index r = 0; r < 3; ++r)
    EXPECT_LT((out.row(r) - V.colwise().mean()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(ScaledDotAttention, SingleTokenReturnsItsValue) {
  std::mt19937_64 rng(2);
  Mat Q = random_mat(1, 4, rng), K = random_mat(1, 4, rng), V = random_mat(1, 3, rng);
  EXPECT_LT((scaled_dot_attention(Q, K, V) - V).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(ScaledDotAttention, MatchesNaiveReference) {
  std::mt19937_64 rng(3);
  Mat Q = random_mat(3, 4, rng), K = random_mat(3, 4, rng), V = random_mat(3, 5, rng);
  Mat ref = Mat::Zero(3, 5);
  for (int i = 0; i < 3; ++i) {
    double w[3], z = 0.0;
    for (int j = 0; j < 3; ++j) {
      double dot = 0.0;
      for (int c = 0; c < 4; ++c) dot += Q(i, c) * K(j, c);
      w[j] = std::exp(dot / 2.0);
      z += w[j];
    }
    for (int j = 0; j < 3; ++j)
      for (int c = 0; c < 5; ++c) ref(i, c) += w[j] / z * V(j, c);
  }
  EXPECT_LT((scaled_dot_attention(Q, K, V) - ref).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(ScaledDotAttention, FusedMultiheadMatchesPerHead) {
  std::mt19937_64 rng(4);
  const int T = 9, d = 8, heads = 2, dh = 4;
  Mat qkv = random_mat(2 * T, 3 * d, rng);
  ad::Tape tape;
  Mat fused = ad::multihead_attention(tape.constant(qkv), T, heads).value();
  for (int g = 0; g < 2; ++g)
    for (int h = 0; h < heads; ++h) {
      Mat ref = scaled_dot_attention(qkv.block(g * T, h * dh, T, dh),
                                     qkv.block(g * T, d + h * dh, T, dh),
                                     qkv.block(g * T, 2 * d + h * dh, T, dh));
      EXPECT_LT((fused.block(g * T, h * dh, T, dh) - ref).cwiseAbs().maxCoeff(), 1e-12);
    }
}

// --- adaLN-Zero block ----------------------------------------------------

class BlockTest : public ::testing::Test {
 protected:
  void SetUp() override { block = AdaLNBlock::create(ps, "b", d, 4, rng); }

  Mat run(const Mat &x, const Mat &cond) {
    ad::Tape tape;
    ParamBinding pb(tape, ps);
    return adaln_zero_block(pb, block, tape.constant(x), ad::silu(tape.constant(cond)),
                            group, tokens, 2)
        .value();
  }

  const int d = 8, tokens = 2;
  std::vector<std::size_t> group{0, 0};
  std::mt19937_64 rng{12};
  ParameterSet ps;
  AdaLNBlock block;
};

TEST_F(BlockTest, FreshBlockIsIdentity) {
  Mat x = random_mat(tokens, d, rng);
  EXPECT_EQ(run(x, random_mat(1, d, rng)), x);
}

TEST_F(BlockTest, ConditioningIsLiveAfterOneStep) {
  Mat x = random_mat(tokens, d, rng);
  Mat c1 = random_mat(1, d, rng), c2 = random_mat(1, d, rng);
  Mat target = random_mat(tokens, d, rng);
  Gradients g = ps.zero_like();
  {
    ad::Tape tape;
    ParamBinding pb(tape, ps, &g);
    ad::Var y = adaln_zero_block(pb, block, tape.constant(x), ad::silu(tape.constant(c1)),
                                 group, tokens, 2);
    tape.backward(ad::weighted_sum(y, target));
  }
  Adam adam(ps, {});
  adam.step(ps, g);
  Mat y1 = run(x, c1), y2 = run(x, c2);
  EXPECT_NE(y1, x);
  EXPECT_GT((y1 - y2).cwiseAbs().maxCoeff(), 1e-6);
}

TEST_F(BlockTest, GradientsMatchFiniteDifferences) {
  randomize(ps, rng, 0.5);
  Mat x = random_mat(tokens, d, rng), c = random_mat(1, d, rng), w = random_mat(tokens, d, rng);
  auto loss = [&](ad::Tape &tape, ParamBinding &pb) {
    ad::Var y = adaln_zero_block(pb, block, tape.constant(x), ad::silu(tape.constant(c)), group,
                                 tokens, 2);
    return ad::weighted_sum(y, w);
  };
  auto r = testing::param_gradient_check(ps, loss);
  EXPECT_LE(r.max_rel_error, 1e-3) << "abs " << r.max_abs_error;
}

// --- full model ------------------------------------------------------------

class ModelTest : public ::testing::Test {
 protected:
  void SetUp() override {
    mols = testing::load_corpus("corpus200.sdf");
    config.hidden = 32;
    config.depth = 2;
    config.heads = 4;
    config.classes = 2;
    config.time_dim = 16;
    model = DiTModel::create(ps, config, preprocess_config(9), false, rng);
  }
  ChannelTensor encode(std::size_t i) {
    return encode_molecule(strip_hydrogens(mols[i]), 9, default_vocabulary());
  }

  std::mt19937_64 rng{31};
  ParameterSet ps;
  DiTConfig config;
  DiTModel model;
  std::vector<Molecule> mols;
};

TEST_F(ModelTest, ZeroDecodeGivesZeroOutputs) {
  auto [eps, var] = dit_forward(ps, model, encode(0), 10, 1);
  for (int c = 0; c < kChannels; ++c) {
    EXPECT_EQ(eps.channels[c], Grid::Zero(9, 9));
    EXPECT_EQ(var.channels[c], Grid::Zero(9, 9));
  }
}

TEST_F(ModelTest, OutputShapesFollowTheGrid) {
  randomize(ps, rng, 0.1);
  for (std::size_t i : {1u, 2u, 3u}) {
    auto [eps, var] = dit_forward(ps, model, encode(i), 3, std::nullopt);
    for (int c = 0; c < kChannels; ++c) {
      EXPECT_EQ(eps.channels[c].rows(), 9);
      EXPECT_EQ(eps.channels[c].cols(), 9);
      EXPECT_EQ(var.channels[c].rows(), 9);
      EXPECT_EQ(var.channels[c].cols(), 9);
    }
  }
}

TEST_F(ModelTest, BlockStackIsIdentityAtInitialization) {
  ChannelTensor a = encode(4), b = encode(5);
  ad::Tape tape;
  ParamBinding pb(tape, ps);
  ForwardTrace trace;
  dit_forward(pb, model, {&a, &b}, {0, 7}, {0, -1}, &trace);
  EXPECT_EQ(trace.tokens_in, trace.tokens_out);
}

TEST_F(ModelTest, ForwardIsDeterministic) {
  randomize(ps, rng, 0.1);
  ChannelTensor t = encode(6);
  auto first = dit_forward(ps, model, t, 5, 0);
  auto second = dit_forward(ps, model, t, 5, 0);
  EXPECT_EQ(first.first, second.first);
  EXPECT_EQ(first.second, second.second);
}

TEST_F(ModelTest, UninformativeEntriesAreZero) {
  randomize(ps, rng, 0.1);
  for (std::size_t i = 0; i < 20; ++i) {
    ChannelTensor t = encode(i);
    auto [eps, var] = dit_forward(ps, model, t, static_cast<int>(i), std::nullopt);
    const auto info = information_mask(t.n_atoms, 9, 4);
    const auto n = static_cast<Eigen::Index>(t.n_atoms);
    for (int c = 0; c < kChannels; ++c) {
      EXPECT_EQ(eps.channels[c].bottomRows(9 - n), Grid::Zero(9 - n, 9));
      EXPECT_EQ(var.channels[c].bottomRows(9 - n), Grid::Zero(9 - n, 9));
      EXPECT_EQ(eps.channels[c].cwiseProduct(info[c]), eps.channels[c]);
    }
  }
}

TEST_F(ModelTest, LabelsAreValidated) {
  EXPECT_THROW(dit_forward(ps, model, encode(0), 1, 5), ConfigError);
}

TEST(ModelConfig, RejectsInconsistentSettings) {
  DiTConfig c;
  c.patch = 4;
  EXPECT_THROW(c.validate(), ConfigError);
  c = DiTConfig{};
  c.heads = 3;
  EXPECT_THROW(c.validate(), ConfigError);
  c = DiTConfig{};
  c.vocab = 12;
  EXPECT_THROW(c.validate(), ConfigError);
}

// End-to-end gradient of the training loss on a micro configuration.
TEST(ModelGradient, EndToEndMicroConfiguration) {
  std::mt19937_64 rng(41);
  DiTConfig config;
  config.side = 6;
  config.patch = 3;
  config.hidden = 16;
  config.depth = 1;
  config.heads = 2;
  config.time_dim = 8;
  config.classes = 2;
  EquiAttentionConfig ac = preprocess_config(6);
  ac.radial_hidden = 4;
  ac.heads = 2;
  ParameterSet ps;
  DiTModel model = DiTModel::create(ps, config, ac, false, rng);
  randomize(ps, rng, 0.3);

  const auto mols = testing::load_corpus("overfit16.sdf");
  const DiffusionSchedule s = make_schedule(ScheduleKind::kLinear, 10, 1e-3, 0.2);
  TrainBatch batch;
  std::vector<ChannelTensor> xt;
  std::vector<int> steps;
  const int B = 3;
  batch.x0.resize(B, 108);
  batch.xt.resize(B, 108);
  batch.eps.resize(B, 108);
  batch.mask.resize(B, 108);
  const int times[B] = {1, 4, 10};
  std::size_t used = 0;
  for (const Molecule &m : mols) {
    Molecule h = strip_hydrogens(m);
    if (h.size() > 6 || h.size() < 3) continue;
    ChannelTensor t = encode_molecule(h, 6, default_vocabulary());
    const auto b = static_cast<Eigen::Index>(used);
    batch.x0.row(b) = flatten(t);
    batch.mask.row(b) = flat_mask(t.n_atoms, 6, 4);
    batch.eps.row(b) = masked_noise(t.n_atoms, 6, 4, rng);
    batch.t.push_back(times[used]);
    batch.xt.row(b) = q_sample(batch.x0.row(b), times[used], batch.eps.row(b), s);
    xt.push_back(unflatten(batch.xt.row(b), 6, t.n_atoms));
    steps.push_back(times[used] - 1);
    batch.labels.push_back(static_cast<int>(used) % 2);
    if (++used == B) break;
  }
  ASSERT_EQ(used, static_cast<std::size_t>(B));
  std::vector<const ChannelTensor *> ptrs;
  for (const auto &t : xt) ptrs.push_back(&t);

  Mat frozen;
  {
    ad::Tape tape;
    ParamBinding pb(tape, ps);
    frozen = dit_forward(pb, model, ptrs, steps, batch.labels).eps.value();
  }
  HybridLossOptions options;
  options.frozen_eps = &frozen;
  options.bin_width = 0.5;
  auto loss = [&](ad::Tape &, ParamBinding &pb) {
    return hybrid_loss(dit_forward(pb, model, ptrs, steps, batch.labels), batch, s, options).total;
  };
  auto r = testing::param_gradient_check(ps, loss, 1e-5, 1e-6, 12);
  EXPECT_LE(r.max_rel_error, 1e-3) << "abs " << r.max_abs_error;
}

}  // namespace
}  // namespace eqdit
