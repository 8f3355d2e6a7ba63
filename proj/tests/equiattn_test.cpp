// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <map>
#include <random>

#include "eqdit/encoding/channel_tensor.h"
#include "eqdit/equiattn/attention.h"
#include "eqdit/equiattn/harmonics.h"
#include "eqdit/equiattn/kernel.h"
#include "eqdit/error.h"
#include "eqdit/molgraph/hydrogens.h"
#include "gradcheck.h"
#include "test_support.h"

namespace eqdit {
namespace {

using testing::random_mat;
using testing::random_rotation;

constexpr double kPi = 3.14159265358979323846;

Eigen::Vector3d random_unit(std::mt19937_64 &rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  return Eigen::Vector3d(n(rng), n(rng), n(rng)).normalized();
}

Positions random_positions(int n, std::mt19937_64 &rng) {
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  Positions p(n, 3);
  for (int i = 0; i < n; ++i)
    for (int d = 0; d < 3; ++d) p(i, d) = u(rng);
  return p;
}

// Applies R to every channel of a channel-major vector feature block.
ad::Mat rotate_fibers(const ad::Mat &f, const Eigen::Matrix3d &R) {
  ad::Mat out(f.rows(), f.cols());
  for (Eigen::Index i = 0; i < f.rows(); ++i)
    for (Eigen::Index c = 0; c < f.cols() / 3; ++c)
      out.block(i, 3 * c, 1, 3) = (R * f.block(i, 3 * c, 1, 3).transpose()).transpose();
  return out;
}

// --- spherical harmonics -------------------------------------------------

TEST(SphericalHarmonic, ClosedFormValues) {
  EXPECT_NEAR(spherical_harmonic(0, 0, {0.6, 0.0, 0.8}), 1.0 / (2.0 * std::sqrt(kPi)), 1e-12);
  EXPECT_NEAR(spherical_harmonic(0, 0, {1.0, 0.0, 0.0}), 0.2820948, 1e-7);
  EXPECT_NEAR(spherical_harmonic(1, 0, {0.0, 0.0, 1.0}), std::sqrt(3.0 / (4.0 * kPi)), 1e-12);
  EXPECT_NEAR(spherical_harmonic(1, 0, {0.0, 0.0, 1.0}), 0.4886025, 1e-7);
}

TEST(SphericalHarmonic, RejectsNonUnitInput) {
  EXPECT_THROW(spherical_harmonic(1, 0, {0.0, 0.0, 2.0}), GeometryError);
  EXPECT_THROW(spherical_harmonic(3, 0, {0.0, 0.0, 1.0}), ConfigError);
  EXPECT_THROW(spherical_harmonic(1, 2, {0.0, 0.0, 1.0}), ConfigError);
}

TEST(SphericalHarmonic, MonteCarloOrthonormality) {
  std::mt19937_64 rng(11);
  const int samples = 1000000;
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(9, 9);
  Eigen::VectorXd y(9);
  for (int s = 0; s < samples; ++s) {
    Eigen::Vector3d u = random_unit(rng);
    y << spherical_harmonics(0, u), spherical_harmonics(1, u), spherical_harmonics(2, u);
    gram.noalias() += y * y.transpose();
  }
  gram *= 4.0 * kPi / samples;
  EXPECT_LT((gram - Eigen::MatrixXd::Identity(9, 9)).cwiseAbs().maxCoeff(), 1e-2);
}

TEST(SphericalHarmonic, RotationRepresentation) {
  std::mt19937_64 rng(3);
  for (int J = 0; J <= 2; ++J) {
    Eigen::Matrix3d R = random_rotation(rng);
    Eigen::MatrixXd D = harmonic_rotation(J, R);
    EXPECT_LT((D * D.transpose() - Eigen::MatrixXd::Identity(2 * J + 1, 2 * J + 1)).norm(), 1e-10);
    Eigen::Vector3d u = random_unit(rng);
    EXPECT_LT((spherical_harmonics(J, R * u) - D * spherical_harmonics(J, u)).norm(), 1e-10);
  }
}

// --- coupling tables -----------------------------------------------------

TEST(CouplingTable, OrthogonalityIdentity) {
  const auto &t = CouplingTable::instance();
  for (int l = 0; l <= 1; ++l)
    for (int k = 0; k <= 1; ++k) EXPECT_LT(t.orthogonality_error(l, k), 1e-10);
}

TEST(CouplingTable, KnownIntertwiners) {
  const auto &t = CouplingTable::instance();
  std::mt19937_64 rng(8);
  Eigen::Vector3d u = random_unit(rng);
  auto assemble = [&](int l, int k, int J) {
    Eigen::VectorXd y = spherical_harmonics(J, u);
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(fiber_dim(l), fiber_dim(k));
    for (int m = 0; m < 2 * J + 1; ++m) b += y(m) * t.q(l, k, J)[static_cast<std::size_t>(m)];
    return b;
  };
  // (1,0): proportional to u; (1,1) J=0: proportional to the identity;
  // (1,1) J=1: proportional to the cross-product matrix of u.
  Eigen::MatrixXd b10 = assemble(1, 0, 1);
  EXPECT_LT((b10.normalized() - u).norm(), 1e-10);
  Eigen::MatrixXd b110 = assemble(1, 1, 0);
  EXPECT_LT((b110 / b110(0, 0) - Eigen::MatrixXd::Identity(3, 3)).norm(), 1e-10);
  Eigen::Matrix3d cross;
  cross << 0, -u.z(), u.y(), u.z(), 0, -u.x(), -u.y(), u.x(), 0;
  Eigen::MatrixXd b111 = assemble(1, 1, 1);
  EXPECT_LT(std::min((b111.normalized() - cross.normalized()).norm(),
                     (b111.normalized() + cross.normalized()).norm()), 1e-10);
  Eigen::MatrixXd b112 = assemble(1, 1, 2);
  EXPECT_NEAR(b112.trace(), 0.0, 1e-12);
  EXPECT_LT((b112 - b112.transpose()).norm(), 1e-12);
}

// --- radial profiles -----------------------------------------------------

TEST(RadialProfile, ZeroParametersGiveZeroProfile) {
  ParameterSet ps;
  std::mt19937_64 rng(1);
  RadialProfile p = RadialProfile::create(ps, "phi", 17, 8, 3, rng);
  for (ParamId i = 0; i < ps.size(); ++i) ps.value(i).setZero();
  RadialBasis basis;
  for (double r : {0.0, 0.7, 2.5, 9.0})
    EXPECT_EQ(radial_profile(ps, p, basis, r), Eigen::VectorXd::Zero(3));
}

TEST(RadialProfile, BasisVanishesBeyondCutoff) {
  RadialBasis basis;
  EXPECT_EQ(basis.evaluate(basis.r_cut + 0.1), Eigen::VectorXd::Zero(basis.size));
  EXPECT_EQ(basis.evaluate(basis.r_cut), Eigen::VectorXd::Zero(basis.size));
  EXPECT_GT(basis.evaluate(1.0).sum(), 0.0);
}

TEST(RadialProfile, MatchesStraightLineRecomputation) {
  ParameterSet ps;
  std::mt19937_64 rng(2);
  RadialProfile p = RadialProfile::create(ps, "phi", 17, 8, 3, rng);
  for (ParamId i = 0; i < ps.size(); ++i) ps.value(i) = random_mat(ps.value(i).rows(), ps.value(i).cols(), rng);
  RadialBasis basis;
  const double r = 1.0, bond = 2.0;
  // Independent recomputation of the basis and the two-layer map.
  Eigen::VectorXd f(17);
  const double spacing = 5.0 / 15.0, cut = 0.5 * (std::cos(kPi * r / 6.0) + 1.0);
  for (int i = 0; i < 16; ++i) f(i) = std::exp(-std::pow((r - i * spacing) / spacing, 2)) * cut;
  f(16) = bond;
  Eigen::VectorXd h = ps.value(p.hidden.weight).transpose() * f + ps.value(p.hidden.bias).transpose();
  for (Eigen::Index i = 0; i < h.size(); ++i) h(i) = h(i) / (1.0 + std::exp(-h(i)));
  Eigen::VectorXd expect = ps.value(p.out.weight).transpose() * h + ps.value(p.out.bias).transpose();
  EXPECT_LT((radial_profile(ps, p, basis, r, bond) - expect).cwiseAbs().maxCoeff(), 1e-12);
}

// --- TFN kernels ---------------------------------------------------------

class KernelTest : public ::testing::Test {
 protected:
  void SetUp() override {
    for (int l = 0; l <= 1; ++l)
      for (int k = 0; k <= 1; ++k)
        kernels.push_back(TFNKernel::create(ps, "k" + std::to_string(l) + std::to_string(k), l, k,
                                            2, 3, basis.feature_size(), 8, rng));
    for (ParamId i = 0; i < ps.size(); ++i)
      ps.value(i) = random_mat(ps.value(i).rows(), ps.value(i).cols(), rng, 0.5);
  }
  std::mt19937_64 rng{21};
  ParameterSet ps;
  RadialBasis basis;
  std::vector<TFNKernel> kernels;
};

TEST_F(KernelTest, ScalarKernelIsDirectionIndependent) {
  const TFNKernel &k00 = kernels[0];
  Eigen::MatrixXd a = tfn_kernel(ps, k00, basis, {1.3, 0.0, 0.0});
  Eigen::MatrixXd b = tfn_kernel(ps, k00, basis, Eigen::Vector3d(0.3, -1.0, 0.6).normalized() * 1.3);
  EXPECT_LT((a - b).cwiseAbs().maxCoeff(), 1e-12);
}

TEST_F(KernelTest, VectorFromScalarIsAlongDisplacement) {
  const TFNKernel &k10 = kernels[2];
  Eigen::Vector3d x(0.4, -1.1, 0.7);
  Eigen::MatrixXd w = tfn_kernel(ps, k10, basis, x);
  for (int co = 0; co < 3; ++co)
    for (int ci = 0; ci < 2; ++ci) {
      Eigen::Vector3d col = w.block(co * 3, ci, 3, 1);
      EXPECT_LT(col.cross(x).norm(), 1e-12 * (1.0 + col.norm()));
    }
}

// I_channels (x) D_l(R) for channel-major fiber blocks.
Eigen::MatrixXd block_rotation(int channels, int l, const Eigen::Matrix3d &R) {
  const int d = fiber_dim(l);
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(channels * d, channels * d);
  for (int c = 0; c < channels; ++c) out.block(c * d, c * d, d, d) = fiber_rotation(l, R);
  return out;
}

TEST_F(KernelTest, EquivarianceOverRandomRotations) {
  for (const TFNKernel &k : kernels) {
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
      Eigen::Matrix3d R = random_rotation(rng);
      Eigen::Vector3d x = random_unit(rng) * std::uniform_real_distribution<double>(0.5, 4.0)(rng);
      Eigen::MatrixXd lhs = tfn_kernel(ps, k, basis, R * x, 1.0);
      Eigen::MatrixXd rhs = block_rotation(k.c_out, k.l, R) * tfn_kernel(ps, k, basis, x, 1.0) *
                            block_rotation(k.c_in, k.k, R).transpose();
      worst = std::max(worst, (lhs - rhs).norm());
    }
    EXPECT_LE(worst, 1e-6) << "l=" << k.l << " k=" << k.k;
  }
}

TEST_F(KernelTest, RejectsZeroDisplacement) {
  EXPECT_THROW(tfn_kernel(ps, kernels[1], basis, Eigen::Vector3d::Zero()), GeometryError);
}

// --- equivariant attention -----------------------------------------------

EquiAttentionConfig small_config() {
  EquiAttentionConfig c;
  c.c0_in = 3;
  c.c1_in = 2;
  c.c0_out = 2;
  c.c1_out = 2;
  c.heads = 2;
  c.key_c0 = 2;
  c.key_c1 = 2;
  c.value_c0 = 2;
  c.value_c1 = 2;
  c.radial_hidden = 8;
  return c;
}

class AttentionTest : public ::testing::Test {
 protected:
  void SetUp() override { layer = EquiAttention::create(ps, "att", small_config(), rng); }

  FiberFeature random_fibers(int n) {
    return {random_mat(n, 3, rng), random_mat(n, 6, rng)};
  }
  ad::Mat random_bonds(int n) {
    ad::Mat b = ad::Mat::Zero(n, n);
    std::uniform_int_distribution<int> o(0, 2);
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) b(i, j) = b(j, i) = o(rng);
    return b;
  }

  std::mt19937_64 rng{77};
  ParameterSet ps;
  EquiAttention layer;
};

TEST_F(AttentionTest, SingleAtomKeepsSelfTermOnly) {
  FiberFeature f = random_fibers(1);
  AttentionResult r = equi_attention(ps, layer, f, random_positions(1, rng), fully_connected(1));
  EXPECT_EQ(r.alpha.rows(), 0);
  ad::Mat expect0 = f.type0 * ps.value(*layer.self0) * ps.value(*layer.out0);
  EXPECT_LT((r.features.type0 - expect0).cwiseAbs().maxCoeff(), 1e-12);
  // Vector self term: channel mixing applied to each axis.
  Eigen::MatrixXd v = f.type1.reshaped<Eigen::RowMajor>(2, 3);
  Eigen::MatrixXd mixed = (ps.value(*layer.out1).transpose() * ps.value(*layer.self1).transpose() * v);
  EXPECT_LT((r.features.type1 - mixed.reshaped<Eigen::RowMajor>(1, 6)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST_F(AttentionTest, EqualKeysGiveUniformWeights) {
  for (int l = 0; l <= 1; ++l)
    for (int k = 0; k <= 1; ++k)
      if (layer.key[l][k]) {
        ps.value(layer.key[l][k]->profile.out.weight).setZero();
        ps.value(layer.key[l][k]->profile.out.bias).setZero();
      }
  const int n = 5;
  AttentionResult r = equi_attention(ps, layer, random_fibers(n), random_positions(n, rng),
                                     fully_connected(n), random_bonds(n));
  EXPECT_LT((r.alpha.array() - 1.0 / (n - 1)).abs().maxCoeff(), 1e-15);
}

TEST_F(AttentionTest, SoftmaxRowsSumToOne) {
  const int n = 7;
  AttentionResult r = equi_attention(ps, layer, random_fibers(n), random_positions(n, rng),
                                     fully_connected(n), random_bonds(n));
  Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(n, layer.config.heads);
  for (std::size_t e = 0; e < r.target.size(); ++e) sums.row(static_cast<Eigen::Index>(r.target[e])) += r.alpha.row(static_cast<Eigen::Index>(e));
  EXPECT_LT((sums.array() - 1.0).abs().maxCoeff(), 1e-12);
}

TEST_F(AttentionTest, EmptyNeighbourhoodUsesSelfTermOnly) {
  const int n = 4;
  FiberFeature f = random_fibers(n);
  Positions x = random_positions(n, rng);
  Neighborhoods nb = fully_connected(n);
  nb[0].clear();
  AttentionResult r = equi_attention(ps, layer, f, x, nb);
  FiberFeature alone{f.type0.topRows(1), f.type1.topRows(1)};
  AttentionResult s = equi_attention(ps, layer, alone, x.topRows(1), fully_connected(1));
  EXPECT_LT((r.features.type0.row(0) - s.features.type0.row(0)).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((r.features.type1.row(0) - s.features.type1.row(0)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST_F(AttentionTest, RigidMotionInvariance) {
  std::uniform_int_distribution<int> size(4, 9);
  std::normal_distribution<double> shift(0.0, 3.0);
  double worst_alpha = 0.0, worst0 = 0.0, worst1 = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const int n = size(rng);
    FiberFeature f = random_fibers(n);
    Positions x = random_positions(n, rng);
    ad::Mat b = random_bonds(n);
    Eigen::Matrix3d R = random_rotation(rng);
    Eigen::RowVector3d v(shift(rng), shift(rng), shift(rng));
    Positions y = (x * R.transpose()).rowwise() + v;
    FiberFeature g{f.type0, rotate_fibers(f.type1, R)};
    AttentionResult a = equi_attention(ps, layer, f, x, fully_connected(static_cast<std::size_t>(n)), b);
    AttentionResult c = equi_attention(ps, layer, g, y, fully_connected(static_cast<std::size_t>(n)), b);
    std::map<std::pair<std::size_t, std::size_t>, Eigen::Index> where;
    for (std::size_t e = 0; e < c.target.size(); ++e) where[{c.target[e], c.source[e]}] = static_cast<Eigen::Index>(e);
    for (std::size_t e = 0; e < a.target.size(); ++e) {
      Eigen::RowVectorXd pa = a.alpha.row(static_cast<Eigen::Index>(e));
      Eigen::RowVectorXd pc = c.alpha.row(where.at({a.target[e], a.source[e]}));
      worst_alpha = std::max(worst_alpha, ((pa - pc).array().abs() / pa.array().abs()).maxCoeff());
    }
    worst0 = std::max(worst0, (a.features.type0 - c.features.type0).cwiseAbs().maxCoeff());
    worst1 = std::max(worst1, (rotate_fibers(a.features.type1, R) - c.features.type1).cwiseAbs().maxCoeff());
  }
  EXPECT_LE(worst_alpha, 1e-6);
  EXPECT_LE(worst0, 1e-6);
  EXPECT_LE(worst1, 1e-6);
}

TEST_F(AttentionTest, DyadicTranslationIsExact) {
  const int n = 5;
  Positions x(n, 3);
  std::uniform_int_distribution<int> q(-64, 64);
  for (int i = 0; i < n; ++i)
    for (int d = 0; d < 3; ++d) x(i, d) = q(rng) / 32.0;
  Positions y = x.rowwise() + Eigen::RowVector3d(0.5, -1.25, 3.0);
  FiberFeature f = random_fibers(n);
  AttentionResult a = equi_attention(ps, layer, f, x, fully_connected(n));
  AttentionResult b = equi_attention(ps, layer, f, y, fully_connected(n));
  EXPECT_EQ(a.alpha, b.alpha);
  EXPECT_EQ(a.features.type0, b.features.type0);
  EXPECT_EQ(a.features.type1, b.features.type1);
}

TEST_F(AttentionTest, PermutationEquivarianceIsExact) {
  const int n = 6;
  FiberFeature f = random_fibers(n);
  Positions x = random_positions(n, rng);
  ad::Mat b = random_bonds(n);
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  FiberFeature g{ad::Mat(n, 3), ad::Mat(n, 6)};
  Positions y(n, 3);
  ad::Mat c(n, n);
  for (int i = 0; i < n; ++i) {
    g.type0.row(i) = f.type0.row(perm[i]);
    g.type1.row(i) = f.type1.row(perm[i]);
    y.row(i) = x.row(perm[i]);
    for (int j = 0; j < n; ++j) c(i, j) = b(perm[i], perm[j]);
  }
  AttentionResult ra = equi_attention(ps, layer, f, x, fully_connected(n), b);
  AttentionResult rb = equi_attention(ps, layer, g, y, fully_connected(n), c);
  for (int i = 0; i < n; ++i) {
    EXPECT_EQ(rb.features.type0.row(i), ra.features.type0.row(perm[i]));
    EXPECT_EQ(rb.features.type1.row(i), ra.features.type1.row(perm[i]));
  }
}

TEST_F(AttentionTest, CoincidentNeighboursAreRejected) {
  Positions x = random_positions(3, rng);
  x.row(2) = x.row(0);
  EXPECT_THROW(equi_attention(ps, layer, random_fibers(3), x, fully_connected(3)), GeometryError);
}

TEST_F(AttentionTest, ParameterGradientsMatchFiniteDifferences) {
  const int n = 4;
  FiberFeature f = random_fibers(n);
  PointCloud cloud{random_positions(n, rng), random_bonds(n), {}};
  AttentionGraph g = build_attention_graph({cloud}, layer.config.basis);
  ad::Mat w0 = random_mat(n, 2, rng), w1 = random_mat(n, 6, rng);
  auto loss = [&](ad::Tape &tape, ParamBinding &pb) {
    AttentionVars v = equi_attention(pb, layer, g, tape.constant(f.type0), tape.constant(f.type1));
    return ad::add(ad::weighted_sum(v.type0, w0), ad::weighted_sum(v.type1, w1));
  };
  auto r = testing::param_gradient_check(ps, loss);
  EXPECT_LE(r.max_rel_error, 1e-3) << "abs " << r.max_abs_error;
}

// --- preprocessing of channel tensors --------------------------------------

class PreprocessTest : public ::testing::Test {
 protected:
  void SetUp() override {
    mols = testing::load_corpus("corpus200.sdf");
    layer = EquiAttention::create(ps, "pre", preprocess_config(9), rng);
  }
  ChannelTensor encode(const Molecule &m) {
    return encode_molecule(strip_hydrogens(m), 9, default_vocabulary());
  }
  std::mt19937_64 rng{5};
  ParameterSet ps;
  EquiAttention layer;
  std::vector<Molecule> mols;
};

TEST_F(PreprocessTest, ZeroWeightsClearPositionChannel) {
  for (ParamId i = 0; i < ps.size(); ++i) ps.value(i).setZero();
  ChannelTensor t = encode(mols[3]);
  ChannelTensor out = attention_preprocess(ps, layer, t);
  EXPECT_EQ(out.channels[0], Grid::Zero(9, 9));
  EXPECT_EQ(out.channels[1], t.channels[1]);
  EXPECT_EQ(out.channels[2], t.channels[2]);
}

TEST_F(PreprocessTest, ResidualWithZeroWeightsIsIdentity) {
  for (ParamId i = 0; i < ps.size(); ++i) ps.value(i).setZero();
  ChannelTensor t = encode(mols[7]);
  EXPECT_EQ(attention_preprocess(ps, layer, t, true), t);
}

TEST_F(PreprocessTest, OutputVectorsRotateWithInput) {
  for (int trial = 0; trial < 10; ++trial) {
    const Molecule &m = mols[static_cast<std::size_t>(trial * 13)];
    Eigen::Matrix3d R = random_rotation(rng);
    ChannelTensor a = attention_preprocess(ps, layer, encode(m));
    ChannelTensor b = attention_preprocess(ps, layer, encode(testing::transformed(m, R, Eigen::Vector3d(1, 2, 3))));
    const auto n = static_cast<Eigen::Index>(a.n_atoms);
    Eigen::MatrixXd va = a.channels[0].topLeftCorner(n, 3), vb = b.channels[0].topLeftCorner(n, 3);
    EXPECT_LT((va * R.transpose() - vb).cwiseAbs().maxCoeff(), 1e-6);
  }
}

TEST_F(PreprocessTest, BatchedVectorsMatchSingleRuns) {
  std::vector<ChannelTensor> ts;
  for (int i = 0; i < 5; ++i) ts.push_back(encode(mols[static_cast<std::size_t>(i)]));
  std::vector<const ChannelTensor *> batch;
  for (const auto &t : ts) batch.push_back(&t);
  ad::Tape tape;
  ParamBinding pb(tape, ps);
  ad::Mat all = attention_vectors(pb, layer, batch).value();
  Eigen::Index at = 0;
  for (const auto &t : ts) {
    const auto n = static_cast<Eigen::Index>(t.n_atoms);
    Grid single = attention_preprocess(ps, layer, t).channels[0].topLeftCorner(n, 3);
    EXPECT_LT((all.middleRows(at, n) - single).cwiseAbs().maxCoeff(), 1e-12);
    at += n;
  }
}

}  // namespace
}  // namespace eqdit
