// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <random>

#include "eqdit/autodiff/ops.h"
#include "eqdit/error.h"
#include "gradcheck.h"

namespace eqdit {
namespace {

using ad::Mat;
using ad::Var;
using testing::gradient_check;
using testing::random_mat;

// Projects an output onto a fixed random direction so every entry matters.
Var project(const Var &v, unsigned seed = 99) {
  std::mt19937_64 rng(seed);
  return ad::weighted_sum(v, random_mat(v.rows(), v.cols(), rng));
}

void expect_grad_ok(const testing::ScalarFn &f, std::vector<Mat> inputs) {
  auto r = gradient_check(f, std::move(inputs), 1e-5, 1e-3);
  EXPECT_LT(r.max_rel_error, 1e-6) << "abs " << r.max_abs_error;
}

class OpGradient : public ::testing::Test {
 protected:
  std::mt19937_64 rng{1234};
};

TEST_F(OpGradient, MatmulAndTranspose) {
  expect_grad_ok([](ad::Tape &, const std::vector<Var> &x) {
    return project(ad::transpose(ad::matmul(x[0], x[1])));
  }, {random_mat(3, 4, rng), random_mat(4, 2, rng)});
}

TEST_F(OpGradient, RowwiseMatmul) {
  expect_grad_ok([](ad::Tape &, const std::vector<Var> &x) {
    return project(ad::matmul_rowwise(x[0], x[1]));
  }, {random_mat(5, 20, rng), random_mat(20, 3, rng)});
}

TEST(RowwiseMatmul, RowsIndependentOfPosition) {
  std::mt19937_64 rng(9);
  Mat a = random_mat(31, 24, rng), b = random_mat(24, 12, rng);
  ad::Tape tape;
  Mat full = ad::matmul_rowwise(tape.constant(a), tape.constant(b)).value();
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    Mat one = ad::matmul_rowwise(tape.constant(Mat(a.row(i))), tape.constant(b)).value();
    EXPECT_EQ(Mat(full.row(i)), one);
  }
  EXPECT_LT((full - a * b).cwiseAbs().maxCoeff(), 1e-12);
}

TEST_F(OpGradient, ElementwiseBinary) {
  Mat b = random_mat(3, 3, rng).array().abs() + 0.5;
  expect_grad_ok([](ad::Tape &, const std::vector<Var> &x) {
    Var s = ad::add(ad::sub(x[0], x[1]), ad::mul(x[0], x[1]));
    return project(ad::add(s, ad::div(x[0], x[1])));
  }, {random_mat(3, 3, rng), b});
}

TEST_F(OpGradient, RowBroadcasts) {
  expect_grad_ok([](ad::Tape &, const std::vector<Var> &x) {
    return project(ad::mul_row(ad::add_row(x[0], x[1]), x[2]));
  }, {random_mat(4, 3, rng), random_mat(1, 3, rng), random_mat(1, 3, rng)});
}

TEST_F(OpGradient, ScalarAndConstantOps) {
  Mat c = random_mat(2, 5, rng);
  expect_grad_ok([c](ad::Tape &, const std::vector<Var> &x) {
    Var y = ad::add_const(ad::mul_const(ad::add_scalar(ad::scale(x[0], 1.7), 0.3), c), c);
    return project(y);
  }, {random_mat(2, 5, rng)});
}

TEST_F(OpGradient, Nonlinearities) {
  Mat pos = random_mat(3, 4, rng).array().abs() + 0.2;
  expect_grad_ok([](ad::Tape &, const std::vector<Var> &x) {
    Var y = ad::add(ad::exp(x[0]), ad::log(x[1]));
    y = ad::add(y, ad::square(x[0]));
    y = ad::add(y, ad::sigmoid(x[0]));
    y = ad::add(y, ad::silu(x[0]));
    y = ad::add(y, ad::gelu(x[0]));
    return project(y);
  }, {random_mat(3, 4, rng), pos});
}

TEST_F(OpGradient, Reductions) {
  expect_grad_ok([](ad::Tape &, const std::vector<Var> &x) {
    return ad::add(ad::sum(ad::square(x[0])), project(x[0]));
  }, {random_mat(3, 2, rng)});
}

TEST_F(OpGradient, ShapeOps) {
  expect_grad_ok([](ad::Tape &, const std::vector<Var> &x) {
    Var r = ad::reshape(x[0], 6, 2);
    Var a = ad::slice_cols(r, 1, 1);
    Var b = ad::slice_rows(r, 2, 3);
    Var c = ad::concat_rows({ad::concat_cols({a, a}), b});
    return project(ad::square(c));
  }, {random_mat(3, 4, rng)});
}

TEST_F(OpGradient, GatherScatter) {
  std::vector<std::size_t> idx{2, 0, 2, 1, 3};
  std::vector<long> entries{0, -1, 5, 5, 11, 3};
  expect_grad_ok([&](ad::Tape &, const std::vector<Var> &x) {
    Var g = ad::gather_rows(x[0], idx);
    Var s = ad::scatter_add_rows(ad::square(g), idx, 4);
    Var e = ad::gather_entries(x[0], entries, 2, 3);
    return ad::add(project(s), project(ad::square(e), 5));
  }, {random_mat(4, 3, rng)});
}

TEST_F(OpGradient, Softmaxes) {
  std::vector<std::size_t> seg{0, 1, 0, 2, 1, 0};
  expect_grad_ok([&](ad::Tape &, const std::vector<Var> &x) {
    return ad::add(project(ad::softmax_rows(x[0])),
                   project(ad::segment_softmax(x[0], seg, 3), 3));
  }, {random_mat(6, 3, rng)});
}

TEST_F(OpGradient, LayerNorm) {
  expect_grad_ok([](ad::Tape &, const std::vector<Var> &x) {
    return project(ad::layer_norm_rows(x[0]));
  }, {random_mat(3, 7, rng)});
}

TEST_F(OpGradient, BatchedRowProducts) {
  expect_grad_ok([](ad::Tape &, const std::vector<Var> &x) {
    return project(ad::bmm_rows(x[0], x[1], 2, 3, 4));
  }, {random_mat(3, 6, rng), random_mat(3, 12, rng)});
}

TEST_F(OpGradient, MixVectors) {
  expect_grad_ok([](ad::Tape &, const std::vector<Var> &x) {
    return project(ad::mix_vectors(x[0], x[1]));
  }, {random_mat(4, 9, rng), random_mat(3, 2, rng)});
}

TEST_F(OpGradient, FusedAttention) {
  expect_grad_ok([](ad::Tape &, const std::vector<Var> &x) {
    return project(ad::multihead_attention(x[0], 3, 2));
  }, {random_mat(6, 12, rng)});
}

TEST(FusedAttention, MatchesComposedOps) {
  std::mt19937_64 rng(5);
  const Eigen::Index tokens = 4, heads = 2, d = 6, dh = d / heads, groups = 2;
  Mat qkv = random_mat(groups * tokens, 3 * d, rng);
  ad::Tape tape;
  Var x = tape.constant(qkv);
  Mat fused = ad::multihead_attention(x, tokens, heads).value();
  for (Eigen::Index b = 0; b < groups; ++b) {
    for (Eigen::Index h = 0; h < heads; ++h) {
      Var rows = ad::slice_rows(x, b * tokens, tokens);
      Var q = ad::slice_cols(rows, h * dh, dh);
      Var k = ad::slice_cols(rows, d + h * dh, dh);
      Var v = ad::slice_cols(rows, 2 * d + h * dh, dh);
      Var a = ad::softmax_rows(ad::scale(ad::matmul(q, ad::transpose(k)), 1.0 / std::sqrt(3.0)));
      Mat o = ad::matmul(a, v).value();
      EXPECT_LT((fused.block(b * tokens, h * dh, tokens, dh) - o).cwiseAbs().maxCoeff(), 1e-12);
    }
  }
}

TEST(Tape, ParameterSinkAccumulates) {
  Mat w = Mat::Constant(2, 2, 3.0);
  Mat g = Mat::Zero(2, 2);
  for (int pass = 0; pass < 2; ++pass) {
    ad::Tape tape;
    Var p = tape.parameter(w, &g);
    tape.backward(ad::sum(ad::square(p)));
  }
  EXPECT_TRUE(g.isApprox(Mat::Constant(2, 2, 12.0)));
}

TEST(Tape, ConstantsReceiveNoGradient) {
  ad::Tape tape;
  Var c = tape.constant(Mat::Ones(2, 2));
  Var y = ad::sum(ad::square(c));
  EXPECT_FALSE(y.requires_grad());
  tape.backward(y);
  EXPECT_EQ(tape.grad(c), Mat::Zero(2, 2));
}

TEST(Tape, ShapeErrors) {
  ad::Tape tape;
  Var a = tape.constant(Mat::Ones(2, 3));
  Var b = tape.constant(Mat::Ones(2, 2));
  EXPECT_THROW(ad::matmul(a, b), ShapeError);
  EXPECT_THROW(ad::add(a, b), ShapeError);
  EXPECT_THROW(tape.backward(a), ShapeError);
  EXPECT_THROW(ad::multihead_attention(tape.constant(Mat::Ones(4, 9)), 2, 2), ShapeError);
}

}  // namespace
}  // namespace eqdit
