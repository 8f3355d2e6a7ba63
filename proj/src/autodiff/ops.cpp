// SPDX-License-Identifier: Apache-2.0

#include "eqdit/autodiff/ops.h"

#include <cmath>
#include <limits>
#include <string>

#include "eqdit/error.h"

namespace eqdit::ad {

namespace {

void same_shape(const Var &a, const Var &b, const char *op) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw ShapeError(std::string(op) + ": shape mismatch "
                     + std::to_string(a.rows()) + "x" + std::to_string(a.cols())
                     + " vs " + std::to_string(b.rows()) + "x"
                     + std::to_string(b.cols()));
}

template <typename F, typename DF>
Var unary(const Var &a, F f, DF df) {
  Mat out = a.value().unaryExpr(f);
  Tape &t = a.tape();
  return t.record(out, {a}, [a, df, &t](const Mat &g) {
    t.accumulate(a, g.cwiseProduct(Mat(a.value().unaryExpr(df))));
  });
}

}  // namespace

Var matmul(const Var &a, const Var &b) {
  if (a.cols() != b.rows())
    throw ShapeError("matmul: inner dimensions " + std::to_string(a.cols())
                     + " and " + std::to_string(b.rows()));
  Tape &t = a.tape();
  Mat out = a.value() * b.value();
  return t.record(std::move(out), {a, b}, [a, b, &t](const Mat &g) {
    if (a.requires_grad()) t.accumulate(a, Mat(g * b.value().transpose()));
    if (b.requires_grad()) t.accumulate(b, Mat(a.value().transpose() * g));
  });
}

Var matmul_rowwise(const Var &a, const Var &b) {
  if (a.cols() != b.rows())
    throw ShapeError("matmul_rowwise: inner dimensions " + std::to_string(a.cols())
                     + " and " + std::to_string(b.rows()));
  Tape &t = a.tape();
  Mat out = a.value().lazyProduct(b.value());
  return t.record(std::move(out), {a, b}, [a, b, &t](const Mat &g) {
    if (a.requires_grad()) t.accumulate(a, Mat(g * b.value().transpose()));
    if (b.requires_grad()) t.accumulate(b, Mat(a.value().transpose() * g));
  });
}

Var transpose(const Var &a) {
  Tape &t = a.tape();
  return t.record(a.value().transpose(), {a},
                  [a, &t](const Mat &g) { t.accumulate(a, Mat(g.transpose())); });
}

Var add(const Var &a, const Var &b) {
  same_shape(a, b, "add");
  Tape &t = a.tape();
  return t.record(a.value() + b.value(), {a, b}, [a, b, &t](const Mat &g) {
    t.accumulate(a, g);
    t.accumulate(b, g);
  });
}

Var sub(const Var &a, const Var &b) {
  same_shape(a, b, "sub");
  Tape &t = a.tape();
  return t.record(a.value() - b.value(), {a, b}, [a, b, &t](const Mat &g) {
    t.accumulate(a, g);
    if (b.requires_grad()) t.accumulate(b, Mat(-g));
  });
}

Var mul(const Var &a, const Var &b) {
  same_shape(a, b, "mul");
  Tape &t = a.tape();
  return t.record(a.value().cwiseProduct(b.value()), {a, b},
                  [a, b, &t](const Mat &g) {
                    if (a.requires_grad()) t.accumulate(a, Mat(g.cwiseProduct(b.value())));
                    if (b.requires_grad()) t.accumulate(b, Mat(g.cwiseProduct(a.value())));
                  });
}

Var div(const Var &a, const Var &b) {
  same_shape(a, b, "div");
  Tape &t = a.tape();
  Mat out = a.value().cwiseQuotient(b.value());
  return t.record(out, {a, b}, [a, b, out, &t](const Mat &g) {
    if (a.requires_grad()) t.accumulate(a, Mat(g.cwiseQuotient(b.value())));
    if (b.requires_grad())
      t.accumulate(b, Mat(-g.cwiseProduct(out).cwiseQuotient(b.value())));
  });
}

Var add_row(const Var &a, const Var &row) {
  if (row.rows() != 1 || row.cols() != a.cols()) throw ShapeError("add_row: bad row shape");
  Tape &t = a.tape();
  Mat out = a.value().rowwise() + row.value().row(0);
  return t.record(std::move(out), {a, row}, [a, row, &t](const Mat &g) {
    t.accumulate(a, g);
    if (row.requires_grad()) t.accumulate(row, Mat(g.colwise().sum()));
  });
}

Var mul_row(const Var &a, const Var &row) {
  if (row.rows() != 1 || row.cols() != a.cols()) throw ShapeError("mul_row: bad row shape");
  Tape &t = a.tape();
  Mat out = a.value().array().rowwise() * row.value().row(0).array();
  return t.record(std::move(out), {a, row}, [a, row, &t](const Mat &g) {
    if (a.requires_grad())
      t.accumulate(a, Mat(g.array().rowwise() * row.value().row(0).array()));
    if (row.requires_grad())
      t.accumulate(row, Mat(g.cwiseProduct(a.value()).colwise().sum()));
  });
}

Var scale(const Var &a, double s) {
  Tape &t = a.tape();
  return t.record(a.value() * s, {a},
                  [a, s, &t](const Mat &g) { t.accumulate(a, Mat(g * s)); });
}

Var add_scalar(const Var &a, double s) {
  Tape &t = a.tape();
  return t.record(a.value().array() + s, {a},
                  [a, &t](const Mat &g) { t.accumulate(a, g); });
}

Var mul_const(const Var &a, const Mat &c) {
  if (c.rows() != a.rows() || c.cols() != a.cols()) throw ShapeError("mul_const: shape mismatch");
  Tape &t = a.tape();
  return t.record(a.value().cwiseProduct(c), {a},
                  [a, c, &t](const Mat &g) { t.accumulate(a, Mat(g.cwiseProduct(c))); });
}

Var add_const(const Var &a, const Mat &c) {
  if (c.rows() != a.rows() || c.cols() != a.cols()) throw ShapeError("add_const: shape mismatch");
  Tape &t = a.tape();
  return t.record(a.value() + c, {a}, [a, &t](const Mat &g) { t.accumulate(a, g); });
}

Var exp(const Var &a) {
  Tape &t = a.tape();
  Mat out = a.value().array().exp();
  return t.record(out, {a}, [a, out, &t](const Mat &g) {
    t.accumulate(a, Mat(g.cwiseProduct(out)));
  });
}

Var log(const Var &a) {
  Tape &t = a.tape();
  return t.record(a.value().array().log(), {a}, [a, &t](const Mat &g) {
    t.accumulate(a, Mat(g.cwiseQuotient(a.value())));
  });
}

Var square(const Var &a) {
  Tape &t = a.tape();
  return t.record(a.value().array().square(), {a}, [a, &t](const Mat &g) {
    t.accumulate(a, Mat(2.0 * g.cwiseProduct(a.value())));
  });
}

Var sigmoid(const Var &a) {
  Tape &t = a.tape();
  Mat out = a.value().unaryExpr([](double x) { return 1.0 / (1.0 + std::exp(-x)); });
  return t.record(out, {a}, [a, out, &t](const Mat &g) {
    t.accumulate(a, Mat(g.array() * out.array() * (1.0 - out.array())));
  });
}

Var silu(const Var &a) {
  return unary(
      a, [](double x) { return x / (1.0 + std::exp(-x)); },
      [](double x) {
        double s = 1.0 / (1.0 + std::exp(-x));
        return s * (1.0 + x * (1.0 - s));
      });
}

Var gelu(const Var &a) {
  constexpr double c = 0.7978845608028654;  // sqrt(2 / pi)
  return unary(
      a,
      [](double x) { return 0.5 * x * (1.0 + std::tanh(c * (x + 0.044715 * x * x * x))); },
      [](double x) {
        double u = c * (x + 0.044715 * x * x * x);
        double th = std::tanh(u);
        double du = c * (1.0 + 3.0 * 0.044715 * x * x);
        return 0.5 * (1.0 + th) + 0.5 * x * (1.0 - th * th) * du;
      });
}

Var sum(const Var &a) {
  Tape &t = a.tape();
  Mat out(1, 1);
  out(0, 0) = a.value().sum();
  return t.record(std::move(out), {a}, [a, &t](const Mat &g) {
    t.accumulate(a, Mat(Mat::Constant(a.rows(), a.cols(), g(0, 0))));
  });
}

Var weighted_sum(const Var &a, const Mat &w) {
  if (w.rows() != a.rows() || w.cols() != a.cols()) throw ShapeError("weighted_sum: shape mismatch");
  Tape &t = a.tape();
  Mat out(1, 1);
  out(0, 0) = a.value().cwiseProduct(w).sum();
  return t.record(std::move(out), {a},
                  [a, w, &t](const Mat &g) { t.accumulate(a, Mat(w * g(0, 0))); });
}

Var reshape(const Var &a, Eigen::Index rows, Eigen::Index cols) {
  if (rows * cols != a.value().size()) throw ShapeError("reshape: size mismatch");
  Tape &t = a.tape();
  Mat out = Eigen::Map<const Mat>(a.value().data(), rows, cols);
  const Eigen::Index r0 = a.rows(), c0 = a.cols();
  return t.record(std::move(out), {a}, [a, r0, c0, &t](const Mat &g) {
    t.accumulate(a, Mat(Eigen::Map<const Mat>(g.data(), r0, c0)));
  });
}

Var slice_cols(const Var &a, Eigen::Index start, Eigen::Index count) {
  if (start < 0 || count < 0 || start + count > a.cols()) throw ShapeError("slice_cols: out of range");
  Tape &t = a.tape();
  return t.record(a.value().middleCols(start, count), {a},
                  [a, start, count, &t](const Mat &g) {
                    Mat full = Mat::Zero(a.rows(), a.cols());
                    full.middleCols(start, count) = g;
                    t.accumulate(a, full);
                  });
}

Var slice_rows(const Var &a, Eigen::Index start, Eigen::Index count) {
  if (start < 0 || count < 0 || start + count > a.rows()) throw ShapeError("slice_rows: out of range");
  Tape &t = a.tape();
  return t.record(a.value().middleRows(start, count), {a},
                  [a, start, count, &t](const Mat &g) {
                    Mat full = Mat::Zero(a.rows(), a.cols());
                    full.middleRows(start, count) = g;
                    t.accumulate(a, full);
                  });
}

Var concat_cols(const std::vector<Var> &parts) {
  if (parts.empty()) throw ShapeError("concat_cols: nothing to concatenate");
  const Eigen::Index rows = parts[0].rows();
  Eigen::Index cols = 0;
  for (const Var &p : parts) {
    if (p.rows() != rows) throw ShapeError("concat_cols: row mismatch");
    cols += p.cols();
  }
  Mat out(rows, cols);
  Eigen::Index at = 0;
  for (const Var &p : parts) {
    out.middleCols(at, p.cols()) = p.value();
    at += p.cols();
  }
  Tape &t = parts[0].tape();
  return t.record(std::move(out), parts, [parts, &t](const Mat &g) {
    Eigen::Index at = 0;
    for (const Var &p : parts) {
      if (p.requires_grad()) t.accumulate(p, Mat(g.middleCols(at, p.cols())));
      at += p.cols();
    }
  });
}

Var concat_rows(const std::vector<Var> &parts) {
  if (parts.empty()) throw ShapeError("concat_rows: nothing to concatenate");
  const Eigen::Index cols = parts[0].cols();
  Eigen::Index rows = 0;
  for (const Var &p : parts) {
    if (p.cols() != cols) throw ShapeError("concat_rows: column mismatch");
    rows += p.rows();
  }
  Mat out(rows, cols);
  Eigen::Index at = 0;
  for (const Var &p : parts) {
    out.middleRows(at, p.rows()) = p.value();
    at += p.rows();
  }
  Tape &t = parts[0].tape();
  return t.record(std::move(out), parts, [parts, &t](const Mat &g) {
    Eigen::Index at = 0;
    for (const Var &p : parts) {
      if (p.requires_grad()) t.accumulate(p, Mat(g.middleRows(at, p.rows())));
      at += p.rows();
    }
  });
}

Var gather_rows(const Var &a, const std::vector<std::size_t> &index) {
  const Mat &v = a.value();
  Mat out(static_cast<Eigen::Index>(index.size()), v.cols());
  for (std::size_t k = 0; k < index.size(); ++k) {
    if (index[k] >= static_cast<std::size_t>(v.rows())) throw ShapeError("gather_rows: index out of range");
    out.row(static_cast<Eigen::Index>(k)) = v.row(static_cast<Eigen::Index>(index[k]));
  }
  Tape &t = a.tape();
  return t.record(std::move(out), {a}, [a, index, &t](const Mat &g) {
    Mat full = Mat::Zero(a.rows(), a.cols());
    for (std::size_t k = 0; k < index.size(); ++k)
      full.row(static_cast<Eigen::Index>(index[k])) += g.row(static_cast<Eigen::Index>(k));
    t.accumulate(a, full);
  });
}

Var scatter_add_rows(const Var &a, const std::vector<std::size_t> &index,
                     Eigen::Index n_out) {
  if (static_cast<Eigen::Index>(index.size()) != a.rows())
    throw ShapeError("scatter_add_rows: index length must equal row count");
  Mat out = Mat::Zero(n_out, a.cols());
  for (std::size_t k = 0; k < index.size(); ++k) {
    if (static_cast<Eigen::Index>(index[k]) >= n_out) throw ShapeError("scatter_add_rows: index out of range");
    out.row(static_cast<Eigen::Index>(index[k])) += a.value().row(static_cast<Eigen::Index>(k));
  }
  Tape &t = a.tape();
  return t.record(std::move(out), {a}, [a, index, &t](const Mat &g) {
    Mat ga(a.rows(), a.cols());
    for (std::size_t k = 0; k < index.size(); ++k)
      ga.row(static_cast<Eigen::Index>(k)) = g.row(static_cast<Eigen::Index>(index[k]));
    t.accumulate(a, ga);
  });
}

Var gather_entries(const Var &a, const std::vector<long> &index,
                   Eigen::Index rows, Eigen::Index cols) {
  if (static_cast<Eigen::Index>(index.size()) != rows * cols)
    throw ShapeError("gather_entries: index size mismatch");
  const Mat &v = a.value();
  const long n = static_cast<long>(v.size());
  Mat out(rows, cols);
  double *o = out.data();
  const double *src = v.data();
  for (std::size_t k = 0; k < index.size(); ++k) {
    if (index[k] >= n) throw ShapeError("gather_entries: index out of range");
    o[k] = index[k] < 0 ? 0.0 : src[index[k]];
  }
  Tape &t = a.tape();
  return t.record(std::move(out), {a}, [a, index, &t](const Mat &g) {
    Mat full = Mat::Zero(a.rows(), a.cols());
    double *f = full.data();
    const double *gd = g.data();
    for (std::size_t k = 0; k < index.size(); ++k)
      if (index[k] >= 0) f[index[k]] += gd[k];
    t.accumulate(a, full);
  });
}

Var softmax_rows(const Var &a) {
  Mat out = a.value();
  for (Eigen::Index r = 0; r < out.rows(); ++r) {
    auto row = out.row(r);
    row.array() = (row.array() - row.maxCoeff()).exp();
    row /= row.sum();
  }
  Tape &t = a.tape();
  return t.record(out, {a}, [a, out, &t](const Mat &g) {
    Mat ga = out.cwiseProduct(g);
    Eigen::VectorXd dots = ga.rowwise().sum();
    ga -= out.cwiseProduct(dots.replicate(1, out.cols()));
    t.accumulate(a, ga);
  });
}

Var segment_softmax(const Var &a, const std::vector<std::size_t> &segment,
                    std::size_t n_segments) {
  if (static_cast<Eigen::Index>(segment.size()) != a.rows())
    throw ShapeError("segment_softmax: one segment id per row");
  const Mat &v = a.value();
  const Eigen::Index cols = v.cols();
  const auto ns = static_cast<Eigen::Index>(n_segments);
  Mat maxes = Mat::Constant(ns, cols, -std::numeric_limits<double>::infinity());
  for (Eigen::Index r = 0; r < v.rows(); ++r)
    maxes.row(static_cast<Eigen::Index>(segment[r])) =
        maxes.row(static_cast<Eigen::Index>(segment[r])).cwiseMax(v.row(r));
  Mat out(v.rows(), cols);
  Mat sums = Mat::Zero(ns, cols);
  for (Eigen::Index r = 0; r < v.rows(); ++r) {
    const auto s = static_cast<Eigen::Index>(segment[r]);
    out.row(r) = (v.row(r) - maxes.row(s)).array().exp().matrix();
    sums.row(s) += out.row(r);
  }
  for (Eigen::Index r = 0; r < v.rows(); ++r)
    out.row(r) = out.row(r).cwiseQuotient(sums.row(static_cast<Eigen::Index>(segment[r])));

  Tape &t = a.tape();
  return t.record(out, {a}, [a, out, segment, ns, &t](const Mat &g) {
    Mat prod = out.cwiseProduct(g);
    Mat dots = Mat::Zero(ns, out.cols());
    for (Eigen::Index r = 0; r < out.rows(); ++r)
      dots.row(static_cast<Eigen::Index>(segment[r])) += prod.row(r);
    Mat ga = prod;
    for (Eigen::Index r = 0; r < out.rows(); ++r)
      ga.row(r) -= out.row(r).cwiseProduct(dots.row(static_cast<Eigen::Index>(segment[r])));
    t.accumulate(a, ga);
  });
}

Var layer_norm_rows(const Var &a, double eps) {
  const Mat &v = a.value();
  const auto n = static_cast<double>(v.cols());
  Mat xhat(v.rows(), v.cols());
  Eigen::VectorXd inv_std(v.rows());
  for (Eigen::Index r = 0; r < v.rows(); ++r) {
    double mean = v.row(r).mean();
    auto centred = v.row(r).array() - mean;
    double var = centred.square().sum() / n;
    inv_std(r) = 1.0 / std::sqrt(var + eps);
    xhat.row(r) = (centred * inv_std(r)).matrix();
  }
  Tape &t = a.tape();
  return t.record(xhat, {a}, [a, xhat, inv_std, n, &t](const Mat &g) {
    Mat ga(g.rows(), g.cols());
    for (Eigen::Index r = 0; r < g.rows(); ++r) {
      double gm = g.row(r).mean();
      double gx = g.row(r).dot(xhat.row(r)) / n;
      ga.row(r) = inv_std(r) * (g.row(r).array() - gm - xhat.row(r).array() * gx).matrix();
    }
    t.accumulate(a, ga);
  });
}

Var bmm_rows(const Var &a, const Var &b, Eigen::Index m, Eigen::Index k,
             Eigen::Index n) {
  if (a.rows() != b.rows() || a.cols() != m * k || b.cols() != k * n)
    throw ShapeError("bmm_rows: shape mismatch");
  using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const Eigen::Index rows = a.rows();
  Mat out(rows, m * n);
  for (Eigen::Index r = 0; r < rows; ++r) {
    Eigen::Map<const RowMat> A(a.value().row(r).data(), m, k);
    Eigen::Map<const RowMat> B(b.value().row(r).data(), k, n);
    Eigen::Map<RowMat>(out.row(r).data(), m, n).noalias() = A * B;
  }
  Tape &t = a.tape();
  return t.record(std::move(out), {a, b}, [a, b, m, k, n, &t](const Mat &g) {
    const Eigen::Index rows = g.rows();
    Mat ga, gb;
    if (a.requires_grad()) ga.resize(rows, m * k);
    if (b.requires_grad()) gb.resize(rows, k * n);
    for (Eigen::Index r = 0; r < rows; ++r) {
      Eigen::Map<const RowMat> G(g.row(r).data(), m, n);
      if (a.requires_grad()) {
        Eigen::Map<const RowMat> B(b.value().row(r).data(), k, n);
        Eigen::Map<RowMat>(ga.row(r).data(), m, k).noalias() = G * B.transpose();
      }
      if (b.requires_grad()) {
        Eigen::Map<const RowMat> A(a.value().row(r).data(), m, k);
        Eigen::Map<RowMat>(gb.row(r).data(), k, n).noalias() = A.transpose() * G;
      }
    }
    if (a.requires_grad()) t.accumulate(a, ga);
    if (b.requires_grad()) t.accumulate(b, gb);
  });
}

Var mix_vectors(const Var &x, const Var &w) {
  const Eigen::Index cin = w.rows(), cout = w.cols();
  if (x.cols() != 3 * cin) throw ShapeError("mix_vectors: x must have 3 * w.rows() columns");
  using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const Eigen::Index rows = x.rows();
  Mat out(rows, 3 * cout);
  for (Eigen::Index r = 0; r < rows; ++r) {
    Eigen::Map<const RowMat> X(x.value().row(r).data(), cin, 3);
    Eigen::Map<RowMat>(out.row(r).data(), cout, 3).noalias() = w.value().transpose() * X;
  }
  Tape &t = x.tape();
  return t.record(std::move(out), {x, w}, [x, w, cin, cout, &t](const Mat &g) {
    const Eigen::Index rows = g.rows();
    Mat gx;
    if (x.requires_grad()) gx.resize(rows, 3 * cin);
    Mat gw = Mat::Zero(cin, cout);
    for (Eigen::Index r = 0; r < rows; ++r) {
      Eigen::Map<const RowMat> G(g.row(r).data(), cout, 3);
      if (x.requires_grad())
        Eigen::Map<RowMat>(gx.row(r).data(), cin, 3).noalias() = w.value() * G;
      if (w.requires_grad()) {
        Eigen::Map<const RowMat> X(x.value().row(r).data(), cin, 3);
        gw.noalias() += X * G.transpose();
      }
    }
    if (x.requires_grad()) t.accumulate(x, gx);
    if (w.requires_grad()) t.accumulate(w, gw);
  });
}

Var multihead_attention(const Var &qkv, Eigen::Index tokens, Eigen::Index heads) {
  const Eigen::Index rows = qkv.rows();
  if (qkv.cols() % 3 != 0 || tokens <= 0 || rows % tokens != 0)
    throw ShapeError("multihead_attention: bad qkv shape");
  const Eigen::Index d = qkv.cols() / 3;
  if (heads <= 0 || d % heads != 0) throw ShapeError("multihead_attention: d not divisible by heads");
  const Eigen::Index dh = d / heads, groups = rows / tokens;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  const Mat &in = qkv.value();

  Mat out(rows, d);
  std::vector<Mat> probs(static_cast<std::size_t>(groups * heads));
  for (Eigen::Index b = 0; b < groups; ++b) {
    for (Eigen::Index h = 0; h < heads; ++h) {
      auto Q = in.block(b * tokens, h * dh, tokens, dh);
      auto K = in.block(b * tokens, d + h * dh, tokens, dh);
      auto V = in.block(b * tokens, 2 * d + h * dh, tokens, dh);
      Mat s = (Q * K.transpose()) * scale;
      for (Eigen::Index r = 0; r < tokens; ++r) {
        auto row = s.row(r);
        row.array() = (row.array() - row.maxCoeff()).exp();
        row /= row.sum();
      }
      out.block(b * tokens, h * dh, tokens, dh).noalias() = s * V;
      probs[static_cast<std::size_t>(b * heads + h)] = std::move(s);
    }
  }
  Tape &t = qkv.tape();
  return t.record(std::move(out), {qkv},
                  [qkv, probs = std::move(probs), tokens, heads, d, dh, groups, scale,
                   &t](const Mat &g) {
                    const Mat &in = qkv.value();
                    Mat gin(in.rows(), in.cols());
                    for (Eigen::Index b = 0; b < groups; ++b) {
                      for (Eigen::Index h = 0; h < heads; ++h) {
                        const Mat &A = probs[static_cast<std::size_t>(b * heads + h)];
                        auto Q = in.block(b * tokens, h * dh, tokens, dh);
                        auto K = in.block(b * tokens, d + h * dh, tokens, dh);
                        auto V = in.block(b * tokens, 2 * d + h * dh, tokens, dh);
                        auto G = g.block(b * tokens, h * dh, tokens, dh);
                        Mat dA = G * V.transpose();
                        Eigen::VectorXd dots = A.cwiseProduct(dA).rowwise().sum();
                        Mat dS = A.cwiseProduct(dA - dots.replicate(1, tokens)) * scale;
                        gin.block(b * tokens, h * dh, tokens, dh).noalias() = dS * K;
                        gin.block(b * tokens, d + h * dh, tokens, dh).noalias() =
                            dS.transpose() * Q;
                        gin.block(b * tokens, 2 * d + h * dh, tokens, dh).noalias() =
                            A.transpose() * G;
                      }
                    }
                    t.accumulate(qkv, gin);
                  });
}

}  // namespace eqdit::ad
