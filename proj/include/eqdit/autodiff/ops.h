// SPDX-License-Identifier: Apache-2.0

#ifndef EQDIT_AUTODIFF_OPS_H_
#define EQDIT_AUTODIFF_OPS_H_

#include <cstddef>
#include <vector>

#include "eqdit/autodiff/tape.h"

namespace eqdit::ad {

// Linear algebra.
Var matmul(const Var &a, const Var &b);
// Same product, but each output row depends only on the matching input row
// (no blocking), so results do not change when rows are reordered.
Var matmul_rowwise(const Var &a, const Var &b);
Var transpose(const Var &a);

// Elementwise binary ops on equal shapes.
Var add(const Var &a, const Var &b);
Var sub(const Var &a, const Var &b);
Var mul(const Var &a, const Var &b);
Var div(const Var &a, const Var &b);

// Broadcast a 1 x cols row over every row of a.
Var add_row(const Var &a, const Var &row);
Var mul_row(const Var &a, const Var &row);

Var scale(const Var &a, double s);
Var add_scalar(const Var &a, double s);
// Elementwise product with a constant of the same shape.
Var mul_const(const Var &a, const Mat &c);
Var add_const(const Var &a, const Mat &c);

// Elementwise nonlinearities.
Var exp(const Var &a);
Var log(const Var &a);
Var square(const Var &a);
Var sigmoid(const Var &a);
Var silu(const Var &a);
Var gelu(const Var &a);  // tanh approximation

// Reductions to 1 x 1.
Var sum(const Var &a);
// sum(a .* w) for a constant weight matrix w.
Var weighted_sum(const Var &a, const Mat &w);

// Shape manipulation. reshape keeps row-major element order.
Var reshape(const Var &a, Eigen::Index rows, Eigen::Index cols);
Var slice_cols(const Var &a, Eigen::Index start, Eigen::Index count);
Var slice_rows(const Var &a, Eigen::Index start, Eigen::Index count);
Var concat_cols(const std::vector<Var> &parts);
Var concat_rows(const std::vector<Var> &parts);

// out.row(k) = a.row(index[k]).
Var gather_rows(const Var &a, const std::vector<std::size_t> &index);
// out.row(index[k]) += a.row(k); out has n_out rows.
Var scatter_add_rows(const Var &a, const std::vector<std::size_t> &index,
                     Eigen::Index n_out);
// out(flat k) = a(flat index[k]), or 0 where index[k] < 0.
Var gather_entries(const Var &a, const std::vector<long> &index,
                   Eigen::Index rows, Eigen::Index cols);

// Row-wise softmax.
Var softmax_rows(const Var &a);
// Softmax over the rows sharing a segment id, independently per column.
Var segment_softmax(const Var &a, const std::vector<std::size_t> &segment,
                    std::size_t n_segments);
// Per-row standardization without affine parameters.
Var layer_norm_rows(const Var &a, double eps = 1e-6);

// Row-wise batched product: row r of a is an m x k matrix, row r of b a
// k x n matrix (both row-major); row r of the result is their m x n product.
Var bmm_rows(const Var &a, const Var &b, Eigen::Index m, Eigen::Index k,
             Eigen::Index n);

// Channel mixing of vector features. Row layout of x is channel-major
// (c * 3 + axis); out[., o * 3 + axis] = sum_c x[., c * 3 + axis] * w(c, o).
Var mix_vectors(const Var &x, const Var &w);

// Multihead self-attention over groups of `tokens` consecutive rows.
// qkv columns are [Q | K | V], each d wide and split into `heads` blocks.
// Returns softmax(Q K^T / sqrt(d / heads)) V per group and head.
Var multihead_attention(const Var &qkv, Eigen::Index tokens, Eigen::Index heads);

}  // namespace eqdit::ad

#endif  // EQDIT_AUTODIFF_OPS_H_
