// SPDX-License-Identifier: Apache-2.0

#ifndef EQDIT_EQUIATTN_ATTENTION_H_
#define EQDIT_EQUIATTN_ATTENTION_H_

#include <array>
#include <cstddef>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "eqdit/autodiff/ops.h"
#include "eqdit/encoding/channel_tensor.h"
#include "eqdit/equiattn/harmonics.h"
#include "eqdit/equiattn/kernel.h"
#include "eqdit/nn/params.h"

namespace eqdit {

using Positions = Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>;
// neighborhoods[i] lists the atoms attended to by atom i (never i itself).
using Neighborhoods = std::vector<std::vector<std::size_t>>;

Neighborhoods fully_connected(std::size_t n);

// Per-atom degree-typed features. type1 is channel-major: column c * 3 + axis.
struct FiberFeature {
  ad::Mat type0;
  ad::Mat type1;

  std::size_t size() const { return static_cast<std::size_t>(std::max(type0.rows(), type1.rows())); }
  Eigen::Index c0() const { return type0.cols(); }
  Eigen::Index c1() const { return type1.cols() / 3; }
};

struct EquiAttentionConfig {
  int c0_in = 0, c1_in = 0;
  int c0_out = 0, c1_out = 1;
  int heads = 4;
  int key_c0 = 4, key_c1 = 2;      // per head
  int value_c0 = 4, value_c1 = 2;  // per head
  int radial_hidden = 32;
  RadialBasis basis;
};

struct EquiAttention {
  EquiAttentionConfig config;
  std::optional<ParamId> wq0, wq1;          // self-only query maps
  std::optional<TFNKernel> key[2][2];       // [l][k]
  std::optional<TFNKernel> value[2][2];     // [l][k]
  std::optional<ParamId> self0, self1;      // W_V^l on the atom's own features
  std::optional<ParamId> out0, out1;        // head mixing

  int key_channels(int l) const;    // total over heads
  int value_channels(int l) const;  // total over heads

  static EquiAttention create(ParameterSet &ps, const std::string &name,
                              const EquiAttentionConfig &config, std::mt19937_64 &rng);
};

// Edge list and constant geometric edge data for a batch of point clouds
// merged into one disjoint graph. Edges are grouped by target in atom order;
// within a target the sources are sorted by position so that summation order
// does not depend on atom indexing.
struct AttentionGraph {
  std::size_t n_nodes = 0;
  std::vector<std::size_t> target;
  std::vector<std::size_t> source;
  ad::Mat features;                            // E x basis features
  std::array<ad::Mat, kMaxHarmonic + 1> harmonics;  // per J: E x (2J+1)

  std::size_t n_edges() const { return target.size(); }
};

struct PointCloud {
  Positions positions;
  ad::Mat bonds;             // n x n edge scalars; empty means zeros
  Neighborhoods neighborhoods;  // empty means fully connected
};

// Throws GeometryError for coincident neighbours.
AttentionGraph build_attention_graph(const std::vector<PointCloud> &clouds,
                                     const RadialBasis &basis);

struct AttentionVars {
  ad::Var type0;  // invalid when c0_out == 0
  ad::Var type1;  // invalid when c1_out == 0
  ad::Var alpha;  // E x heads
};

// f0: N x c0_in, f1: N x 3 c1_in (either may be invalid when its width is 0).
AttentionVars equi_attention(ParamBinding &pb, const EquiAttention &layer,
                             const AttentionGraph &graph, const ad::Var &f0,
                             const ad::Var &f1);

struct AttentionResult {
  FiberFeature features;
  ad::Mat alpha;  // E x heads
  std::vector<std::size_t> target, source;
};

AttentionResult equi_attention(const ParameterSet &ps, const EquiAttention &layer,
                               const FiberFeature &f, const Positions &positions,
                               const Neighborhoods &neighborhoods,
                               const ad::Mat &bonds = ad::Mat());

// Configuration used for channel-tensor preprocessing: one-hot rows in,
// one vector channel out.
EquiAttentionConfig preprocess_config(std::size_t side);

// Builds the point cloud of the real atoms of a channel tensor (positions
// from channel 0, symmetrized bond orders from channel 2).
PointCloud point_cloud(const ChannelTensor &t);

// Recorded batch form: N_total x 3 output vectors for the real atoms of every
// tensor, stacked in tensor order.
ad::Var attention_vectors(ParamBinding &pb, const EquiAttention &layer,
                          const std::vector<const ChannelTensor *> &batch);

// Replaces (or, with residual, adds to) channel-0 coordinates of real atoms
// with the attention output; the remaining channel-0 columns become zero in
// replacement mode. Channels 1 and 2 are unchanged.
ChannelTensor attention_preprocess(const ParameterSet &ps, const EquiAttention &layer,
                                   const ChannelTensor &t, bool residual = false);

}  // namespace eqdit

#endif  // EQDIT_EQUIATTN_ATTENTION_H_
