// SPDX-License-Identifier: Apache-2.0

#ifndef EQDIT_DIT_MODEL_H_
#define EQDIT_DIT_MODEL_H_

#include <optional>
#include <random>
#include <utility>
#include <vector>

#include "eqdit/autodiff/ops.h"
#include "eqdit/encoding/channel_tensor.h"
#include "eqdit/equiattn/attention.h"
#include "eqdit/nn/params.h"

namespace eqdit {

struct DiTConfig {
  int hidden = 128;
  int depth = 6;
  int heads = 4;
  int patch = 3;
  int side = 9;       // grid side H = N_max
  int vocab = 4;      // element vocabulary size
  int classes = 0;    // real classes; one extra null class is always added
  int time_dim = 256;
  int mlp_ratio = 4;

  int channels() const { return kChannels; }
  int tokens() const { return (side / patch) * (side / patch); }
  int token_dim() const { return kChannels * patch * patch; }
  int null_label() const { return classes; }
  // Throws ConfigError for inconsistent settings.
  void validate() const;
};

// Component 2i = sin(k / 10000^(2i/d)), 2i+1 = cos(same). Odd d throws.
Eigen::VectorXd sinusoidal_encoding(long k, int d);

// softmax(Q K^T / sqrt(d_k)) V.
ad::Mat scaled_dot_attention(const ad::Mat &Q, const ad::Mat &K, const ad::Mat &V);

struct AdaLNBlock {
  LinearLayer modulation;  // cond -> 6 d, zero-initialized
  LinearLayer qkv, proj, fc1, fc2;

  static AdaLNBlock create(ParameterSet &ps, const std::string &name, int d, int mlp_ratio,
                           std::mt19937_64 &rng);
};

// One pre-norm transformer block with adaptive layer norm. `cond_act` is the
// SiLU of the per-molecule condition (B x d); `group` maps each token row to
// its molecule; `tokens_per_group` consecutive rows attend to each other.
ad::Var adaln_zero_block(ParamBinding &pb, const AdaLNBlock &block, const ad::Var &x,
                         const ad::Var &cond_act, const std::vector<std::size_t> &group,
                         Eigen::Index tokens_per_group, Eigen::Index heads);

struct DiTModel {
  DiTConfig config;
  EquiAttention attention;
  bool residual = false;  // add attention vectors to channel 0 instead of replacing it
  LinearLayer embed;
  LinearLayer time1, time2;
  ParamId labels = 0;     // (classes + 1) x d
  std::vector<AdaLNBlock> blocks;
  LinearLayer final_modulation;  // zero-initialized
  LinearLayer decode;            // zero-initialized

  static DiTModel create(ParameterSet &ps, const DiTConfig &config,
                         const EquiAttentionConfig &attention, bool residual,
                         std::mt19937_64 &rng);
};

// Network outputs for a batch, one row per molecule over the flattened
// 3 x H x H grid (channel-major). Entries outside the information mask are 0.
struct ModelOutputs {
  ad::Var eps;         // predicted noise
  ad::Var var_logit;   // variance interpolation coefficient before the sigmoid
};

struct ForwardTrace {
  ad::Mat tokens_in;   // embedded tokens entering the block stack
  ad::Mat tokens_out;  // tokens leaving it
};

// labels[b] < 0 selects the null class.
ModelOutputs dit_forward(ParamBinding &pb, const DiTModel &model,
                         const std::vector<const ChannelTensor *> &batch,
                         const std::vector<int> &steps, const std::vector<int> &labels,
                         ForwardTrace *trace = nullptr);

// Single-tensor form returning (noise, variance logit) tensors.
std::pair<ChannelTensor, ChannelTensor> dit_forward(const ParameterSet &ps,
                                                    const DiTModel &model,
                                                    const ChannelTensor &t, int step,
                                                    std::optional<int> label);

}  // namespace eqdit

#endif  // EQDIT_DIT_MODEL_H_
