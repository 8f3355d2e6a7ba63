// SPDX-License-Identifier: Apache-2.0

#include "eqdit/dit/model.h"

#include <cmath>
#include <string>

#include "eqdit/encoding/patchify.h"
#include "eqdit/error.h"

namespace eqdit {

void DiTConfig::validate() const {
  if (hidden <= 0 || depth < 0 || heads <= 0 || patch <= 0 || side <= 0)
    throw ConfigError("model dimensions must be positive");
  if (hidden % heads != 0) throw ConfigError("hidden size must be divisible by the head count");
  if (hidden % 2 != 0 || time_dim % 2 != 0)
    throw ConfigError("positional encodings need even dimensions");
  if (side % patch != 0) throw ConfigError("patch size must divide the grid side");
  if (vocab <= 0 || vocab > side) throw ConfigError("vocabulary must fit the grid width");
  if (classes < 0) throw ConfigError("class count must be non-negative");
  if (mlp_ratio <= 0) throw ConfigError("MLP ratio must be positive");
}

Eigen::VectorXd sinusoidal_encoding(long k, int d) {
  if (d <= 0 || d % 2 != 0) throw ConfigError("sinusoidal encoding needs an even dimension");
  if (k < 0) throw ConfigError("sinusoidal encoding needs a non-negative position");
  Eigen::VectorXd out(d);
  for (int i = 0; i < d / 2; ++i) {
    const double freq = std::pow(10000.0, -2.0 * i / static_cast<double>(d));
    out(2 * i) = std::sin(static_cast<double>(k) * freq);
    out(2 * i + 1) = std::cos(static_cast<double>(k) * freq);
  }
  return out;
}

ad::Mat scaled_dot_attention(const ad::Mat &Q, const ad::Mat &K, const ad::Mat &V) {
  if (Q.cols() != K.cols() || K.rows() != V.rows())
    throw ShapeError("scaled_dot_attention: shape mismatch");
  ad::Mat s = (Q * K.transpose()) / std::sqrt(static_cast<double>(K.cols()));
  for (Eigen::Index r = 0; r < s.rows(); ++r) {
    auto row = s.row(r);
    row.array() = (row.array() - row.maxCoeff()).exp();
    row /= row.sum();
  }
  return s * V;
}

AdaLNBlock AdaLNBlock::create(ParameterSet &ps, const std::string &name, int d, int mlp_ratio,
                              std::mt19937_64 &rng) {
  AdaLNBlock b;
  b.modulation = LinearLayer::create(ps, name + ".modulation", d, 6 * d, Init::kZeros, rng);
  b.qkv = LinearLayer::create(ps, name + ".qkv", d, 3 * d, Init::kXavier, rng);
  b.proj = LinearLayer::create(ps, name + ".proj", d, d, Init::kXavier, rng);
  b.fc1 = LinearLayer::create(ps, name + ".fc1", d, mlp_ratio * d, Init::kXavier, rng);
  b.fc2 = LinearLayer::create(ps, name + ".fc2", mlp_ratio * d, d, Init::kXavier, rng);
  return b;
}

namespace {

// LN(x) * (1 + scale) + shift.
ad::Var modulate(const ad::Var &x, const ad::Var &shift, const ad::Var &scale) {
  return ad::add(ad::mul(ad::layer_norm_rows(x), ad::add_scalar(scale, 1.0)), shift);
}

}  // namespace

ad::Var adaln_zero_block(ParamBinding &pb, const AdaLNBlock &block, const ad::Var &x,
                         const ad::Var &cond_act, const std::vector<std::size_t> &group,
                         Eigen::Index tokens_per_group, Eigen::Index heads) {
  const Eigen::Index d = x.cols();
  ad::Var mod = ad::gather_rows(apply(pb, block.modulation, cond_act), group);
  auto part = [&](int i) { return ad::slice_cols(mod, i * d, d); };

  ad::Var h = modulate(x, part(0), part(1));
  h = ad::multihead_attention(apply(pb, block.qkv, h), tokens_per_group, heads);
  ad::Var y = ad::add(x, ad::mul(part(2), apply(pb, block.proj, h)));

  h = modulate(y, part(3), part(4));
  h = apply(pb, block.fc2, ad::gelu(apply(pb, block.fc1, h)));
  return ad::add(y, ad::mul(part(5), h));
}

DiTModel DiTModel::create(ParameterSet &ps, const DiTConfig &config,
                          const EquiAttentionConfig &attention, bool residual,
                          std::mt19937_64 &rng) {
  config.validate();
  DiTModel m;
  m.config = config;
  m.residual = residual;
  m.attention = EquiAttention::create(ps, "attention", attention, rng);
  const int d = config.hidden;
  m.embed = LinearLayer::create(ps, "embed", config.token_dim(), d, Init::kXavier, rng);
  m.time1 = LinearLayer::create(ps, "time.fc1", config.time_dim, d, Init::kNormal, rng);
  m.time2 = LinearLayer::create(ps, "time.fc2", d, d, Init::kNormal, rng);
  m.labels = ps.add("labels", config.classes + 1, d, Init::kNormal, rng);
  for (int i = 0; i < config.depth; ++i)
    m.blocks.push_back(AdaLNBlock::create(ps, "block" + std::to_string(i), d, config.mlp_ratio, rng));
  m.final_modulation = LinearLayer::create(ps, "final.modulation", d, 2 * d, Init::kZeros, rng);
  m.decode = LinearLayer::create(ps, "final.decode", d, 2 * config.token_dim(), Init::kZeros, rng);
  return m;
}

ModelOutputs dit_forward(ParamBinding &pb, const DiTModel &model,
                         const std::vector<const ChannelTensor *> &batch,
                         const std::vector<int> &steps, const std::vector<int> &labels,
                         ForwardTrace *trace) {
  const DiTConfig &cfg = model.config;
  const auto B = static_cast<Eigen::Index>(batch.size());
  if (B == 0) throw ShapeError("dit_forward: empty batch");
  if (steps.size() != batch.size() || labels.size() != batch.size())
    throw ShapeError("dit_forward: one step and label per tensor required");
  const auto side = static_cast<std::size_t>(cfg.side);
  const auto P = static_cast<std::size_t>(cfg.patch);
  const Eigen::Index T = cfg.tokens(), D = cfg.token_dim(), d = cfg.hidden;
  const Eigen::Index cells = static_cast<Eigen::Index>(kChannels * side * side);
  for (const ChannelTensor *t : batch)
    if (t->side() != side || t->n_atoms == 0 || t->n_atoms > side)
      throw ShapeError("dit_forward: tensor does not match the model grid");
  for (int l : labels)
    if (l >= cfg.classes + 1) throw ConfigError("label out of range");
  ad::Tape &tape = pb.tape();

  // Attention vectors enter channel-0 columns 0..2 of the real atoms.
  ad::Var vectors = attention_vectors(pb, model.attention, batch);
  const std::vector<std::size_t> gather = patch_gather_index(side, P);
  std::vector<long> from_vectors(static_cast<std::size_t>(B * T * D), -1);
  ad::Mat base(B * T, D);
  std::vector<std::size_t> group(static_cast<std::size_t>(B * T));
  long atom_offset = 0;
  for (Eigen::Index b = 0; b < B; ++b) {
    const ChannelTensor &t = *batch[static_cast<std::size_t>(b)];
    const auto n = static_cast<long>(t.n_atoms);
    for (Eigen::Index k = 0; k < T * D; ++k) {
      const std::size_t flat = gather[static_cast<std::size_t>(k)];
      const std::size_t ch = flat / (side * side);
      const std::size_t row = (flat / side) % side, col = flat % side;
      double value = t.channels[ch](static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col));
      if (ch == kPositionChannel) {
        if (!model.residual) value = 0.0;
        if (col < 3 && static_cast<long>(row) < n)
          from_vectors[static_cast<std::size_t>(b * T * D + k)] =
              (atom_offset + static_cast<long>(row)) * 3 + static_cast<long>(col);
      }
      base(b * T + k / D, k % D) = value;
    }
    for (Eigen::Index k = 0; k < T; ++k) group[static_cast<std::size_t>(b * T + k)] = static_cast<std::size_t>(b);
    atom_offset += n;
  }
  ad::Var tokens = ad::add_const(ad::gather_entries(vectors, from_vectors, B * T, D), base);

  ad::Mat positional(B * T, d);
  for (Eigen::Index k = 0; k < T; ++k) {
    const Eigen::RowVectorXd pe = sinusoidal_encoding(k, static_cast<int>(d)).transpose();
    for (Eigen::Index b = 0; b < B; ++b) positional.row(b * T + k) = pe;
  }
  ad::Var x = ad::add_const(apply(pb, model.embed, tokens), positional);

  ad::Mat time(B, cfg.time_dim);
  std::vector<std::size_t> label_rows(static_cast<std::size_t>(B));
  for (Eigen::Index b = 0; b < B; ++b) {
    time.row(b) = sinusoidal_encoding(steps[static_cast<std::size_t>(b)], cfg.time_dim).transpose();
    const int l = labels[static_cast<std::size_t>(b)];
    label_rows[static_cast<std::size_t>(b)] = static_cast<std::size_t>(l < 0 ? cfg.null_label() : l);
  }
  ad::Var cond = apply(pb, model.time2, ad::silu(apply(pb, model.time1, tape.constant(time))));
  cond = ad::add(cond, ad::gather_rows(pb(model.labels), label_rows));
  ad::Var cond_act = ad::silu(cond);

  if (trace) trace->tokens_in = x.value();
  for (const AdaLNBlock &block : model.blocks)
    x = adaln_zero_block(pb, block, x, cond_act, group, T, cfg.heads);
  if (trace) trace->tokens_out = x.value();

  ad::Var mod = ad::gather_rows(apply(pb, model.final_modulation, cond_act), group);
  x = modulate(x, ad::slice_cols(mod, 0, d), ad::slice_cols(mod, d, d));
  ad::Var out = apply(pb, model.decode, x);  // (B T) x 2D

  // Unpatchify both halves into flattened grids, keeping informative entries.
  std::vector<long> eps_index(static_cast<std::size_t>(B * cells), -1);
  std::vector<long> var_index(static_cast<std::size_t>(B * cells), -1);
  for (Eigen::Index b = 0; b < B; ++b) {
    const ChannelTensor &t = *batch[static_cast<std::size_t>(b)];
    const auto info = information_mask(t.n_atoms, side, static_cast<std::size_t>(cfg.vocab));
    for (Eigen::Index k = 0; k < T * D; ++k) {
      const std::size_t flat = gather[static_cast<std::size_t>(k)];
      const std::size_t ch = flat / (side * side);
      const std::size_t row = (flat / side) % side, col = flat % side;
      if (info[ch](static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col)) == 0.0) continue;
      const long src = static_cast<long>((b * T + k / D) * 2 * D + k % D);
      eps_index[static_cast<std::size_t>(b * cells) + flat] = src;
      var_index[static_cast<std::size_t>(b * cells) + flat] = src + static_cast<long>(D);
    }
  }
  ModelOutputs outputs;
  outputs.eps = ad::gather_entries(out, eps_index, B, cells);
  outputs.var_logit = ad::gather_entries(out, var_index, B, cells);
  return outputs;
}

namespace {

ChannelTensor unflatten(const ad::Mat &row, std::size_t side, const ChannelTensor &like) {
  ChannelTensor t = ChannelTensor::zeros(side);
  const auto s = static_cast<Eigen::Index>(side);
  for (int c = 0; c < kChannels; ++c)
    t.channels[c] = Eigen::Map<const Grid>(row.data() + c * s * s, s, s);
  t.mask = like.mask;
  t.n_atoms = like.n_atoms;
  return t;
}

}  // namespace

std::pair<ChannelTensor, ChannelTensor> dit_forward(const ParameterSet &ps,
                                                    const DiTModel &model,
                                                    const ChannelTensor &t, int step,
                                                    std::optional<int> label) {
  ad::Tape tape;
  ParamBinding pb(tape, ps);
  ModelOutputs o = dit_forward(pb, model, {&t}, {step}, {label ? *label : -1});
  const auto side = static_cast<std::size_t>(model.config.side);
  return {unflatten(o.eps.value(), side, t), unflatten(o.var_logit.value(), side, t)};
}

}  // namespace eqdit
