// SPDX-License-Identifier: Apache-2.0

#include "eqdit/equiattn/attention.h"

#include <algorithm>
#include <cmath>

#include "eqdit/equiattn/harmonics.h"
#include "eqdit/error.h"

namespace eqdit {

Neighborhoods fully_connected(std::size_t n) {
  Neighborhoods nb(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j) nb[i].push_back(j);
  return nb;
}

int EquiAttention::key_channels(int l) const {
  const int in = l == 0 ? config.c0_in : config.c1_in;
  return in > 0 ? config.heads * (l == 0 ? config.key_c0 : config.key_c1) : 0;
}

int EquiAttention::value_channels(int l) const {
  const int out = l == 0 ? config.c0_out : config.c1_out;
  return out > 0 ? config.heads * (l == 0 ? config.value_c0 : config.value_c1) : 0;
}

EquiAttention EquiAttention::create(ParameterSet &ps, const std::string &name,
                                    const EquiAttentionConfig &config, std::mt19937_64 &rng) {
  if (config.heads <= 0) throw ConfigError("attention needs at least one head");
  if (config.c0_in < 0 || config.c1_in < 0 || config.c0_out < 0 || config.c1_out < 0)
    throw ConfigError("negative channel count");
  EquiAttention a;
  a.config = config;
  const int in[2] = {config.c0_in, config.c1_in};
  const int nf = config.basis.feature_size();
  if (a.key_channels(0) > 0)
    a.wq0 = ps.add(name + ".wq0", config.c0_in, a.key_channels(0), Init::kXavier, rng);
  if (a.key_channels(1) > 0)
    a.wq1 = ps.add(name + ".wq1", config.c1_in, a.key_channels(1), Init::kXavier, rng);
  for (int l = 0; l <= 1; ++l) {
    for (int k = 0; k <= 1; ++k) {
      if (in[k] == 0) continue;
      const std::string tag = std::to_string(l) + std::to_string(k);
      if (a.key_channels(l) > 0)
        a.key[l][k] = TFNKernel::create(ps, name + ".key" + tag, l, k, in[k], a.key_channels(l),
                                        nf, config.radial_hidden, rng);
      if (a.value_channels(l) > 0)
        a.value[l][k] = TFNKernel::create(ps, name + ".value" + tag, l, k, in[k],
                                          a.value_channels(l), nf, config.radial_hidden, rng);
    }
  }
  if (a.value_channels(0) > 0) {
    if (config.c0_in > 0)
      a.self0 = ps.add(name + ".self0", config.c0_in, a.value_channels(0), Init::kXavier, rng);
    a.out0 = ps.add(name + ".out0", a.value_channels(0), config.c0_out, Init::kXavier, rng);
  }
  if (a.value_channels(1) > 0) {
    if (config.c1_in > 0)
      a.self1 = ps.add(name + ".self1", config.c1_in, a.value_channels(1), Init::kXavier, rng);
    a.out1 = ps.add(name + ".out1", a.value_channels(1), config.c1_out, Init::kXavier, rng);
  }
  return a;
}

AttentionGraph build_attention_graph(const std::vector<PointCloud> &clouds,
                                     const RadialBasis &basis) {
  AttentionGraph g;
  std::vector<Eigen::Vector3d> rel;
  std::vector<double> bond;
  for (const PointCloud &c : clouds) {
    const std::size_t n = static_cast<std::size_t>(c.positions.rows());
    const Neighborhoods nb = c.neighborhoods.empty() ? fully_connected(n) : c.neighborhoods;
    if (nb.size() != n) throw ShapeError("one neighbourhood per atom required");
    auto less = [&](std::size_t a, std::size_t b) {
      for (int d = 0; d < 3; ++d)
        if (c.positions(static_cast<Eigen::Index>(a), d) != c.positions(static_cast<Eigen::Index>(b), d))
          return c.positions(static_cast<Eigen::Index>(a), d) < c.positions(static_cast<Eigen::Index>(b), d);
      return false;
    };
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<std::size_t> src = nb[i];
      std::stable_sort(src.begin(), src.end(), less);
      for (std::size_t j : src) {
        if (j == i) throw ConfigError("neighbourhoods must exclude the atom itself");
        if (j >= n) throw ShapeError("neighbour index out of range");
        Eigen::Vector3d d = (c.positions.row(static_cast<Eigen::Index>(j)) -
                             c.positions.row(static_cast<Eigen::Index>(i))).transpose();
        if (d.norm() == 0.0) throw GeometryError("coincident neighbour positions");
        g.target.push_back(g.n_nodes + i);
        g.source.push_back(g.n_nodes + j);
        rel.push_back(d);
        bond.push_back(c.bonds.size() == 0
                           ? 0.0
                           : c.bonds(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
      }
    }
    g.n_nodes += n;
  }
  const auto E = static_cast<Eigen::Index>(rel.size());
  g.features.resize(E, basis.feature_size());
  for (int J = 0; J <= kMaxHarmonic; ++J) g.harmonics[J].resize(E, 2 * J + 1);
  for (Eigen::Index e = 0; e < E; ++e) {
    const double r = rel[e].norm();
    const Eigen::Vector3d u = rel[e] / r;
    g.features.row(e) = basis.features(r, bond[e]).transpose();
    for (int J = 0; J <= kMaxHarmonic; ++J)
      g.harmonics[J].row(e) = spherical_harmonics(J, u).transpose();
  }
  return g;
}

namespace {

// Messages W^{lk}(x_ij) f_j for every edge: E x c_out (2l+1), channel-major.
ad::Var kernel_messages(ParamBinding &pb, const TFNKernel &kernel, const AttentionGraph &g,
                        const ad::Var &features, const ad::Var &gathered) {
  ad::Tape &tape = pb.tape();
  const int dl = fiber_dim(kernel.l), dk = fiber_dim(kernel.k);
  const int j0 = CouplingTable::j_min(kernel.l, kernel.k), nj = kernel.j_count();
  const auto E = static_cast<Eigen::Index>(g.n_edges());
  const auto &table = CouplingTable::instance();

  ad::Var phi = radial_profile(pb, kernel.profile, features);
  std::vector<ad::Var> parts;
  for (int J = j0; J < j0 + nj; ++J) {
    const auto &q = table.q(kernel.l, kernel.k, J);
    // Row e holds (sum_m Y_Jm Q_Jm)^T as a dk x dl row-major block.
    ad::Mat bt = ad::Mat::Zero(E, dk * dl);
    for (int m = 0; m < 2 * J + 1; ++m) {
      const ad::Mat &qm = q[static_cast<std::size_t>(m)];
      for (int b = 0; b < dk; ++b)
        for (int a = 0; a < dl; ++a) {
          const double c = qm(a, b);
          if (c != 0.0) bt.col(b * dl + a) += c * g.harmonics[J].col(m);
        }
    }
    parts.push_back(ad::bmm_rows(gathered, tape.constant(std::move(bt)), kernel.c_in, dk, dl));
  }
  ad::Var basis = parts.size() == 1 ? parts[0] : ad::concat_cols(parts);
  return ad::bmm_rows(phi, basis, kernel.c_out, nj * kernel.c_in, dl);
}

// channels * dim columns grouped into `heads` equal blocks of channels.
ad::Mat head_indicator(int channels, int dim, int heads) {
  ad::Mat s = ad::Mat::Zero(channels * dim, heads);
  const int per_head = channels / heads;
  for (int c = 0; c < channels; ++c)
    for (int a = 0; a < dim; ++a) s(c * dim + a, c / per_head) = 1.0;
  return s;
}

}  // namespace

AttentionVars equi_attention(ParamBinding &pb, const EquiAttention &layer,
                             const AttentionGraph &graph, const ad::Var &f0,
                             const ad::Var &f1) {
  ad::Tape &tape = pb.tape();
  const auto &cfg = layer.config;
  const auto N = static_cast<Eigen::Index>(graph.n_nodes);
  const auto E = static_cast<Eigen::Index>(graph.n_edges());
  const ad::Var in[2] = {f0, f1};
  const int c_in[2] = {cfg.c0_in, cfg.c1_in};
  for (int k = 0; k <= 1; ++k)
    if (c_in[k] > 0 && (!in[k].valid() || in[k].rows() != N || in[k].cols() != c_in[k] * fiber_dim(k)))
      throw ShapeError("equi_attention: input fiber shape mismatch");

  ad::Var features = tape.constant(graph.features);
  ad::Var gathered[2];
  for (int k = 0; k <= 1; ++k)
    if (c_in[k] > 0) gathered[k] = ad::gather_rows(in[k], graph.source);

  auto summed_messages = [&](const std::optional<TFNKernel> (&kernels)[2][2], int l) {
    ad::Var total;
    for (int k = 0; k <= 1; ++k) {
      if (!kernels[l][k]) continue;
      ad::Var m = kernel_messages(pb, *kernels[l][k], graph, features, gathered[k]);
      total = total.valid() ? ad::add(total, m) : m;
    }
    return total;
  };

  // Invariant scores q_i . k_ij per head.
  ad::Var scores;
  for (int l = 0; l <= 1; ++l) {
    if (layer.key_channels(l) == 0) continue;
    ad::Var q = l == 0 ? ad::matmul_rowwise(f0, pb(*layer.wq0)) : ad::mix_vectors(f1, pb(*layer.wq1));
    ad::Var k = summed_messages(layer.key, l);
    ad::Var s = ad::matmul_rowwise(ad::mul(ad::gather_rows(q, graph.target), k),
                           tape.constant(head_indicator(layer.key_channels(l), fiber_dim(l), cfg.heads)));
    scores = scores.valid() ? ad::add(scores, s) : s;
  }
  if (!scores.valid()) scores = tape.constant(ad::Mat::Zero(E, cfg.heads));
  ad::Var alpha = ad::segment_softmax(scores, graph.target, graph.n_nodes);

  AttentionVars out;
  out.alpha = alpha;
  for (int l = 0; l <= 1; ++l) {
    const int vc = layer.value_channels(l);
    if (vc == 0) continue;
    const int dl = fiber_dim(l);
    ad::Var agg;
    ad::Var msg = summed_messages(layer.value, l);
    if (msg.valid()) {
      ad::Mat spread = head_indicator(vc, dl, cfg.heads).transpose();
      ad::Var weighted = ad::mul(msg, ad::matmul_rowwise(alpha, tape.constant(spread)));
      agg = ad::scatter_add_rows(weighted, graph.target, N);
    }
    const auto &self = l == 0 ? layer.self0 : layer.self1;
    if (self) {
      ad::Var s = l == 0 ? ad::matmul_rowwise(f0, pb(*self)) : ad::mix_vectors(f1, pb(*self));
      agg = agg.valid() ? ad::add(agg, s) : s;
    }
    if (!agg.valid()) agg = tape.constant(ad::Mat::Zero(N, vc * dl));
    if (l == 0)
      out.type0 = ad::matmul_rowwise(agg, pb(*layer.out0));
    else
      out.type1 = ad::mix_vectors(agg, pb(*layer.out1));
  }
  return out;
}

AttentionResult equi_attention(const ParameterSet &ps, const EquiAttention &layer,
                               const FiberFeature &f, const Positions &positions,
                               const Neighborhoods &neighborhoods, const ad::Mat &bonds) {
  const auto n = static_cast<Eigen::Index>(positions.rows());
  PointCloud cloud{positions, bonds, neighborhoods};
  if (neighborhoods.empty()) cloud.neighborhoods = Neighborhoods(static_cast<std::size_t>(n));
  AttentionGraph g = build_attention_graph({cloud}, layer.config.basis);

  ad::Tape tape;
  ParamBinding pb(tape, ps);
  ad::Var f0, f1;
  if (layer.config.c0_in > 0) f0 = tape.constant(f.type0);
  if (layer.config.c1_in > 0) f1 = tape.constant(f.type1);
  AttentionVars v = equi_attention(pb, layer, g, f0, f1);

  AttentionResult r;
  r.features.type0 = v.type0.valid() ? v.type0.value() : ad::Mat(n, 0);
  r.features.type1 = v.type1.valid() ? v.type1.value() : ad::Mat(n, 0);
  r.alpha = v.alpha.value();
  r.target = g.target;
  r.source = g.source;
  return r;
}

EquiAttentionConfig preprocess_config(std::size_t side) {
  EquiAttentionConfig c;
  c.c0_in = static_cast<int>(side);
  c.c1_in = 0;
  c.c0_out = 0;
  c.c1_out = 1;
  c.value_c0 = 0;
  return c;
}

PointCloud point_cloud(const ChannelTensor &t) {
  const auto n = static_cast<Eigen::Index>(t.n_atoms);
  PointCloud c;
  c.positions = t.channels[kPositionChannel].topLeftCorner(n, 3);
  const Grid &b = t.channels[kBondChannel];
  c.bonds = 0.5 * (b.topLeftCorner(n, n) + b.topLeftCorner(n, n).transpose());
  return c;
}

ad::Var attention_vectors(ParamBinding &pb, const EquiAttention &layer,
                          const std::vector<const ChannelTensor *> &batch) {
  std::vector<PointCloud> clouds;
  Eigen::Index total = 0;
  for (const ChannelTensor *t : batch) {
    if (static_cast<int>(t->side()) != layer.config.c0_in)
      throw ShapeError("attention input width does not match the tensor side");
    clouds.push_back(point_cloud(*t));
    total += static_cast<Eigen::Index>(t->n_atoms);
  }
  AttentionGraph g = build_attention_graph(clouds, layer.config.basis);
  ad::Mat f0(total, layer.config.c0_in);
  Eigen::Index at = 0;
  for (const ChannelTensor *t : batch) {
    const auto n = static_cast<Eigen::Index>(t->n_atoms);
    f0.middleRows(at, n) = t->channels[kElementChannel].topRows(n);
    at += n;
  }
  ad::Tape &tape = pb.tape();
  AttentionVars v = equi_attention(pb, layer, g, tape.constant(std::move(f0)), ad::Var());
  if (!v.type1.valid() || v.type1.cols() != 3)
    throw ConfigError("preprocessing attention must produce exactly one vector channel");
  return v.type1;
}

ChannelTensor attention_preprocess(const ParameterSet &ps, const EquiAttention &layer,
                                   const ChannelTensor &t, bool residual) {
  if (t.n_atoms == 0) throw ShapeError("attention preprocessing needs at least one atom");
  ad::Tape tape;
  ParamBinding pb(tape, ps);
  const ad::Mat v = attention_vectors(pb, layer, {&t}).value();
  ChannelTensor out = t;
  Grid &c0 = out.channels[kPositionChannel];
  const auto n = static_cast<Eigen::Index>(t.n_atoms);
  if (residual) {
    c0.topLeftCorner(n, 3) += v;
  } else {
    c0.topRows(n).setZero();
    c0.topLeftCorner(n, 3) = v;
  }
  return out;
}

}  // namespace eqdit
