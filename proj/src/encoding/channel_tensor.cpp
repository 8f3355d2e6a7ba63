// SPDX-License-Identifier: Apache-2.0

#include "eqdit/encoding/channel_tensor.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "eqdit/error.h"

namespace eqdit {

ChannelTensor ChannelTensor::zeros(std::size_t side) {
  ChannelTensor t;
  const auto n = static_cast<Eigen::Index>(side);
  for (auto &c : t.channels) c = Grid::Zero(n, n);
  t.mask.assign(side, false);
  return t;
}

Vocabulary default_vocabulary() {
  return {elements::C, elements::N, elements::O, elements::F};
}

ChannelTensor encode_molecule(const Molecule &m, std::size_t n_max,
                              std::span<const Element> vocab) {
  if (n_max < std::max<std::size_t>(vocab.size(), 3))
    throw ConfigError("grid side " + std::to_string(n_max)
                      + " cannot hold the vocabulary and 3 coordinates");
  if (m.size() > n_max)
    throw CapacityError("molecule has " + std::to_string(m.size())
                        + " atoms, capacity is " + std::to_string(n_max));

  ChannelTensor t = ChannelTensor::zeros(n_max);
  t.n_atoms = m.size();
  if (m.empty()) return t;

  Eigen::Vector3d centre = Eigen::Vector3d::Zero();
  for (const auto &a : m.atoms()) centre += a.position;
  centre /= static_cast<double>(m.size());

  for (std::size_t i = 0; i < m.size(); ++i) {
    const Atom &a = m.atom(i);
    auto it = std::find(vocab.begin(), vocab.end(), a.element);
    if (it == vocab.end())
      throw VocabularyError("element with atomic number "
                            + std::to_string(a.element.atomic_number())
                            + " is outside the vocabulary");
    const auto row = static_cast<Eigen::Index>(i);
    Eigen::Vector3d p = a.position - centre;
    for (int k = 0; k < 3; ++k) t.channels[kPositionChannel](row, k) = p[k];
    t.channels[kElementChannel](row, it - vocab.begin()) = 1.0;
    t.mask[i] = true;
  }
  for (const auto &b : m.bonds()) {
    const auto i = static_cast<Eigen::Index>(b.i), j = static_cast<Eigen::Index>(b.j);
    t.channels[kBondChannel](i, j) = b.order;
    t.channels[kBondChannel](j, i) = b.order;
  }
  return t;
}

Molecule decode_tensor(const ChannelTensor &t, std::span<const Element> vocab,
                       double presence_threshold) {
  const std::size_t side = t.side();
  const Grid &pos = t.channels[kPositionChannel];
  const Grid &el = t.channels[kElementChannel];
  const Grid &bonds = t.channels[kBondChannel];
  const auto n_vocab = static_cast<Eigen::Index>(std::min(vocab.size(), side));

  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < side; ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    bool present = t.has_mask() ? static_cast<bool>(t.mask[i])
                                : n_vocab > 0 && el.row(r).head(n_vocab).maxCoeff()
                                                     > presence_threshold;
    if (present) rows.push_back(i);
  }

  Molecule m;
  for (std::size_t i : rows) {
    const auto r = static_cast<Eigen::Index>(i);
    Eigen::Index best = 0;
    for (Eigen::Index k = 1; k < n_vocab; ++k)
      if (el(r, k) > el(r, best)) best = k;
    Atom atom;
    atom.element = vocab.empty() ? Element{} : vocab[static_cast<std::size_t>(best)];
    atom.position = {pos(r, 0), pos(r, 1), pos(r, 2)};
    if (!atom.position.allFinite()) atom.position.setZero();
    m.add_atom(atom);
  }
  for (std::size_t a = 0; a < rows.size(); ++a) {
    for (std::size_t b = a + 1; b < rows.size(); ++b) {
      const auto i = static_cast<Eigen::Index>(rows[a]);
      const auto j = static_cast<Eigen::Index>(rows[b]);
      double v = 0.5 * (bonds(i, j) + bonds(j, i));
      if (!std::isfinite(v)) continue;
      int order = static_cast<int>(std::clamp(std::round(v), 0.0, 3.0));
      if (order > 0) m.add_bond(a, b, order);
    }
  }
  return m;
}

std::array<Grid, kChannels> information_mask(std::size_t n_atoms,
                                             std::size_t side,
                                             std::size_t vocab_size) {
  const auto s = static_cast<Eigen::Index>(side);
  const auto n = static_cast<Eigen::Index>(std::min(n_atoms, side));
  std::array<Grid, kChannels> mask;
  for (auto &c : mask) c = Grid::Zero(s, s);
  mask[kPositionChannel].topLeftCorner(n, 3).setOnes();
  mask[kElementChannel]
      .topLeftCorner(n, static_cast<Eigen::Index>(std::min(vocab_size, side)))
      .setOnes();
  mask[kBondChannel].topLeftCorner(n, n).setOnes();
  return mask;
}

}  // namespace eqdit
