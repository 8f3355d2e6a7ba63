// SPDX-License-Identifier: Apache-2.0

#ifndef EQDIT_ENCODING_CHANNEL_TENSOR_H_
#define EQDIT_ENCODING_CHANNEL_TENSOR_H_

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "eqdit/molgraph/element.h"
#include "eqdit/molgraph/molecule.h"

namespace eqdit {

using Grid = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Channel indices.
inline constexpr int kPositionChannel = 0;
inline constexpr int kElementChannel = 1;
inline constexpr int kBondChannel = 2;
inline constexpr int kChannels = 3;

// Three-channel molecule image on an n_max x n_max grid. Row i of every
// channel belongs to atom i:
//   channel 0: centred (x, y, z) in columns 0..2
//   channel 1: one-hot element over the vocabulary
//   channel 2: bond order between atoms i and j
// `mask` marks real atom rows; an empty mask means "unknown" (e.g. for raw
// network outputs).
struct ChannelTensor {
  std::array<Grid, kChannels> channels;
  std::vector<bool> mask;
  std::size_t n_atoms = 0;

  static ChannelTensor zeros(std::size_t side);

  std::size_t side() const { return static_cast<std::size_t>(channels[0].rows()); }
  bool has_mask() const { return !mask.empty(); }
  bool operator==(const ChannelTensor &) const = default;
};

using Vocabulary = std::vector<Element>;

// Default vocabulary for heavy-atom QM9-style data.
Vocabulary default_vocabulary();

// Throws CapacityError (too many atoms) or VocabularyError.
ChannelTensor encode_molecule(const Molecule &m, std::size_t n_max,
                              std::span<const Element> vocab);

// Never throws on content; decodes whatever the tensor holds.
Molecule decode_tensor(const ChannelTensor &t, std::span<const Element> vocab,
                       double presence_threshold = 0.5);

// 1 where an entry carries information for an n_atoms molecule (positions in
// columns 0..2, one-hot columns of the vocabulary, the n_atoms x n_atoms bond
// block), 0 elsewhere. Noise and losses are restricted to these entries.
std::array<Grid, kChannels> information_mask(std::size_t n_atoms,
                                             std::size_t side,
                                             std::size_t vocab_size);

}  // namespace eqdit

#endif  // EQDIT_ENCODING_CHANNEL_TENSOR_H_
