// SPDX-License-Identifier: Apache-2.0

#ifndef EQDIT_ENCODING_TENSOR_CACHE_H_
#define EQDIT_ENCODING_TENSOR_CACHE_H_

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "eqdit/encoding/channel_tensor.h"

namespace eqdit {

// Little-endian IEEE-754 binary32 streams, independent of host byte order.
void write_f32_le(std::ostream &out, std::span<const float> values);
std::vector<float> read_f32_le(std::istream &in, std::size_t count);

// Encoded dataset as written by `prepare`.
//
// File layout: a text header, one field per line,
//   eqdit-tensors 1
//   shape <count> 3 <side> <side>
//   vocab <symbol>...
//   sizes <n_atoms per entry>...
//   labels <class label per entry, -1 when unlabelled>...
//   histogram <size>:<count>...
//   data
// followed by count * 3 * side * side binary32 values (little endian), entry
// by entry, channel-major then row-major. The mask of entry k is the first
// sizes[k] rows.
struct TensorCache {
  std::vector<std::string> vocab;
  std::size_t side = 0;
  std::vector<ChannelTensor> entries;
  std::vector<int> labels;

  // Molecule-size histogram (heavy atoms).
  std::map<std::size_t, std::size_t> size_histogram() const;
};

void write_tensor_cache(std::ostream &out, const TensorCache &cache);
TensorCache read_tensor_cache(std::istream &in);

void save_tensor_cache(const std::filesystem::path &path, const TensorCache &cache);
TensorCache load_tensor_cache(const std::filesystem::path &path);

}  // namespace eqdit

#endif  // EQDIT_ENCODING_TENSOR_CACHE_H_
