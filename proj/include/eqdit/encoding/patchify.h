// SPDX-License-Identifier: Apache-2.0

#ifndef EQDIT_ENCODING_PATCHIFY_H_
#define EQDIT_ENCODING_PATCHIFY_H_

#include <cstddef>
#include <vector>

#include "eqdit/encoding/channel_tensor.h"

namespace eqdit {

// Patch tokens of a ChannelTensor. Tokens run row-major over the patch grid;
// within a token, values are ordered channel, then row, then column of the
// patch, i.e. token[(c * p + r) * p + s] = channel c at (gi * p + r, gj * p + s).
struct TokenSequence {
  Grid tokens;  // (rows * cols) x (3 * p * p)
  std::size_t grid_rows = 0;
  std::size_t grid_cols = 0;
  std::size_t patch_size = 0;
};

TokenSequence patchify(const ChannelTensor &t, std::size_t p);
ChannelTensor unpatchify(const TokenSequence &s, std::size_t p);

// Flat source index (channel * side * side + row * side + col) for every token
// entry, in token order. Shared with the differentiable model path.
std::vector<std::size_t> patch_gather_index(std::size_t side, std::size_t p);

}  // namespace eqdit

#endif  // EQDIT_ENCODING_PATCHIFY_H_
