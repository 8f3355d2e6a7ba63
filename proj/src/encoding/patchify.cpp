// SPDX-License-Identifier: Apache-2.0

#include "eqdit/encoding/patchify.h"

#include <string>

#include "eqdit/error.h"

namespace eqdit {

std::vector<std::size_t> patch_gather_index(std::size_t side, std::size_t p) {
  if (p == 0 || side % p != 0)
    throw ShapeError("patch size " + std::to_string(p)
                     + " does not divide grid side " + std::to_string(side));
  const std::size_t g = side / p;
  std::vector<std::size_t> index;
  index.reserve(kChannels * side * side);
  for (std::size_t gi = 0; gi < g; ++gi)
    for (std::size_t gj = 0; gj < g; ++gj)
      for (std::size_t c = 0; c < kChannels; ++c)
        for (std::size_t r = 0; r < p; ++r)
          for (std::size_t s = 0; s < p; ++s)
            index.push_back(c * side * side + (gi * p + r) * side + gj * p + s);
  return index;
}

TokenSequence patchify(const ChannelTensor &t, std::size_t p) {
  const std::size_t side = t.side();
  for (const auto &c : t.channels)
    if (static_cast<std::size_t>(c.rows()) != side
        || static_cast<std::size_t>(c.cols()) != side)
      throw ShapeError("channels must share one square grid");
  const auto index = patch_gather_index(side, p);
  const std::size_t g = side / p;
  const std::size_t dim = kChannels * p * p;

  TokenSequence s;
  s.grid_rows = s.grid_cols = g;
  s.patch_size = p;
  s.tokens.resize(static_cast<Eigen::Index>(g * g), static_cast<Eigen::Index>(dim));
  const std::size_t plane = side * side;
  double *out = s.tokens.data();
  for (std::size_t k = 0; k < index.size(); ++k) {
    const std::size_t c = index[k] / plane, rem = index[k] % plane;
    out[k] = t.channels[c].data()[rem];
  }
  return s;
}

ChannelTensor unpatchify(const TokenSequence &s, std::size_t p) {
  if (p == 0 || s.patch_size != p)
    throw ShapeError("token sequence was built with a different patch size");
  const std::size_t dim = kChannels * p * p;
  if (static_cast<std::size_t>(s.tokens.cols()) != dim)
    throw ShapeError("token dimension " + std::to_string(s.tokens.cols())
                     + " does not match 3*p*p = " + std::to_string(dim));
  if (s.grid_rows != s.grid_cols
      || static_cast<std::size_t>(s.tokens.rows()) != s.grid_rows * s.grid_cols)
    throw ShapeError("token count does not match a square patch grid");

  const std::size_t side = s.grid_rows * p;
  ChannelTensor t = ChannelTensor::zeros(side);
  t.mask.clear();
  const auto index = patch_gather_index(side, p);
  const std::size_t plane = side * side;
  const double *in = s.tokens.data();
  for (std::size_t k = 0; k < index.size(); ++k) {
    const std::size_t c = index[k] / plane, rem = index[k] % plane;
    t.channels[c].data()[rem] = in[k];
  }
  return t;
}

}  // namespace eqdit
