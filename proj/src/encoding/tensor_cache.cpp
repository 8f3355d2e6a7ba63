// SPDX-License-Identifier: Apache-2.0

#include "eqdit/encoding/tensor_cache.h"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "eqdit/error.h"

namespace eqdit {

namespace {

constexpr char kMagic[] = "eqdit-tensors";
constexpr int kVersion = 1;

std::uint32_t to_le(std::uint32_t v) {
  if constexpr (std::endian::native == std::endian::big)
    return ((v & 0xffu) << 24) | ((v & 0xff00u) << 8) | ((v >> 8) & 0xff00u)
           | (v >> 24);
  return v;
}

std::string expect_line(std::istream &in, const std::string &key,
                        std::size_t &lineno) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("missing '" + key + "' line", lineno + 1);
  ++lineno;
  if (line.rfind(key, 0) != 0)
    throw ParseError("expected '" + key + "'", lineno);
  return line.substr(key.size());
}

}  // namespace

void write_f32_le(std::ostream &out, std::span<const float> values) {
  std::vector<std::uint32_t> words(values.size());
  for (std::size_t i = 0; i < values.size(); ++i)
    words[i] = to_le(std::bit_cast<std::uint32_t>(values[i]));
  out.write(reinterpret_cast<const char *>(words.data()),
            static_cast<std::streamsize>(words.size() * sizeof(std::uint32_t)));
}

std::vector<float> read_f32_le(std::istream &in, std::size_t count) {
  std::vector<std::uint32_t> words(count);
  in.read(reinterpret_cast<char *>(words.data()),
          static_cast<std::streamsize>(count * sizeof(std::uint32_t)));
  if (static_cast<std::size_t>(in.gcount()) != count * sizeof(std::uint32_t))
    throw ParseError("truncated binary body", 0);
  std::vector<float> values(count);
  for (std::size_t i = 0; i < count; ++i)
    values[i] = std::bit_cast<float>(to_le(words[i]));
  return values;
}

std::map<std::size_t, std::size_t> TensorCache::size_histogram() const {
  std::map<std::size_t, std::size_t> h;
  for (const auto &e : entries) ++h[e.n_atoms];
  return h;
}

void write_tensor_cache(std::ostream &out, const TensorCache &cache) {
  out << kMagic << ' ' << kVersion << '\n';
  out << "shape " << cache.entries.size() << ' ' << kChannels << ' '
      << cache.side << ' ' << cache.side << '\n';
  out << "vocab";
  for (const auto &v : cache.vocab) out << ' ' << v;
  out << "\nsizes";
  for (const auto &e : cache.entries) out << ' ' << e.n_atoms;
  out << "\nlabels";
  for (std::size_t k = 0; k < cache.entries.size(); ++k)
    out << ' ' << (k < cache.labels.size() ? cache.labels[k] : -1);
  out << "\nhistogram";
  for (auto [size, count] : cache.size_histogram()) out << ' ' << size << ':' << count;
  out << "\ndata\n";

  std::vector<float> body;
  body.reserve(cache.entries.size() * kChannels * cache.side * cache.side);
  for (const auto &e : cache.entries) {
    if (e.side() != cache.side) throw ShapeError("cache entry has the wrong grid side");
    for (const auto &c : e.channels)
      for (Eigen::Index k = 0; k < c.size(); ++k)
        body.push_back(static_cast<float>(c.data()[k]));
  }
  write_f32_le(out, body);
}

TensorCache read_tensor_cache(std::istream &in) {
  std::size_t lineno = 0;
  TensorCache cache;
  {
    std::istringstream f(expect_line(in, kMagic, lineno));
    int version = 0;
    if (!(f >> version) || version != kVersion)
      throw ParseError("unsupported tensor cache version", lineno);
  }
  std::size_t count = 0, channels = 0, h = 0, w = 0;
  {
    std::istringstream f(expect_line(in, "shape", lineno));
    if (!(f >> count >> channels >> h >> w) || channels != kChannels || h != w)
      throw ParseError("bad shape line", lineno);
    cache.side = h;
  }
  {
    std::istringstream f(expect_line(in, "vocab", lineno));
    for (std::string s; f >> s;) cache.vocab.push_back(s);
  }
  std::vector<std::size_t> sizes;
  {
    std::istringstream f(expect_line(in, "sizes", lineno));
    for (std::size_t s; f >> s;) {
      if (s > cache.side) throw ParseError("entry larger than the grid", lineno);
      sizes.push_back(s);
    }
    if (sizes.size() != count) throw ParseError("sizes/count mismatch", lineno);
  }
  {
    std::istringstream f(expect_line(in, "labels", lineno));
    for (int l; f >> l;) cache.labels.push_back(l);
    if (cache.labels.size() != count) throw ParseError("labels/count mismatch", lineno);
  }
  expect_line(in, "histogram", lineno);
  expect_line(in, "data", lineno);

  const std::size_t plane = cache.side * cache.side;
  auto body = read_f32_le(in, count * kChannels * plane);
  cache.entries.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    ChannelTensor t = ChannelTensor::zeros(cache.side);
    for (std::size_t c = 0; c < kChannels; ++c)
      for (std::size_t e = 0; e < plane; ++e)
        t.channels[c].data()[e] = body[(k * kChannels + c) * plane + e];
    t.n_atoms = sizes[k];
    for (std::size_t i = 0; i < sizes[k]; ++i) t.mask[i] = true;
    cache.entries.push_back(std::move(t));
  }
  return cache;
}

void save_tensor_cache(const std::filesystem::path &path, const TensorCache &cache) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  write_tensor_cache(out, cache);
  if (!out) throw Error("write failed for " + path.string());
}

TensorCache load_tensor_cache(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return read_tensor_cache(in);
}

}  // namespace eqdit
