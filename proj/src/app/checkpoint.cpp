// SPDX-License-Identifier: Apache-2.0

#include "eqdit/app/checkpoint.h"

#include <algorithm>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "eqdit/encoding/tensor_cache.h"
#include "eqdit/error.h"

namespace eqdit {
namespace {

std::string next_line(std::istream &in, std::size_t &no) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("checkpoint: unexpected end of header", no + 1);
  ++no;
  return line;
}

// Reads "<word> <values...>" and checks the leading word.
std::istringstream expect(std::istream &in, std::size_t &no, const std::string &word) {
  std::istringstream fields(next_line(in, no));
  std::string head;
  fields >> head;
  if (head != word) throw ParseError("checkpoint: expected '" + word + "'", no);
  return fields;
}

}  // namespace

ModelBundle build_model(const RunConfig &config) {
  config.validate();
  ModelBundle m;
  m.config = config;
  std::mt19937_64 rng(config.seed);
  m.model = DiTModel::create(m.params, config.dit_config(), config.attention_config(),
                             config.residual, rng);
  m.params.round_to_float();
  return m;
}

void write_checkpoint(std::ostream &out, const ModelBundle &m) {
  std::ostringstream cfg;
  write_run_config(cfg, m.config);
  const std::string text = cfg.str();
  const auto lines = std::count(text.begin(), text.end(), '\n');
  out << "eqdit-checkpoint " << kCheckpointVersion << '\n'
      << "step " << m.step << '\n'
      << "config " << lines << '\n'
      << text << "params " << m.params.size() << ' ' << m.params.scalar_count() << '\n';
  std::size_t offset = 0;
  for (ParamId i = 0; i < m.params.size(); ++i) {
    const ad::Mat &v = m.params.value(i);
    out << m.params.name(i) << ' ' << v.rows() << ' ' << v.cols() << ' ' << offset << '\n';
    offset += static_cast<std::size_t>(v.size());
  }
  out << "histogram";
  for (auto [size, count] : m.histogram) out << ' ' << size << ':' << count;
  out << "\nend\n";
  std::vector<float> body;
  body.reserve(offset);
  for (ParamId i = 0; i < m.params.size(); ++i) {
    const ad::Mat &v = m.params.value(i);
    for (Eigen::Index k = 0; k < v.size(); ++k) body.push_back(static_cast<float>(v.data()[k]));
  }
  write_f32_le(out, body);
}

ModelBundle read_checkpoint(std::istream &in) {
  std::size_t no = 0;
  int version = 0;
  if (!(expect(in, no, "eqdit-checkpoint") >> version))
    throw ParseError("checkpoint: missing version", no);
  if (version != kCheckpointVersion)
    throw ParseError("checkpoint: unsupported version " + std::to_string(version), no);
  long step = 0;
  if (!(expect(in, no, "step") >> step)) throw ParseError("checkpoint: bad step", no);
  std::size_t lines = 0;
  if (!(expect(in, no, "config") >> lines)) throw ParseError("checkpoint: bad config count", no);
  std::string text;
  for (std::size_t i = 0; i < lines; ++i) text += next_line(in, no) + '\n';
  std::istringstream cfg(text);
  ModelBundle m = build_model(parse_run_config(cfg));
  m.step = step;

  std::size_t count = 0, total = 0;
  if (!(expect(in, no, "params") >> count >> total)) throw ParseError("checkpoint: bad params line", no);
  if (count != m.params.size() || total != m.params.scalar_count())
    throw ParseError("checkpoint: parameter manifest does not match the configured model", no);
  std::size_t expected_offset = 0;
  for (ParamId i = 0; i < count; ++i) {
    std::istringstream f(next_line(in, no));
    std::string name;
    Eigen::Index rows = 0, cols = 0;
    std::size_t offset = 0;
    if (!(f >> name >> rows >> cols >> offset)) throw ParseError("checkpoint: bad manifest entry", no);
    const ad::Mat &v = m.params.value(i);
    if (name != m.params.name(i) || rows != v.rows() || cols != v.cols() || offset != expected_offset)
      throw ParseError("checkpoint: manifest entry '" + name + "' does not match the model", no);
    expected_offset += static_cast<std::size_t>(rows * cols);
  }
  std::istringstream hist = expect(in, no, "histogram");
  std::string item;
  while (hist >> item) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw ParseError("checkpoint: bad histogram entry", no);
    m.histogram[std::stoul(item.substr(0, colon))] = std::stoul(item.substr(colon + 1));
  }
  if (next_line(in, no) != "end") throw ParseError("checkpoint: expected 'end'", no);

  const std::vector<float> body = read_f32_le(in, total);
  std::size_t k = 0;
  for (ParamId i = 0; i < count; ++i) {
    ad::Mat &v = m.params.value(i);
    for (Eigen::Index j = 0; j < v.size(); ++j) v.data()[j] = body[k++];
  }
  if (in.peek() != std::char_traits<char>::eof()) throw ParseError("checkpoint: trailing bytes", 0);
  return m;
}

void save_checkpoint(const std::filesystem::path &path, const ModelBundle &m) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw Error("cannot write checkpoint " + tmp.string());
    write_checkpoint(out, m);
    if (!out) throw Error("failed writing checkpoint " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

ModelBundle load_checkpoint(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open checkpoint " + path.string(), 0);
  return read_checkpoint(in);
}

}  // namespace eqdit
