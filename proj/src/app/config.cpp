// SPDX-License-Identifier: Apache-2.0

#include "eqdit/app/config.h"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "eqdit/error.h"
#include "eqdit/molgraph/element.h"

namespace eqdit {
namespace {

std::string trim(const std::string &s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string &s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ','))
    if (auto t = trim(item); !t.empty()) out.push_back(t);
  return out;
}

std::string join(const std::vector<std::string> &v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + v[i];
  return out;
}

template <typename T>
T parse_number(const std::string &key, const std::string &value) {
  std::istringstream in(value);
  T out{};
  in >> out;
  if (!in || !(in >> std::ws).eof()) throw ConfigError(fmt::format("{}: bad value '{}'", key, value));
  return out;
}

bool parse_bool(const std::string &key, const std::string &value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw ConfigError(fmt::format("{}: expected true or false, got '{}'", key, value));
}

std::string fmt_double(double v) { return fmt::format("{}", v); }

struct Field {
  std::string key;
  std::function<void(RunConfig &, const std::string &)> set;
  std::function<std::string(const RunConfig &)> get;
};

template <typename T>
Field number(const std::string &key, T RunConfig::*member) {
  return {key, [key, member](RunConfig &c, const std::string &v) { c.*member = parse_number<T>(key, v); },
          [member](const RunConfig &c) {
            if constexpr (std::is_floating_point_v<T>) return fmt_double(c.*member);
            else return std::to_string(c.*member);
          }};
}

Field flag(const std::string &key, bool RunConfig::*member) {
  return {key, [key, member](RunConfig &c, const std::string &v) { c.*member = parse_bool(key, v); },
          [member](const RunConfig &c) { return std::string(c.*member ? "true" : "false"); }};
}

const std::vector<Field> &fields() {
  static const std::vector<Field> table{
      {"data", [](RunConfig &c, const std::string &v) { c.data = split_list(v); },
       [](const RunConfig &c) { return join(c.data); }},
      {"cache", [](RunConfig &c, const std::string &v) { c.cache = v; },
       [](const RunConfig &c) { return c.cache; }},
      number("n_max", &RunConfig::n_max),
      {"vocab", [](RunConfig &c, const std::string &v) { c.vocab = split_list(v); },
       [](const RunConfig &c) { return join(c.vocab); }},
      number("hidden", &RunConfig::hidden),
      number("depth", &RunConfig::depth),
      number("heads", &RunConfig::heads),
      number("patch", &RunConfig::patch),
      number("time_dim", &RunConfig::time_dim),
      number("mlp_ratio", &RunConfig::mlp_ratio),
      number("attn_heads", &RunConfig::attn_heads),
      number("radial_hidden", &RunConfig::radial_hidden),
      flag("residual", &RunConfig::residual),
      flag("conditional", &RunConfig::conditional),
      number("diffusion_steps", &RunConfig::diffusion_steps),
      number("beta_start", &RunConfig::beta_start),
      number("beta_end", &RunConfig::beta_end),
      number("vlb_weight", &RunConfig::vlb_weight),
      number("learning_rate", &RunConfig::learning_rate),
      number("train_steps", &RunConfig::train_steps),
      number("batch_size", &RunConfig::batch_size),
      number("seed", &RunConfig::seed),
      number("grad_clip", &RunConfig::grad_clip),
      number("ema_decay", &RunConfig::ema_decay),
      number("lr_decay_steps", &RunConfig::lr_decay_steps),
      number("log_every", &RunConfig::log_every),
      number("checkpoint_every", &RunConfig::checkpoint_every),
      {"bond_mode",
       [](RunConfig &c, const std::string &v) {
         if (v == "geometry") c.bond_mode = BondMode::kGeometry;
         else if (v == "channel") c.bond_mode = BondMode::kChannel;
         else throw ConfigError("bond_mode: expected geometry or channel, got '" + v + "'");
       },
       [](const RunConfig &c) {
         return std::string(c.bond_mode == BondMode::kGeometry ? "geometry" : "channel");
       }},
      number("sample_batch", &RunConfig::sample_batch),
  };
  return table;
}

}  // namespace

void RunConfig::validate() const {
  if (n_max == 0) throw ConfigError("n_max must be positive");
  if (vocab.empty()) throw ConfigError("vocab must not be empty");
  std::set<std::string> seen;
  for (const std::string &s : vocab) {
    if (!ChemTable::builtin().find(s)) throw ConfigError("vocab: unknown element '" + s + "'");
    if (s == "H") throw ConfigError("vocab: hydrogens are removed before encoding");
    if (!seen.insert(s).second) throw ConfigError("vocab: duplicate element '" + s + "'");
  }
  dit_config().validate();
  if (attn_heads <= 0 || radial_hidden <= 0) throw ConfigError("attention sizes must be positive");
  if (diffusion_steps <= 0) throw ConfigError("diffusion_steps must be positive");
  if (!(beta_start > 0.0 && beta_start <= beta_end && beta_end < 1.0))
    throw ConfigError("betas must satisfy 0 < beta_start <= beta_end < 1");
  if (!(vlb_weight >= 0.0)) throw ConfigError("vlb_weight must be non-negative");
  if (!(learning_rate >= 0.0)) throw ConfigError("learning_rate must be non-negative");
  if (train_steps < 0) throw ConfigError("train_steps must be non-negative");
  if (batch_size <= 0) throw ConfigError("batch_size must be positive");
  if (!(grad_clip >= 0.0)) throw ConfigError("grad_clip must be non-negative");
  if (!(ema_decay >= 0.0 && ema_decay < 1.0)) throw ConfigError("ema_decay must be in [0, 1)");
  if (lr_decay_steps < 0) throw ConfigError("lr_decay_steps must be non-negative");
  if (log_every <= 0 || checkpoint_every <= 0) throw ConfigError("intervals must be positive");
  if (sample_batch <= 0) throw ConfigError("sample_batch must be positive");
}

DiTConfig RunConfig::dit_config() const {
  DiTConfig d;
  d.hidden = hidden;
  d.depth = depth;
  d.heads = heads;
  d.patch = patch;
  d.side = static_cast<int>(n_max);
  d.vocab = static_cast<int>(vocab.size());
  d.classes = conditional ? 2 : 0;
  d.time_dim = time_dim;
  d.mlp_ratio = mlp_ratio;
  return d;
}

EquiAttentionConfig RunConfig::attention_config() const {
  EquiAttentionConfig a = preprocess_config(n_max);
  a.heads = attn_heads;
  a.radial_hidden = radial_hidden;
  return a;
}

DiffusionSchedule RunConfig::schedule() const {
  return make_schedule(ScheduleKind::kLinear, diffusion_steps, beta_start, beta_end);
}

Vocabulary RunConfig::vocabulary() const {
  Vocabulary v;
  for (const std::string &s : vocab) v.push_back(ChemTable::builtin().element(s));
  return v;
}

AdamOptions RunConfig::adam_options() const {
  AdamOptions o;
  o.learning_rate = learning_rate;
  o.grad_clip = grad_clip;
  o.ema_decay = ema_decay;
  return o;
}

double RunConfig::learning_rate_at(long step) const {
  const long left = static_cast<long>(train_steps) - step;
  if (lr_decay_steps <= 0 || left > lr_decay_steps) return learning_rate;
  return learning_rate * std::max(0.02, static_cast<double>(left) / lr_decay_steps);
}

void set_config_value(RunConfig &c, const std::string &key, const std::string &value) {
  for (const Field &f : fields())
    if (f.key == key) {
      f.set(c, trim(value));
      return;
    }
  throw ConfigError("unknown config key '" + key + "'");
}

RunConfig parse_run_config(std::istream &in) {
  RunConfig c;
  std::string line;
  std::size_t no = 0;
  while (std::getline(in, line)) {
    ++no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(fmt::format("config line {}: expected key = value", no));
    set_config_value(c, trim(line.substr(0, eq)), line.substr(eq + 1));
  }
  c.validate();
  return c;
}

RunConfig load_run_config(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  return parse_run_config(in);
}

void write_run_config(std::ostream &out, const RunConfig &c) {
  for (const Field &f : fields()) out << f.key << " = " << f.get(c) << '\n';
}

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const Field &f : fields()) keys.push_back(f.key);
  return keys;
}

std::filesystem::path resolve_cache_path(const RunConfig &c) {
  if (!c.cache.empty()) return c.cache;
  if (const char *dir = std::getenv("EQDIT_CACHE_DIR"); dir && *dir)
    return std::filesystem::path(dir) / "tensors.eqt";
  return std::filesystem::path("eqdit-cache") / "tensors.eqt";
}

}  // namespace eqdit
