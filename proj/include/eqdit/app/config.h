// SPDX-License-Identifier: Apache-2.0

#ifndef EQDIT_APP_CONFIG_H_
#define EQDIT_APP_CONFIG_H_

#include <cstdint>
#include <filesystem>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "eqdit/diffusion/diffusion.h"
#include "eqdit/dit/model.h"
#include "eqdit/encoding/channel_tensor.h"
#include "eqdit/equiattn/attention.h"
#include "eqdit/molgraph/bonds.h"

namespace eqdit {

// Everything a run needs, read from a "key = value" file. Unknown keys,
// malformed values and inconsistent combinations raise ConfigError.
struct RunConfig {
  // data
  std::vector<std::string> data;  // structure files read by prepare
  std::string cache;              // tensor cache; empty selects the default
  std::size_t n_max = 9;
  std::vector<std::string> vocab{"C", "N", "O", "F"};

  // model
  int hidden = 128;
  int depth = 6;
  int heads = 4;
  int patch = 3;
  int time_dim = 256;
  int mlp_ratio = 4;
  int attn_heads = 4;
  int radial_hidden = 32;
  bool residual = false;
  bool conditional = false;

  // diffusion
  int diffusion_steps = 1000;
  double beta_start = 1e-4;
  double beta_end = 2e-2;
  double vlb_weight = 1.0;

  // optimizer
  double learning_rate = 1e-3;
  int train_steps = 5000;
  int batch_size = 16;
  std::uint64_t seed = 0;
  double grad_clip = 1.0;
  double ema_decay = 0.0;
  int lr_decay_steps = 0;  // linear decay over the final steps; 0 keeps the rate fixed
  int log_every = 100;
  int checkpoint_every = 1000;

  // sampling
  BondMode bond_mode = BondMode::kGeometry;
  int sample_batch = 50;

  void validate() const;

  DiTConfig dit_config() const;
  EquiAttentionConfig attention_config() const;
  DiffusionSchedule schedule() const;
  Vocabulary vocabulary() const;
  AdamOptions adam_options() const;
  double learning_rate_at(long step) const;
};

// Sets one field from its textual form.
void set_config_value(RunConfig &c, const std::string &key, const std::string &value);

// Parses "key = value" lines; '#' starts a comment. The result is validated.
RunConfig parse_run_config(std::istream &in);
RunConfig load_run_config(const std::filesystem::path &path);

// Writes every field, one per line, in a form parse_run_config accepts.
void write_run_config(std::ostream &out, const RunConfig &c);

// Names of all keys in file order.
std::vector<std::string> config_keys();

// Cache path used when `cache` is empty: $EQDIT_CACHE_DIR/tensors.eqt, else
// ./eqdit-cache/tensors.eqt.
std::filesystem::path resolve_cache_path(const RunConfig &c);

}  // namespace eqdit

#endif  // EQDIT_APP_CONFIG_H_
