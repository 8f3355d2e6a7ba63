// SPDX-License-Identifier: Apache-2.0

#ifndef EQDIT_APP_CHECKPOINT_H_
#define EQDIT_APP_CHECKPOINT_H_

#include <cstddef>
#include <filesystem>
#include <istream>
#include <map>
#include <ostream>

#include "eqdit/app/config.h"
#include "eqdit/dit/model.h"
#include "eqdit/nn/params.h"

namespace eqdit {

inline constexpr int kCheckpointVersion = 1;

// A model built from a RunConfig together with its parameters.
struct ModelBundle {
  RunConfig config;
  ParameterSet params;
  DiTModel model;
  std::map<std::size_t, std::size_t> histogram;  // heavy-atom sizes seen in training
  long step = 0;
};

// Fresh model with parameters initialised from config.seed.
ModelBundle build_model(const RunConfig &config);

// Layout: text header, then the parameters as little-endian binary32 in
// manifest order.
//   eqdit-checkpoint <version>
//   step <n>
//   config <line count>
//   <key = value lines>
//   params <count> <total scalars>
//   <name> <rows> <cols> <offset>      (one line per parameter)
//   histogram <size>:<count>...
//   end
void write_checkpoint(std::ostream &out, const ModelBundle &m);
ModelBundle read_checkpoint(std::istream &in);

void save_checkpoint(const std::filesystem::path &path, const ModelBundle &m);
ModelBundle load_checkpoint(const std::filesystem::path &path);

}  // namespace eqdit

#endif  // EQDIT_APP_CHECKPOINT_H_
