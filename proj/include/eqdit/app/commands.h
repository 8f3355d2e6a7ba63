// SPDX-License-Identifier: Apache-2.0

#ifndef EQDIT_APP_COMMANDS_H_
#define EQDIT_APP_COMMANDS_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <vector>

#include "eqdit/app/checkpoint.h"
#include "eqdit/app/config.h"
#include "eqdit/encoding/tensor_cache.h"
#include "eqdit/metrics/metrics.h"

namespace eqdit {

struct PrepareSummary {
  std::size_t read = 0;
  std::size_t encoded = 0;
  std::size_t too_large = 0;
  std::size_t unsupported = 0;
  std::filesystem::path cache;
};

// Reads config.data, strips hydrogens, encodes and writes the tensor cache
// with ring-class labels. Throws DataError when nothing is usable.
PrepareSummary cmd_prepare(const RunConfig &config);

struct TrainLog {
  std::vector<double> mse;  // per step
  std::vector<double> vlb;
};

struct TrainOptions {
  std::filesystem::path checkpoint;  // empty: keep the model in memory only
  std::function<void(long step, const ModelBundle &)> on_checkpoint;
};

// Minibatch training on the hybrid loss. Throws NumericalError on a
// non-finite loss after dumping the offending batch next to the checkpoint
// (or to the log when there is no checkpoint path).
ModelBundle train_model(const RunConfig &config, const TensorCache &cache,
                        const TrainOptions &options = {}, TrainLog *log = nullptr);

// Loads the cache named by the config and trains.
ModelBundle cmd_train(const RunConfig &config, const std::filesystem::path &checkpoint,
                      TrainLog *log = nullptr);

struct SampleOptions {
  std::size_t n = 0;
  std::optional<RingClass> label;
  std::uint64_t seed = 0;
  std::filesystem::path out_dir;
};

// Writes sample_<k>.sdf files and manifest.txt into out_dir; returns the
// written structure paths.
std::vector<std::filesystem::path> sample_molecules(const ModelBundle &model,
                                                    const SampleOptions &options);
std::vector<std::filesystem::path> cmd_sample(const std::filesystem::path &checkpoint,
                                              const SampleOptions &options);

// Reads structure files (or directories of them), skipping unreadable files
// with a warning. Throws DataError when no molecule was read.
std::vector<Molecule> read_molecules(const std::vector<std::filesystem::path> &paths);

struct EvaluateOutput {
  std::filesystem::path report;  // key = value file; empty to skip
  std::filesystem::path csv;     // header plus one row; empty to skip
};

MetricReport cmd_evaluate(const std::vector<std::filesystem::path> &paths,
                          const EvaluateOptions &options, const EvaluateOutput &output);

}  // namespace eqdit

#endif  // EQDIT_APP_COMMANDS_H_
