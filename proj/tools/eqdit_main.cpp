// SPDX-License-Identifier: Apache-2.0
//
// Command-line entry point: prepare, train, sample, evaluate.
// Exit codes: 0 success, 1 usage or configuration error, 2 data error,
// 3 numerical failure.

#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "eqdit/app/commands.h"
#include "eqdit/error.h"

namespace {

using namespace eqdit;

RunConfig make_config(const std::string &file, const std::vector<std::string> &overrides) {
  RunConfig c;
  if (!file.empty()) c = load_run_config(file);
  for (const std::string &kv : overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
    set_config_value(c, kv.substr(0, eq), kv.substr(eq + 1));
  }
  c.validate();
  return c;
}

std::optional<RingClass> label_arg(const std::string &s) {
  if (s.empty()) return std::nullopt;
  auto c = parse_ring_class(s);
  if (!c) throw ConfigError("unknown class '" + s + "'; expected cyclic or noncyclic");
  return c;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Equivariant diffusion transformer for small-molecule generation"};
  app.require_subcommand(1);
  std::string level = "info";
  app.add_option("--log-level", level, "trace, debug, info, warn, error or off");

  std::string config_file;
  std::vector<std::string> overrides;
  auto add_config = [&](CLI::App *cmd) {
    cmd->add_option("-c,--config", config_file, "key = value configuration file");
    cmd->add_option("-s,--set", overrides, "override a config key (key=value), repeatable")
        ->allow_extra_args(false);
  };

  CLI::App *prepare = app.add_subcommand("prepare", "encode structure files into the tensor cache");
  add_config(prepare);
  std::vector<std::string> data;
  prepare->add_option("data", data, "structure files (.sdf, .mol, .xyz); overrides the data key");

  CLI::App *train = app.add_subcommand("train", "train a model on the tensor cache");
  add_config(train);
  std::string checkpoint = "model.ckpt";
  train->add_option("-o,--checkpoint", checkpoint, "checkpoint output path")->capture_default_str();

  CLI::App *sample = app.add_subcommand("sample", "generate molecules from a checkpoint");
  sample->add_option("-m,--checkpoint", checkpoint, "trained checkpoint")->required();
  SampleOptions so;
  std::string label, out_dir = "samples";
  sample->add_option("-n,--count", so.n, "number of molecules")->required();
  sample->add_option("--label", label, "cyclic or noncyclic (conditional checkpoints only)");
  sample->add_option("--seed", so.seed, "sampling seed")->capture_default_str();
  sample->add_option("-o,--out", out_dir, "output directory")->capture_default_str();

  CLI::App *evaluate = app.add_subcommand("evaluate", "score structure files");
  std::vector<std::string> inputs;
  std::string target, report, csv;
  evaluate->add_option("inputs", inputs, "structure files or directories")->required();
  evaluate->add_option("--target", target, "class for class_accuracy: cyclic or noncyclic");
  evaluate->add_option("--report", report, "key = value report file");
  evaluate->add_option("--csv", csv, "CSV report file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    spdlog::set_level(spdlog::level::from_str(level));
    if (prepare->parsed()) {
      RunConfig c = make_config(config_file, overrides);
      if (!data.empty()) c.data = data;
      cmd_prepare(c);
    } else if (train->parsed()) {
      cmd_train(make_config(config_file, overrides), checkpoint);
    } else if (sample->parsed()) {
      so.label = label_arg(label);
      so.out_dir = out_dir;
      cmd_sample(checkpoint, so);
    } else if (evaluate->parsed()) {
      EvaluateOptions eo;
      eo.target = label_arg(target);
      std::vector<std::filesystem::path> paths(inputs.begin(), inputs.end());
      const MetricReport r = cmd_evaluate(paths, eo, {report, csv});
      write_report(std::cout, r);
    }
  } catch (const ConfigError &e) {
    spdlog::error("{}", e.what());
    return 1;
  } catch (const NumericalError &e) {
    spdlog::error("{}", e.what());
    return 3;
  } catch (const std::exception &e) {
    spdlog::error("{}", e.what());
    return 2;
  }
  return 0;
}
