// SPDX-License-Identifier: Apache-2.0

#include "eqdit/app/commands.h"

#include <cmath>
#include <fstream>
#include <random>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "eqdit/diffusion/diffusion.h"
#include "eqdit/error.h"
#include "eqdit/molgraph/bonds.h"
#include "eqdit/molgraph/hydrogens.h"
#include "eqdit/molgraph/structure_io.h"

namespace eqdit {
namespace {

void dump_batch(const std::filesystem::path &checkpoint, long step, const std::vector<std::size_t> &entries,
                const TrainBatch &batch, const LossTerms &loss) {
  std::string text = fmt::format("step {}\nmse {}\nvlb {}\n", step, loss.mse, loss.vlb);
  for (std::size_t r = 0; r < entries.size(); ++r) {
    const auto row = static_cast<Eigen::Index>(r);
    text += fmt::format("entry {} t {} max|xt| {} max|x0| {}\n", entries[r], batch.t[r],
                        batch.xt.row(row).cwiseAbs().maxCoeff(), batch.x0.row(row).cwiseAbs().maxCoeff());
  }
  if (checkpoint.empty()) {
    spdlog::error("non-finite loss; offending batch:\n{}", text);
    return;
  }
  const std::filesystem::path path = checkpoint.string() + ".nonfinite.txt";
  std::ofstream(path) << text;
  spdlog::error("non-finite loss at step {}; batch written to {}", step, path.string());
}

}  // namespace

PrepareSummary cmd_prepare(const RunConfig &config) {
  config.validate();
  if (config.data.empty()) throw ConfigError("prepare needs at least one data file");
  const Vocabulary vocab = config.vocabulary();
  TensorCache cache;
  cache.side = config.n_max;
  cache.vocab = config.vocab;
  PrepareSummary s;
  for (const std::string &file : config.data) {
    const std::vector<Molecule> mols = read_structures(file, format_from_path(file));
    for (const Molecule &raw : mols) {
      ++s.read;
      const Molecule bonded =
          raw.bonds().empty() && raw.size() > 1 ? infer_bonds(raw, BondMode::kGeometry) : raw;
      const Molecule heavy = strip_hydrogens(bonded);
      try {
        cache.entries.push_back(encode_molecule(heavy, config.n_max, vocab));
        cache.labels.push_back(static_cast<int>(ring_class_of(heavy)));
        ++s.encoded;
      } catch (const CapacityError &) {
        ++s.too_large;
      } catch (const VocabularyError &) {
        ++s.unsupported;
      }
    }
  }
  if (s.too_large) spdlog::warn("skipped {} molecules with more than {} heavy atoms", s.too_large, config.n_max);
  if (s.unsupported) spdlog::warn("skipped {} molecules with elements outside the vocabulary", s.unsupported);
  if (s.encoded == 0) throw DataError("no usable molecules in the input files");
  s.cache = resolve_cache_path(config);
  if (s.cache.has_parent_path()) std::filesystem::create_directories(s.cache.parent_path());
  save_tensor_cache(s.cache, cache);
  spdlog::info("encoded {} of {} molecules into {}", s.encoded, s.read, s.cache.string());
  return s;
}

ModelBundle train_model(const RunConfig &config, const TensorCache &cache, const TrainOptions &options,
                        TrainLog *log) {
  if (cache.entries.empty()) throw DataError("the tensor cache is empty");
  if (cache.side != config.n_max || cache.vocab != config.vocab)
    throw ConfigError("the tensor cache was prepared with a different n_max or vocabulary");
  ModelBundle m = build_model(config);
  m.histogram = cache.size_histogram();
  const DiffusionSchedule sched = config.schedule();
  const std::size_t side = config.n_max, vocab = config.vocab.size();
  const auto cells = static_cast<Eigen::Index>(kChannels * side * side);
  const int B = config.batch_size;

  Adam adam(m.params, config.adam_options());
  std::seed_seq seq{static_cast<std::uint32_t>(config.seed), static_cast<std::uint32_t>(config.seed >> 32), 1u};
  std::mt19937_64 rng(seq);
  std::uniform_int_distribution<std::size_t> pick(0, cache.entries.size() - 1);
  std::uniform_int_distribution<int> pick_t(1, sched.steps());
  HybridLossOptions loss_options;
  loss_options.lambda = config.vlb_weight;

  auto save = [&](long step) {
    m.step = step;
    ModelBundle out = m;
    if (adam.ema()) out.params = *adam.ema();
    if (!options.checkpoint.empty()) save_checkpoint(options.checkpoint, out);
    if (options.on_checkpoint) options.on_checkpoint(step, out);
  };

  double mse_avg = 0.0, vlb_avg = 0.0;
  for (long step = 0; step < config.train_steps; ++step) {
    TrainBatch batch;
    batch.x0.resize(B, cells);
    batch.xt.resize(B, cells);
    batch.eps.resize(B, cells);
    batch.mask.resize(B, cells);
    std::vector<std::size_t> entries;
    std::vector<ChannelTensor> noisy;
    std::vector<int> steps, labels;
    for (int b = 0; b < B; ++b) {
      const std::size_t e = pick(rng);
      const ChannelTensor &x = cache.entries[e];
      const int t = pick_t(rng);
      batch.x0.row(b) = flatten(x);
      batch.mask.row(b) = flat_mask(x.n_atoms, side, vocab);
      batch.eps.row(b) = masked_noise(x.n_atoms, side, vocab, rng);
      batch.xt.row(b) = q_sample(batch.x0.row(b), t, batch.eps.row(b), sched);
      batch.t.push_back(t);
      entries.push_back(e);
      steps.push_back(t - 1);
      labels.push_back(config.conditional ? cache.labels[e] : -1);
      noisy.push_back(unflatten(batch.xt.row(b), side, x.n_atoms));
    }
    batch.labels = labels;
    std::vector<const ChannelTensor *> inputs;
    for (const ChannelTensor &x : noisy) inputs.push_back(&x);

    Gradients grads = m.params.zero_like();
    ad::Tape tape;
    ParamBinding pb(tape, m.params, &grads);
    const LossTerms loss = hybrid_loss(dit_forward(pb, m.model, inputs, steps, labels), batch, sched,
                                       loss_options);
    const double total = loss.total.value()(0, 0);
    if (!std::isfinite(total)) {
      dump_batch(options.checkpoint, step, entries, batch, loss);
      throw NumericalError(fmt::format("non-finite loss at step {}", step));
    }
    tape.backward(loss.total);
    adam.set_learning_rate(config.learning_rate_at(step));
    adam.step(m.params, grads);

    if (log) {
      log->mse.push_back(loss.mse);
      log->vlb.push_back(loss.vlb);
    }
    mse_avg = step == 0 ? loss.mse : 0.98 * mse_avg + 0.02 * loss.mse;
    vlb_avg = step == 0 ? loss.vlb : 0.98 * vlb_avg + 0.02 * loss.vlb;
    if ((step + 1) % config.log_every == 0 || step == 0)
      spdlog::info("step {} mse {:.5f} vlb {:.5f}", step + 1, mse_avg, vlb_avg);
    if ((step + 1) % config.checkpoint_every == 0 && step + 1 < config.train_steps) save(step + 1);
  }
  save(config.train_steps);
  if (adam.ema()) m.params = *adam.ema();
  return m;
}

ModelBundle cmd_train(const RunConfig &config, const std::filesystem::path &checkpoint, TrainLog *log) {
  config.validate();
  const std::filesystem::path path = resolve_cache_path(config);
  if (!std::filesystem::exists(path)) throw DataError("tensor cache not found: " + path.string());
  const TensorCache cache = load_tensor_cache(path);
  spdlog::info("training on {} molecules for {} steps", cache.entries.size(), config.train_steps);
  TrainOptions options;
  options.checkpoint = checkpoint;
  return train_model(config, cache, options, log);
}

std::vector<std::filesystem::path> sample_molecules(const ModelBundle &m, const SampleOptions &options) {
  GenerateOptions go;
  if (options.label) go.label = static_cast<int>(*options.label);
  go.bond_mode = m.config.bond_mode;
  go.batch = static_cast<std::size_t>(m.config.sample_batch);
  go.seed = options.seed;
  const std::vector<Molecule> mols =
      generate(options.n, m.histogram, m.params, m.model, m.config.schedule(), m.config.vocabulary(), go);

  std::filesystem::create_directories(options.out_dir);
  std::vector<std::filesystem::path> written;
  std::ofstream manifest(options.out_dir / "manifest.txt");
  manifest << "samples " << mols.size() << "\nseed " << options.seed << "\nlabel "
           << (options.label ? ring_class_name(*options.label) : "none") << '\n';
  for (std::size_t k = 0; k < mols.size(); ++k) {
    const std::string name = fmt::format("sample_{:05d}", k);
    const std::filesystem::path path = options.out_dir / (name + ".sdf");
    std::ofstream out(path);
    write_sdf(out, mols[k], name);
    if (!out) throw Error("failed writing " + path.string());
    manifest << path.filename().string() << '\n';
    written.push_back(path);
  }
  if (!manifest) throw Error("failed writing the sample manifest");
  spdlog::info("wrote {} samples to {}", mols.size(), options.out_dir.string());
  return written;
}

std::vector<std::filesystem::path> cmd_sample(const std::filesystem::path &checkpoint,
                                              const SampleOptions &options) {
  const ModelBundle m = load_checkpoint(checkpoint);
  if (options.label && !m.config.conditional)
    throw ConfigError("a label was given but the checkpoint was trained without classes");
  return sample_molecules(m, options);
}

std::vector<Molecule> read_molecules(const std::vector<std::filesystem::path> &paths) {
  std::vector<std::filesystem::path> files;
  for (const auto &p : paths) {
    if (std::filesystem::is_directory(p)) {
      std::vector<std::filesystem::path> found;
      for (const auto &e : std::filesystem::directory_iterator(p)) {
        const std::string ext = e.path().extension().string();
        if (ext == ".sdf" || ext == ".mol" || ext == ".xyz") found.push_back(e.path());
      }
      std::sort(found.begin(), found.end());
      files.insert(files.end(), found.begin(), found.end());
    } else {
      files.push_back(p);
    }
  }
  std::vector<Molecule> mols;
  for (const auto &f : files) {
    try {
      if (!std::filesystem::is_regular_file(f)) throw ParseError("no such file", 0);
      for (Molecule &m : read_structures(f, format_from_path(f))) mols.push_back(std::move(m));
    } catch (const Error &e) {
      spdlog::warn("skipping {}: {}", f.string(), e.what());
    }
  }
  if (mols.empty()) throw DataError("no molecules could be read");
  return mols;
}

MetricReport cmd_evaluate(const std::vector<std::filesystem::path> &paths, const EvaluateOptions &options,
                          const EvaluateOutput &output) {
  const MetricReport r = evaluate(read_molecules(paths), options);
  if (!output.report.empty()) {
    std::ofstream out(output.report);
    write_report(out, r);
    if (!out) throw Error("failed writing " + output.report.string());
  }
  if (!output.csv.empty()) {
    std::ofstream out(output.csv);
    out << report_csv_header() << '\n' << report_csv_row(r) << '\n';
    if (!out) throw Error("failed writing " + output.csv.string());
  }
  return r;
}

}  // namespace eqdit
