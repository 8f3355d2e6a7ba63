// SPDX-License-Identifier: Apache-2.0

#include "eqdit/diffusion/diffusion.h"

#include <algorithm>
#include <cmath>

#include "eqdit/error.h"
#include "eqdit/molgraph/hydrogens.h"

namespace eqdit {

std::size_t DiffusionSchedule::index(int t) const {
  if (t < 1 || t > steps())
    throw ConfigError("diffusion time " + std::to_string(t) + " outside 1.." + std::to_string(steps()));
  return static_cast<std::size_t>(t - 1);
}

double DiffusionSchedule::posterior_coef_x0(int t) const {
  return beta(t) * std::sqrt(alpha_bar_prev(t)) / (1.0 - alpha_bar(t));
}

double DiffusionSchedule::posterior_coef_xt(int t) const {
  return (1.0 - alpha_bar_prev(t)) * std::sqrt(alpha(t)) / (1.0 - alpha_bar(t));
}

DiffusionSchedule make_schedule(ScheduleKind kind, int T, double beta_start, double beta_end) {
  if (kind != ScheduleKind::kLinear) throw ConfigError("unknown schedule kind");
  if (T < 1) throw ConfigError("schedule needs at least one step");
  if (!(beta_start > 0.0 && beta_start <= beta_end && beta_end < 1.0))
    throw ConfigError("schedule needs 0 < beta_start <= beta_end < 1");
  DiffusionSchedule s;
  const auto n = static_cast<std::size_t>(T);
  s.beta_.resize(n);
  s.alpha_bar_.resize(n);
  s.posterior_var_.resize(n);
  s.log_post_clipped_.resize(n);
  double prod = 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double f = T == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(T - 1);
    s.beta_[i] = beta_start + (beta_end - beta_start) * f;
    const double prev = prod;
    prod *= 1.0 - s.beta_[i];
    s.alpha_bar_[i] = prod;
    s.posterior_var_[i] = s.beta_[i] * (1.0 - prev) / (1.0 - prod);
  }
  for (std::size_t i = 0; i < n; ++i)
    s.log_post_clipped_[i] = std::log(i > 0 ? s.posterior_var_[i]
                                            : (n > 1 ? s.posterior_var_[1] : s.beta_[0]));
  return s;
}

ad::Mat q_sample(const ad::Mat &x0, int t, const ad::Mat &eps, const DiffusionSchedule &s) {
  if (x0.rows() != eps.rows() || x0.cols() != eps.cols()) throw ShapeError("q_sample: shape mismatch");
  const double ab = s.alpha_bar(t);
  return std::sqrt(ab) * x0 + std::sqrt(1.0 - ab) * eps;
}

ChannelTensor q_sample(const ChannelTensor &x0, int t, const ChannelTensor &eps,
                       const DiffusionSchedule &s) {
  ChannelTensor out = x0;
  for (int c = 0; c < kChannels; ++c) out.channels[c] = q_sample(x0.channels[c], t, eps.channels[c], s);
  return out;
}

ad::Mat flat_mask(std::size_t n_atoms, std::size_t side, std::size_t vocab) {
  const auto info = information_mask(n_atoms, side, vocab);
  const auto s2 = static_cast<Eigen::Index>(side * side);
  ad::Mat out(1, kChannels * s2);
  for (int c = 0; c < kChannels; ++c)
    out.middleCols(c * s2, s2) = Eigen::Map<const ad::Mat>(info[c].data(), 1, s2);
  return out;
}

ad::Mat masked_noise(std::size_t n_atoms, std::size_t side, std::size_t vocab,
                     std::mt19937_64 &rng) {
  ad::Mat out = flat_mask(n_atoms, side, vocab);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (Eigen::Index i = 0; i < out.size(); ++i)
    if (out.data()[i] != 0.0) out.data()[i] = normal(rng);
  return out;
}

ad::Mat flatten(const ChannelTensor &t) {
  const auto s2 = static_cast<Eigen::Index>(t.side() * t.side());
  ad::Mat out(1, kChannels * s2);
  for (int c = 0; c < kChannels; ++c)
    out.middleCols(c * s2, s2) = Eigen::Map<const ad::Mat>(t.channels[c].data(), 1, s2);
  return out;
}

ChannelTensor unflatten(const ad::Mat &row, std::size_t side, std::size_t n_atoms) {
  const auto s = static_cast<Eigen::Index>(side);
  if (row.size() != kChannels * s * s) throw ShapeError("unflatten: size mismatch");
  ChannelTensor t = ChannelTensor::zeros(side);
  for (int c = 0; c < kChannels; ++c)
    t.channels[c] = Eigen::Map<const Grid>(row.data() + c * s * s, s, s);
  t.n_atoms = n_atoms;
  t.mask.assign(side, false);
  for (std::size_t i = 0; i < n_atoms; ++i) t.mask[i] = true;
  return t;
}

ad::Mat posterior_mean(const ad::Mat &x0, const ad::Mat &xt, int t, const DiffusionSchedule &s) {
  return s.posterior_coef_x0(t) * x0 + s.posterior_coef_xt(t) * xt;
}

ad::Mat model_mean(const ad::Mat &xt, int t, const ad::Mat &eps_hat, const DiffusionSchedule &s) {
  return (xt - (s.beta(t) / std::sqrt(1.0 - s.alpha_bar(t))) * eps_hat) / std::sqrt(s.alpha(t));
}

ad::Mat model_log_variance(const ad::Mat &v, int t, const DiffusionSchedule &s) {
  const double lb = std::log(s.beta(t)), lp = s.log_posterior_variance_clipped(t);
  return (v.array() * lb + (1.0 - v.array()) * lp).matrix();
}

double gaussian_kl(double m1, double v1, double m2, double v2) {
  return 0.5 * (std::log(v2 / v1) + (v1 + (m1 - m2) * (m1 - m2)) / v2 - 1.0);
}

namespace {

constexpr double kMinProbability = 1e-12;

// Probability mass of [b, a] under N(0, 1), accurate in both tails.
double normal_mass(double a, double b) {
  const double r = 1.0 / std::sqrt(2.0);
  if (b > 0.0) return 0.5 * (std::erfc(b * r) - std::erfc(a * r));
  if (a < 0.0) return 0.5 * (std::erfc(-a * r) - std::erfc(-b * r));
  return 1.0 - 0.5 * std::erfc(a * r) - 0.5 * std::erfc(-b * r);
}

double normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI); }

// Value and derivative in log_var of the discretized negative log-likelihood.
std::pair<double, double> nll_and_grad(double resid, double log_var, double width) {
  const double sigma = std::exp(0.5 * log_var);
  const double a = (resid + 0.5 * width) / sigma, b = (resid - 0.5 * width) / sigma;
  const double p = normal_mass(a, b);
  if (p < kMinProbability) return {-std::log(kMinProbability), 0.0};
  return {-std::log(p), (a * normal_pdf(a) - b * normal_pdf(b)) / (2.0 * p)};
}

// Elementwise discretized NLL of constant residuals x_0 - mu given log_var.
ad::Var discretized_nll(const ad::Var &log_var, const ad::Mat &resid, double width) {
  ad::Mat value(log_var.rows(), log_var.cols()), grad(log_var.rows(), log_var.cols());
  for (Eigen::Index i = 0; i < value.size(); ++i) {
    auto [v, g] = nll_and_grad(resid.data()[i], log_var.value().data()[i], width);
    value.data()[i] = v;
    grad.data()[i] = g;
  }
  ad::Tape &t = log_var.tape();
  return t.record(std::move(value), {log_var}, [log_var, grad, &t](const ad::Mat &g) {
    t.accumulate(log_var, ad::Mat(g.cwiseProduct(grad)));
  });
}

}  // namespace

double discretized_nll(double x, double mean, double log_var, double width) {
  return nll_and_grad(x - mean, log_var, width).first;
}

LossTerms hybrid_loss(const ModelOutputs &out, const TrainBatch &batch,
                      const DiffusionSchedule &s, const HybridLossOptions &options) {
  const ad::Mat eps_hat = out.eps.value();
  const Eigen::Index B = eps_hat.rows(), C = eps_hat.cols();
  if (batch.eps.rows() != B || batch.eps.cols() != C || batch.mask.rows() != B ||
      batch.x0.rows() != B || batch.xt.rows() != B || static_cast<Eigen::Index>(batch.t.size()) != B)
    throw ShapeError("hybrid_loss: batch does not match the model output");
  const double count = batch.mask.sum();
  if (count <= 0.0) throw ShapeError("hybrid_loss: no informative entries");
  const ad::Mat &frozen = options.frozen_eps ? *options.frozen_eps : eps_hat;

  ad::Tape &tape = out.eps.tape();
  const ad::Mat weight = batch.mask / count;
  ad::Var mse = ad::weighted_sum(ad::square(ad::sub(out.eps, tape.constant(batch.eps))), weight);

  ad::Mat slope(B, C), offset(B, C), kl_c(B, C), kl_shift(B, C), resid(B, C);
  ad::Mat w_kl = ad::Mat::Zero(B, C), w_nll = ad::Mat::Zero(B, C);
  bool any_first = false;
  for (Eigen::Index b = 0; b < B; ++b) {
    const int t = batch.t[static_cast<std::size_t>(b)];
    const double lb = std::log(s.beta(t)), lp = s.log_posterior_variance_clipped(t);
    slope.row(b).setConstant(lb - lp);
    offset.row(b).setConstant(lp);
    const ad::Mat mu_p = model_mean(batch.xt.row(b), t, frozen.row(b), s);
    if (t > 1) {
      const ad::Mat mu_q = posterior_mean(batch.x0.row(b), batch.xt.row(b), t, s);
      const double var_q = s.posterior_variance(t);
      kl_c.row(b) = ((mu_q - mu_p).array().square() + var_q).matrix();
      kl_shift.row(b).setConstant(-(std::log(var_q) + 1.0));
      w_kl.row(b) = weight.row(b);
      resid.row(b).setZero();
    } else {
      kl_c.row(b).setOnes();
      kl_shift.row(b).setConstant(-1.0);
      resid.row(b) = batch.x0.row(b) - mu_p;
      w_nll.row(b) = weight.row(b);
      any_first = true;
    }
  }
  ad::Var log_var = ad::add_const(ad::mul_const(ad::sigmoid(out.var_logit), slope), offset);
  ad::Var kl = ad::scale(
      ad::add_const(ad::add(log_var, ad::mul_const(ad::exp(ad::scale(log_var, -1.0)), kl_c)),
                    kl_shift),
      0.5);
  ad::Var vlb = ad::weighted_sum(kl, w_kl);
  if (any_first)
    vlb = ad::add(vlb, ad::weighted_sum(discretized_nll(log_var, resid, options.bin_width), w_nll));

  LossTerms terms;
  terms.mse = mse.value()(0, 0);
  terms.vlb = vlb.value()(0, 0);
  terms.total = ad::add(mse, ad::scale(vlb, options.lambda));
  return terms;
}

ad::Mat p_sample_step(const ad::Mat &xt, int t, const Denoiser &model, const ad::Mat &mask,
                      const DiffusionSchedule &s, std::vector<std::mt19937_64> &rngs) {
  if (t < 1 || t > s.steps()) throw ConfigError("sampling step out of range");
  if (static_cast<Eigen::Index>(rngs.size()) != xt.rows())
    throw ShapeError("p_sample_step: one random stream per row required");
  ad::Mat eps_hat, v;
  model(xt, t, eps_hat, v);
  ad::Mat x = model_mean(xt, t, eps_hat, s);
  if (t > 1) {
    const ad::Mat sigma = (0.5 * model_log_variance(v, t, s).array()).exp().matrix();
    std::normal_distribution<double> normal(0.0, 1.0);
    for (Eigen::Index r = 0; r < x.rows(); ++r)
      for (Eigen::Index c = 0; c < x.cols(); ++c)
        if (mask(r, c) != 0.0) x(r, c) += sigma(r, c) * normal(rngs[static_cast<std::size_t>(r)]);
  }
  return x.cwiseProduct(mask);
}

std::vector<ChannelTensor> sample_tensors(const std::vector<std::size_t> &atom_counts,
                                          const ParameterSet &ps, const DiTModel &model,
                                          const DiffusionSchedule &s,
                                          const GenerateOptions &options) {
  if (options.label && model.config.classes == 0)
    throw ConfigError("a class label was requested from an unconditional model");
  if (options.label && (*options.label < 0 || *options.label >= model.config.classes))
    throw ConfigError("class label out of range");
  const auto side = static_cast<std::size_t>(model.config.side);
  const auto vocab = static_cast<std::size_t>(model.config.vocab);
  const std::size_t chunk = std::max<std::size_t>(1, options.batch);
  std::vector<ChannelTensor> result;
  for (std::size_t start = 0; start < atom_counts.size(); start += chunk) {
    const std::size_t count = std::min(chunk, atom_counts.size() - start);
    std::vector<std::mt19937_64> rngs;
    ad::Mat x(static_cast<Eigen::Index>(count), kChannels * static_cast<Eigen::Index>(side * side));
    ad::Mat mask(x.rows(), x.cols());
    for (std::size_t i = 0; i < count; ++i) {
      const std::size_t chain = start + i;
      std::seed_seq seq{static_cast<std::uint32_t>(options.seed),
                        static_cast<std::uint32_t>(options.seed >> 32),
                        static_cast<std::uint32_t>(chain)};
      rngs.emplace_back(seq);
      const std::size_t n = atom_counts[chain];
      if (n == 0 || n > side) throw CapacityError("sampled atom count does not fit the grid");
      x.row(static_cast<Eigen::Index>(i)) = masked_noise(n, side, vocab, rngs.back());
      mask.row(static_cast<Eigen::Index>(i)) = flat_mask(n, side, vocab);
    }
    const std::vector<int> labels(count, options.label ? *options.label : -1);
    Denoiser denoise = [&](const ad::Mat &xt, int t, ad::Mat &eps, ad::Mat &v) {
      std::vector<ChannelTensor> tensors;
      for (std::size_t i = 0; i < count; ++i)
        tensors.push_back(unflatten(xt.row(static_cast<Eigen::Index>(i)), side, atom_counts[start + i]));
      std::vector<const ChannelTensor *> ptrs;
      for (const auto &t2 : tensors) ptrs.push_back(&t2);
      ad::Tape tape;
      ParamBinding pb(tape, ps);
      ModelOutputs o = dit_forward(pb, model, ptrs, std::vector<int>(count, t - 1), labels);
      eps = o.eps.value();
      v = o.var_logit.value().unaryExpr([](double z) { return 1.0 / (1.0 + std::exp(-z)); });
    };
    for (int t = s.steps(); t >= 1; --t) x = p_sample_step(x, t, denoise, mask, s, rngs);
    for (std::size_t i = 0; i < count; ++i)
      result.push_back(unflatten(x.row(static_cast<Eigen::Index>(i)), side, atom_counts[start + i]));
  }
  return result;
}

std::vector<Molecule> generate(std::size_t n, const std::map<std::size_t, std::size_t> &sizes,
                               const ParameterSet &ps, const DiTModel &model,
                               const DiffusionSchedule &s, std::span<const Element> vocab,
                               const GenerateOptions &options) {
  if (n == 0) return {};
  if (sizes.empty()) throw ConfigError("empty molecule-size histogram");
  std::vector<std::size_t> values;
  std::vector<double> weights;
  for (auto [size, count] : sizes) {
    values.push_back(size);
    weights.push_back(static_cast<double>(count));
  }
  std::mt19937_64 rng(options.seed);
  std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());
  std::vector<std::size_t> counts(n);
  for (auto &c : counts) c = values[pick(rng)];

  std::vector<Molecule> mols;
  for (const ChannelTensor &t : sample_tensors(counts, ps, model, s, options))
    mols.push_back(add_hydrogens(infer_bonds(decode_tensor(t, vocab), options.bond_mode)));
  return mols;
}

}  // namespace eqdit
