// SPDX-License-Identifier: Apache-2.0

#ifndef EQDIT_DIFFUSION_DIFFUSION_H_
#define EQDIT_DIFFUSION_DIFFUSION_H_

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <vector>

#include "eqdit/autodiff/ops.h"
#include "eqdit/dit/model.h"
#include "eqdit/encoding/channel_tensor.h"
#include "eqdit/molgraph/bonds.h"
#include "eqdit/molgraph/molecule.h"
#include "eqdit/nn/params.h"

namespace eqdit {

enum class ScheduleKind { kLinear };

// Noise schedule. Diffusion time t runs over 1..T; the network sees the
// zero-based step t - 1.
class DiffusionSchedule {
 public:
  int steps() const noexcept { return static_cast<int>(beta_.size()); }

  double beta(int t) const { return beta_[index(t)]; }
  double alpha(int t) const { return 1.0 - beta(t); }
  double alpha_bar(int t) const { return alpha_bar_[index(t)]; }
  // alpha_bar(t - 1), with alpha_bar(0) = 1.
  double alpha_bar_prev(int t) const { return t == 1 ? 1.0 : alpha_bar(t - 1); }
  // beta~_t = beta_t (1 - alpha_bar_{t-1}) / (1 - alpha_bar_t); zero at t = 1.
  double posterior_variance(int t) const { return posterior_var_[index(t)]; }
  // log beta~_t with the t = 1 value replaced by that of t = 2 (or by
  // log beta_1 when T = 1) so that it stays finite.
  double log_posterior_variance_clipped(int t) const { return log_post_clipped_[index(t)]; }
  // Posterior mean mu~ = coef_x0 * x_0 + coef_xt * x_t.
  double posterior_coef_x0(int t) const;
  double posterior_coef_xt(int t) const;

 private:
  friend DiffusionSchedule make_schedule(ScheduleKind, int, double, double);
  std::size_t index(int t) const;

  std::vector<double> beta_, alpha_bar_, posterior_var_, log_post_clipped_;
};

// Throws ConfigError unless 0 < beta_start <= beta_end < 1 and T >= 1.
DiffusionSchedule make_schedule(ScheduleKind kind, int T, double beta_start, double beta_end);

// x_t = sqrt(alpha_bar_t) x_0 + sqrt(1 - alpha_bar_t) eps, elementwise.
ad::Mat q_sample(const ad::Mat &x0, int t, const ad::Mat &eps, const DiffusionSchedule &s);
ChannelTensor q_sample(const ChannelTensor &x0, int t, const ChannelTensor &eps,
                       const DiffusionSchedule &s);

// Standard normal draws on the information mask of an n_atoms molecule, zero
// elsewhere, flattened channel-major (1 x 3 side^2).
ad::Mat masked_noise(std::size_t n_atoms, std::size_t side, std::size_t vocab,
                     std::mt19937_64 &rng);
ad::Mat flat_mask(std::size_t n_atoms, std::size_t side, std::size_t vocab);
ad::Mat flatten(const ChannelTensor &t);
// Tensor with the given atom count and mask over the first n_atoms rows.
ChannelTensor unflatten(const ad::Mat &row, std::size_t side, std::size_t n_atoms);

// mu~(x_t, x_0) and the model mean from a noise prediction.
ad::Mat posterior_mean(const ad::Mat &x0, const ad::Mat &xt, int t, const DiffusionSchedule &s);
ad::Mat model_mean(const ad::Mat &xt, int t, const ad::Mat &eps_hat, const DiffusionSchedule &s);
// log Sigma = v log beta_t + (1 - v) log beta~_t (clipped).
ad::Mat model_log_variance(const ad::Mat &v, int t, const DiffusionSchedule &s);

struct TrainBatch {
  ad::Mat x0;    // B x cells
  ad::Mat xt;
  ad::Mat eps;
  ad::Mat mask;  // 1 on informative entries
  std::vector<int> t;  // diffusion times in 1..T
  std::vector<int> labels;
};

struct HybridLossOptions {
  double lambda = 1.0;
  // Width of the bins of the discretized likelihood used at t = 1.
  double bin_width = 0.01;
  // Noise prediction used for the KL mean; defaults to the model's own
  // output value. Either way the mean is treated as a constant.
  const ad::Mat *frozen_eps = nullptr;
};

struct LossTerms {
  ad::Var total;
  double mse = 0.0;  // masked mean of (eps_hat - eps)^2
  double vlb = 0.0;  // masked mean of the KL / decoder terms
};

LossTerms hybrid_loss(const ModelOutputs &out, const TrainBatch &batch,
                      const DiffusionSchedule &s, const HybridLossOptions &options = {});

// Elementwise closed-form Gaussian KL(N(m1, v1) || N(m2, v2)).
double gaussian_kl(double m1, double v1, double m2, double v2);
// -log of the probability mass of [x - w/2, x + w/2] under N(mean, exp(log_var)).
double discretized_nll(double x, double mean, double log_var, double width);

// Network evaluation on a batch of flattened x_t rows at diffusion time t.
// Fills eps_hat and v (same shape as xt).
using Denoiser = std::function<void(const ad::Mat &xt, int t, ad::Mat &eps_hat, ad::Mat &v)>;

// One ancestral step; row r draws its noise from rngs[r]. No noise is added
// at t = 1. Entries where mask is 0 stay exactly 0.
ad::Mat p_sample_step(const ad::Mat &xt, int t, const Denoiser &model, const ad::Mat &mask,
                      const DiffusionSchedule &s, std::vector<std::mt19937_64> &rngs);

struct GenerateOptions {
  std::optional<int> label;
  BondMode bond_mode = BondMode::kGeometry;
  std::size_t batch = 50;  // chains evaluated together
  std::uint64_t seed = 0;
};

// Draws atom counts from the histogram, runs the full reverse chain for each
// sample, decodes, infers bonds and adds hydrogens.
std::vector<Molecule> generate(std::size_t n, const std::map<std::size_t, std::size_t> &sizes,
                               const ParameterSet &ps, const DiTModel &model,
                               const DiffusionSchedule &s, std::span<const Element> vocab,
                               const GenerateOptions &options);

// Raw final tensors of the chains (before decoding), for inspection.
std::vector<ChannelTensor> sample_tensors(const std::vector<std::size_t> &atom_counts,
                                          const ParameterSet &ps, const DiTModel &model,
                                          const DiffusionSchedule &s,
                                          const GenerateOptions &options);

}  // namespace eqdit

#endif  // EQDIT_DIFFUSION_DIFFUSION_H_
