// SPDX-License-Identifier: Apache-2.0

#ifndef EQDIT_NN_PARAMS_H_
#define EQDIT_NN_PARAMS_H_

#include <cstddef>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "eqdit/autodiff/tape.h"

namespace eqdit {

using ParamId = std::size_t;

enum class Init { kZeros, kNormal, kXavier };

// Named, ordered collection of trainable matrices. Values are kept in double
// but always hold float32-representable numbers, so the float32 checkpoint
// body round-trips exactly.
class ParameterSet {
 public:
  ParamId add(const std::string &name, Eigen::Index rows, Eigen::Index cols,
              Init init, std::mt19937_64 &rng, double stddev = 0.02);

  std::size_t size() const noexcept { return values_.size(); }
  std::size_t scalar_count() const;
  const std::string &name(ParamId id) const { return names_[id]; }
  ad::Mat &value(ParamId id) { return values_[id]; }
  const ad::Mat &value(ParamId id) const { return values_[id]; }
  std::optional<ParamId> find(const std::string &name) const;

  // Rounds every value to the nearest float32.
  void round_to_float();

  std::vector<ad::Mat> zero_like() const;

 private:
  std::vector<std::string> names_;
  std::vector<ad::Mat> values_;
};

using Gradients = std::vector<ad::Mat>;

// Lazily places parameters on a tape; each parameter is bound once per tape.
// With a gradient buffer, backward() accumulates into it.
class ParamBinding {
 public:
  ParamBinding(ad::Tape &tape, const ParameterSet &params, Gradients *grads = nullptr);

  ad::Var operator()(ParamId id);
  ad::Tape &tape() const noexcept { return tape_; }

 private:
  ad::Tape &tape_;
  const ParameterSet &params_;
  Gradients *grads_;
  std::vector<ad::Var> bound_;
};

struct LinearLayer {
  ParamId weight = 0;  // in x out
  ParamId bias = 0;    // 1 x out
  bool has_bias = true;

  static LinearLayer create(ParameterSet &ps, const std::string &name, Eigen::Index in,
                            Eigen::Index out, Init init, std::mt19937_64 &rng,
                            bool bias = true);
};

// row_exact selects ad::matmul_rowwise.
ad::Var apply(ParamBinding &pb, const LinearLayer &layer, const ad::Var &x,
              bool row_exact = false);

struct AdamOptions {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double grad_clip = 0.0;   // global norm; 0 disables
  double ema_decay = 0.0;   // 0 disables the averaged copy
};

class Adam {
 public:
  Adam(const ParameterSet &params, AdamOptions options);

  // Returns the global gradient norm before clipping.
  double step(ParameterSet &params, const Gradients &grads);
  long steps() const noexcept { return t_; }
  void set_learning_rate(double lr) noexcept { opt_.learning_rate = lr; }
  // Exponential moving average of the parameters; empty when disabled.
  const std::optional<ParameterSet> &ema() const noexcept { return ema_; }

 private:
  AdamOptions opt_;
  std::vector<ad::Mat> m_, v_;
  std::optional<ParameterSet> ema_;
  long t_ = 0;
};

}  // namespace eqdit

#endif  // EQDIT_NN_PARAMS_H_
