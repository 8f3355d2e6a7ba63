// SPDX-License-Identifier: Apache-2.0

#include "eqdit/nn/params.h"

#include <cmath>

#include "eqdit/autodiff/ops.h"
#include "eqdit/error.h"

namespace eqdit {

ParamId ParameterSet::add(const std::string &name, Eigen::Index rows, Eigen::Index cols,
                          Init init, std::mt19937_64 &rng, double stddev) {
  if (find(name)) throw ConfigError("duplicate parameter name: " + name);
  ad::Mat m = ad::Mat::Zero(rows, cols);
  if (init != Init::kZeros) {
    double s = stddev;
    if (init == Init::kXavier) s = std::sqrt(2.0 / static_cast<double>(rows + cols));
    std::normal_distribution<double> n(0.0, s);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = n(rng);
  }
  m = m.cast<float>().cast<double>();
  names_.push_back(name);
  values_.push_back(std::move(m));
  return values_.size() - 1;
}

std::size_t ParameterSet::scalar_count() const {
  std::size_t n = 0;
  for (const auto &v : values_) n += static_cast<std::size_t>(v.size());
  return n;
}

std::optional<ParamId> ParameterSet::find(const std::string &name) const {
  for (std::size_t i = 0; i < names_.size(); ++i)
    if (names_[i] == name) return i;
  return std::nullopt;
}

void ParameterSet::round_to_float() {
  for (auto &v : values_) v = v.cast<float>().cast<double>();
}

std::vector<ad::Mat> ParameterSet::zero_like() const {
  std::vector<ad::Mat> out;
  out.reserve(values_.size());
  for (const auto &v : values_) out.push_back(ad::Mat::Zero(v.rows(), v.cols()));
  return out;
}

ParamBinding::ParamBinding(ad::Tape &tape, const ParameterSet &params, Gradients *grads)
    : tape_(tape), params_(params), grads_(grads), bound_(params.size()) {
  if (grads_ && grads_->size() != params.size())
    throw ShapeError("gradient buffer does not match the parameter set");
}

ad::Var ParamBinding::operator()(ParamId id) {
  if (!bound_[id].valid())
    bound_[id] = tape_.parameter(params_.value(id), grads_ ? &(*grads_)[id] : nullptr);
  return bound_[id];
}

LinearLayer LinearLayer::create(ParameterSet &ps, const std::string &name, Eigen::Index in,
                                Eigen::Index out, Init init, std::mt19937_64 &rng, bool bias) {
  LinearLayer l;
  l.weight = ps.add(name + ".weight", in, out, init, rng);
  l.has_bias = bias;
  if (bias) l.bias = ps.add(name + ".bias", 1, out, Init::kZeros, rng);
  return l;
}

ad::Var apply(ParamBinding &pb, const LinearLayer &layer, const ad::Var &x, bool row_exact) {
  ad::Var y = row_exact ? ad::matmul_rowwise(x, pb(layer.weight)) : ad::matmul(x, pb(layer.weight));
  return layer.has_bias ? ad::add_row(y, pb(layer.bias)) : y;
}

Adam::Adam(const ParameterSet &params, AdamOptions options)
    : opt_(options), m_(params.zero_like()), v_(params.zero_like()) {
  if (opt_.ema_decay > 0.0) ema_ = params;
}

double Adam::step(ParameterSet &params, const Gradients &grads) {
  if (grads.size() != params.size()) throw ShapeError("Adam: gradient count mismatch");
  double sq = 0.0;
  for (const auto &g : grads) sq += g.squaredNorm();
  const double norm = std::sqrt(sq);
  double clip = 1.0;
  if (opt_.grad_clip > 0.0 && norm > opt_.grad_clip) clip = opt_.grad_clip / norm;

  ++t_;
  const double bc1 = 1.0 - std::pow(opt_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(opt_.beta2, static_cast<double>(t_));
  for (std::size_t i = 0; i < grads.size(); ++i) {
    ad::Mat g = grads[i] * clip;
    m_[i] = opt_.beta1 * m_[i] + (1.0 - opt_.beta1) * g;
    v_[i] = opt_.beta2 * v_[i] + (1.0 - opt_.beta2) * g.cwiseProduct(g);
    ad::Mat &p = params.value(i);
    p.array() -= opt_.learning_rate * (m_[i].array() / bc1) /
                 ((v_[i].array() / bc2).sqrt() + opt_.eps);
    p = p.cast<float>().cast<double>();
    if (ema_) {
      ad::Mat &e = ema_->value(i);
      e = (opt_.ema_decay * e + (1.0 - opt_.ema_decay) * p).cast<float>().cast<double>();
    }
  }
  return norm;
}

}  // namespace eqdit
