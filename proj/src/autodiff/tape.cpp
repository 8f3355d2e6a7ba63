// SPDX-License-Identifier: Apache-2.0

#include "eqdit/autodiff/tape.h"

#include "eqdit/error.h"

namespace eqdit::ad {

const Mat &Var::value() const { return tape_->value(id_); }

bool Var::requires_grad() const { return tape_->requires_grad(id_); }

const Mat &Tape::value(int id) const {
  const Node &n = nodes_[static_cast<std::size_t>(id)];
  return n.alias ? *n.alias : n.owned;
}

Var Tape::constant(Mat value) {
  Node n;
  n.owned = std::move(value);
  nodes_.push_back(std::move(n));
  return Var(this, static_cast<int>(nodes_.size() - 1));
}

Var Tape::input(Mat value) {
  Node n;
  n.owned = std::move(value);
  n.requires_grad = true;
  nodes_.push_back(std::move(n));
  return Var(this, static_cast<int>(nodes_.size() - 1));
}

Var Tape::parameter(const Mat &value, Mat *sink) {
  Node n;
  n.alias = &value;
  n.requires_grad = sink != nullptr;
  n.sink = sink;
  nodes_.push_back(std::move(n));
  return Var(this, static_cast<int>(nodes_.size() - 1));
}

Var Tape::record(Mat value, std::initializer_list<Var> inputs,
                 BackwardFn backward) {
  Node n;
  n.owned = std::move(value);
  for (const Var &v : inputs)
    if (v.requires_grad()) n.requires_grad = true;
  if (n.requires_grad) n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return Var(this, static_cast<int>(nodes_.size() - 1));
}

Var Tape::record(Mat value, const std::vector<Var> &inputs,
                 BackwardFn backward) {
  Node n;
  n.owned = std::move(value);
  for (const Var &v : inputs)
    if (v.requires_grad()) n.requires_grad = true;
  if (n.requires_grad) n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return Var(this, static_cast<int>(nodes_.size() - 1));
}

void Tape::accumulate(const Var &v, const Mat &grad) {
  Node &n = nodes_[static_cast<std::size_t>(v.id())];
  if (!n.requires_grad) return;
  if (!n.has_grad) {
    n.grad = grad;
    n.has_grad = true;
  } else {
    n.grad += grad;
  }
}

void Tape::backward(const Var &root) {
  if (root.rows() != 1 || root.cols() != 1)
    throw ShapeError("backward() needs a scalar root");
  accumulate(root, Mat::Ones(1, 1));
  for (int id = root.id(); id >= 0; --id) {
    Node &n = nodes_[static_cast<std::size_t>(id)];
    if (!n.has_grad) continue;
    // Callbacks only accumulate into earlier nodes, so n stays valid.
    if (n.backward) n.backward(n.grad);
    if (n.sink) *n.sink += n.grad;
  }
}

Mat Tape::grad(const Var &v) const {
  const Node &n = nodes_[static_cast<std::size_t>(v.id())];
  if (n.has_grad) return n.grad;
  const Mat &val = value(v.id());
  return Mat::Zero(val.rows(), val.cols());
}

}  // namespace eqdit::ad
