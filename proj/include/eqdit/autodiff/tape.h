// SPDX-License-Identifier: Apache-2.0

#ifndef EQDIT_AUTODIFF_TAPE_H_
#define EQDIT_AUTODIFF_TAPE_H_

#include <deque>
#include <functional>
#include <vector>

#include <Eigen/Core>

namespace eqdit::ad {

using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

class Tape;

// Handle to a node on a Tape. Cheap to copy; valid while the tape lives.
class Var {
 public:
  Var() = default;

  bool valid() const noexcept { return tape_ != nullptr; }
  Tape &tape() const noexcept { return *tape_; }
  int id() const noexcept { return id_; }

  const Mat &value() const;
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
  bool requires_grad() const;

 private:
  friend class Tape;
  Var(Tape *tape, int id) : tape_(tape), id_(id) {}

  Tape *tape_ = nullptr;
  int id_ = -1;
};

// Reverse-mode recording of matrix-valued computations. Nodes are appended in
// evaluation order; backward() walks them in reverse.
class Tape {
 public:
  // Receives the upstream gradient of the node's value.
  using BackwardFn = std::function<void(const Mat &grad)>;

  Tape() = default;
  Tape(const Tape &) = delete;
  Tape &operator=(const Tape &) = delete;

  Var constant(Mat value);
  // Differentiable input owned by the tape; read its gradient with grad().
  Var input(Mat value);
  // Differentiable input aliasing external storage (no copy). After
  // backward(), the node's gradient is added into *sink when non-null.
  Var parameter(const Mat &value, Mat *sink);

  // Records an op result. `backward` is dropped when no input needs a
  // gradient.
  Var record(Mat value, std::initializer_list<Var> inputs, BackwardFn backward);
  Var record(Mat value, const std::vector<Var> &inputs, BackwardFn backward);

  // Accumulates `grad` into v's gradient buffer if v needs one.
  void accumulate(const Var &v, const Mat &grad);
  template <typename Derived>
  void accumulate(const Var &v, const Eigen::MatrixBase<Derived> &grad) {
    if (!v.requires_grad()) return;
    accumulate(v, Mat(grad));
  }

  // Seeds d(root)/d(root) = 1; root must be 1x1.
  void backward(const Var &root);

  // Gradient of an input after backward(); zeros when none arrived.
  Mat grad(const Var &v) const;

  const Mat &value(int id) const;
  bool requires_grad(int id) const { return nodes_[static_cast<std::size_t>(id)].requires_grad; }
  std::size_t size() const noexcept { return nodes_.size(); }

 private:
  struct Node {
    Mat owned;
    const Mat *alias = nullptr;
    Mat grad;
    bool has_grad = false;
    bool requires_grad = false;
    Mat *sink = nullptr;
    BackwardFn backward;
  };

  std::deque<Node> nodes_;
};

}  // namespace eqdit::ad

#endif  // EQDIT_AUTODIFF_TAPE_H_
