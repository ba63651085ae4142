#ifndef CASCADE_AUTOGRAD_H_
#define CASCADE_AUTOGRAD_H_

#include <deque>
#include <functional>
#include <initializer_list>
#include <random>
#include <span>
#include <vector>

#include "cascade/parameters.h"

namespace cascade {

class Tape;

// Handle to a node on a Tape. Cheap to copy; valid while the tape lives.
class Var {
 public:
  Var() = default;
  Var(Tape* tape, int id) : tape_(tape), id_(id) {}

  const Matrix& value() const;
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
  // Value of a 1x1 node.
  double scalar() const;

  Tape* tape() const { return tape_; }
  int id() const { return id_; }
  bool valid() const { return tape_ != nullptr; }

 private:
  Tape* tape_ = nullptr;
  int id_ = -1;
};

// Reverse-mode tape over dense matrices. One tape per forward pass; a tape
// constructed with record = false stores values only, which is what inference
// uses on a frozen model.
class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, int)>;

  explicit Tape(bool record = true) : record_(record) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  bool recording() const { return record_; }

  Var Constant(Matrix value);
  // Leaf bound to a parameter. Gradients accumulate into p.grad.
  Var Param(const Parameter& p);

  // Seeds d(loss)/d(loss) = 1 and propagates. loss must be 1x1.
  void Backward(Var loss);

  const Matrix& value(int id) const;
  bool NeedsGrad(int id) const { return nodes_[id].needs_grad; }
  // Gradient buffer of a node, zero-initialized on first access.
  Matrix& GradRef(int id);
  // Gradient of a node after Backward (empty when nothing flowed into it).
  const Matrix& Grad(Var v) const { return nodes_[v.id()].grad; }

  Var Push(Matrix value, bool needs_grad, BackwardFn fn);
  size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Matrix value;
    const Matrix* external = nullptr;
    Parameter* param = nullptr;
    Matrix grad;
    bool needs_grad = false;
    BackwardFn backward;
  };

  bool record_;
  std::deque<Node> nodes_;
};

// Differentiable operations. Every op validates shapes and throws ShapeError.
Var MatMul(Var a, Var b);    // a * b
Var MatMulNT(Var a, Var b);  // a * b^T
Var Add(Var a, Var b);
Var Sub(Var a, Var b);
Var Mul(Var a, Var b);  // elementwise
Var AddRow(Var x, Var row);  // x + 1 * row
Var MulRow(Var x, Var row);  // x .* (1 * row)
Var Scale(Var x, double s);
Var Tanh(Var x);
Var Sigmoid(Var x);
Var Relu(Var x);
Var Abs(Var x);
Var SoftmaxRows(Var x);
// Per-row (x - mean) / (std + eps) with the population standard deviation.
Var NormalizeRows(Var x, double eps);
Var ConcatCols(std::span<const Var> parts);
Var ConcatCols(std::initializer_list<Var> parts);
Var ConcatRows(std::span<const Var> parts);
Var SliceCols(Var x, Eigen::Index begin, Eigen::Index count);
Var SliceRows(Var x, Eigen::Index begin, Eigen::Index count);
Var GatherRows(Var table, std::span<const int> indices);
// Row i of x becomes rows [i*times, (i+1)*times).
Var RepeatRows(Var x, Eigen::Index times);
// Row i of x becomes rows i, n+i, 2n+i, ...
Var TileRows(Var x, Eigen::Index times);
Var Reshape(Var x, Eigen::Index rows, Eigen::Index cols);
Var MaxOverRows(Var x);   // 1 x cols
Var MeanOverRows(Var x);  // 1 x cols
Var Sum(Var x);           // 1 x 1
// Inverted dropout. Returns x unchanged when rate == 0.
Var Dropout(Var x, double rate, std::mt19937_64& rng);
// Sum over all entries of the Bernoulli negative log-likelihood of labels
// under probabilities p, with p clamped to [clamp, 1 - clamp].
Var BinaryCrossEntropy(Var p, const Matrix& labels, double clamp = 1e-7);

}  // namespace cascade

#endif  // CASCADE_AUTOGRAD_H_
