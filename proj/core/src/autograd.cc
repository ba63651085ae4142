#include "cascade/autograd.h"

#include <cmath>
#include <string>

#include "cascade/errors.h"

namespace cascade {
namespace {

std::string ShapeOf(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

void RequireSameShape(const Var& a, const Var& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ShapeError(std::string(op) + ": " + ShapeOf(a.value()) + " vs " +
                     ShapeOf(b.value()));
  }
}

void RequireSameTape(const Var& a, const Var& b) {
  if (a.tape() != b.tape()) throw ShapeError("vars live on different tapes");
}

bool Needs(const Var& v) { return v.tape()->NeedsGrad(v.id()); }

}  // namespace

const Matrix& Var::value() const { return tape_->value(id_); }

double Var::scalar() const {
  const Matrix& v = value();
  if (v.rows() != 1 || v.cols() != 1) {
    throw ShapeError("scalar() on " + ShapeOf(v));
  }
  return v(0, 0);
}

Var Tape::Constant(Matrix value) {
  Node n;
  n.value = std::move(value);
  nodes_.push_back(std::move(n));
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

Var Tape::Param(const Parameter& p) {
  Node n;
  n.external = &p.value;
  if (record_) {
    n.param = const_cast<Parameter*>(&p);
    n.needs_grad = true;
  }
  nodes_.push_back(std::move(n));
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

const Matrix& Tape::value(int id) const {
  const Node& n = nodes_[id];
  return n.external != nullptr ? *n.external : n.value;
}

Matrix& Tape::GradRef(int id) {
  Node& n = nodes_[id];
  const Matrix& v = n.external != nullptr ? *n.external : n.value;
  Matrix& g = n.param != nullptr ? n.param->grad : n.grad;
  if (g.rows() != v.rows() || g.cols() != v.cols()) {
    g = Matrix::Zero(v.rows(), v.cols());
  }
  return g;
}

Var Tape::Push(Matrix value, bool needs_grad, BackwardFn fn) {
  Node n;
  n.value = std::move(value);
  if (record_ && needs_grad) {
    n.needs_grad = true;
    n.backward = std::move(fn);
  }
  nodes_.push_back(std::move(n));
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

void Tape::Backward(Var loss) {
  if (!record_) throw Error("Backward on a non-recording tape");
  if (loss.tape() != this) throw ShapeError("loss lives on another tape");
  const Matrix& lv = value(loss.id());
  if (lv.rows() != 1 || lv.cols() != 1) {
    throw ShapeError("Backward needs a 1x1 loss, got " + ShapeOf(lv));
  }
  if (!nodes_[loss.id()].needs_grad) return;
  GradRef(loss.id())(0, 0) += 1.0;
  for (int id = loss.id(); id >= 0; --id) {
    Node& n = nodes_[id];
    if (!n.backward || n.grad.size() == 0) continue;
    n.backward(*this, id);
  }
}

Var MatMul(Var a, Var b) {
  RequireSameTape(a, b);
  if (a.cols() != b.rows()) {
    throw ShapeError("MatMul: " + ShapeOf(a.value()) + " * " + ShapeOf(b.value()));
  }
  Matrix out(a.rows(), b.cols());
  out.noalias() = a.value() * b.value();
  Tape* t = a.tape();
  const int ia = a.id(), ib = b.id();
  return t->Push(std::move(out), Needs(a) || Needs(b), [ia, ib](Tape& tape, int self) {
    const Matrix& g = tape.GradRef(self);
    if (tape.NeedsGrad(ia)) tape.GradRef(ia).noalias() += g * tape.value(ib).transpose();
    if (tape.NeedsGrad(ib)) tape.GradRef(ib).noalias() += tape.value(ia).transpose() * g;
  });
}

Var MatMulNT(Var a, Var b) {
  RequireSameTape(a, b);
  if (a.cols() != b.cols()) {
    throw ShapeError("MatMulNT: " + ShapeOf(a.value()) + " * " + ShapeOf(b.value()) + "^T");
  }
  Matrix out(a.rows(), b.rows());
  out.noalias() = a.value() * b.value().transpose();
  Tape* t = a.tape();
  const int ia = a.id(), ib = b.id();
  return t->Push(std::move(out), Needs(a) || Needs(b), [ia, ib](Tape& tape, int self) {
    const Matrix& g = tape.GradRef(self);
    if (tape.NeedsGrad(ia)) tape.GradRef(ia).noalias() += g * tape.value(ib);
    if (tape.NeedsGrad(ib)) tape.GradRef(ib).noalias() += g.transpose() * tape.value(ia);
  });
}

Var Add(Var a, Var b) {
  RequireSameTape(a, b);
  RequireSameShape(a, b, "Add");
  Matrix out = a.value() + b.value();
  const int ia = a.id(), ib = b.id();
  return a.tape()->Push(std::move(out), Needs(a) || Needs(b), [ia, ib](Tape& tape, int self) {
    const Matrix& g = tape.GradRef(self);
    if (tape.NeedsGrad(ia)) tape.GradRef(ia) += g;
    if (tape.NeedsGrad(ib)) tape.GradRef(ib) += g;
  });
}

Var Sub(Var a, Var b) {
  RequireSameTape(a, b);
  RequireSameShape(a, b, "Sub");
  Matrix out = a.value() - b.value();
  const int ia = a.id(), ib = b.id();
  return a.tape()->Push(std::move(out), Needs(a) || Needs(b), [ia, ib](Tape& tape, int self) {
    const Matrix& g = tape.GradRef(self);
    if (tape.NeedsGrad(ia)) tape.GradRef(ia) += g;
    if (tape.NeedsGrad(ib)) tape.GradRef(ib) -= g;
  });
}

Var Mul(Var a, Var b) {
  RequireSameTape(a, b);
  RequireSameShape(a, b, "Mul");
  Matrix out = a.value().cwiseProduct(b.value());
  const int ia = a.id(), ib = b.id();
  return a.tape()->Push(std::move(out), Needs(a) || Needs(b), [ia, ib](Tape& tape, int self) {
    const Matrix& g = tape.GradRef(self);
    if (tape.NeedsGrad(ia)) tape.GradRef(ia) += g.cwiseProduct(tape.value(ib));
    if (tape.NeedsGrad(ib)) tape.GradRef(ib) += g.cwiseProduct(tape.value(ia));
  });
}

Var AddRow(Var x, Var row) {
  RequireSameTape(x, row);
  if (row.rows() != 1 || row.cols() != x.cols()) {
    throw ShapeError("AddRow: " + ShapeOf(x.value()) + " + " + ShapeOf(row.value()));
  }
  Matrix out = x.value().rowwise() + row.value().row(0);
  const int ix = x.id(), ir = row.id();
  return x.tape()->Push(std::move(out), Needs(x) || Needs(row), [ix, ir](Tape& tape, int self) {
    const Matrix& g = tape.GradRef(self);
    if (tape.NeedsGrad(ix)) tape.GradRef(ix) += g;
    if (tape.NeedsGrad(ir)) tape.GradRef(ir) += g.colwise().sum();
  });
}

Var MulRow(Var x, Var row) {
  RequireSameTape(x, row);
  if (row.rows() != 1 || row.cols() != x.cols()) {
    throw ShapeError("MulRow: " + ShapeOf(x.value()) + " * " + ShapeOf(row.value()));
  }
  Matrix out = x.value().array().rowwise() * row.value().row(0).array();
  const int ix = x.id(), ir = row.id();
  return x.tape()->Push(std::move(out), Needs(x) || Needs(row), [ix, ir](Tape& tape, int self) {
    const Matrix& g = tape.GradRef(self);
    if (tape.NeedsGrad(ix)) {
      tape.GradRef(ix).array() += g.array().rowwise() * tape.value(ir).row(0).array();
    }
    if (tape.NeedsGrad(ir)) {
      tape.GradRef(ir) += g.cwiseProduct(tape.value(ix)).colwise().sum();
    }
  });
}

Var Scale(Var x, double s) {
  Matrix out = x.value() * s;
  const int ix = x.id();
  return x.tape()->Push(std::move(out), Needs(x), [ix, s](Tape& tape, int self) {
    tape.GradRef(ix) += tape.GradRef(self) * s;
  });
}

Var Tanh(Var x) {
  Matrix out = x.value().array().tanh().matrix();
  const int ix = x.id();
  return x.tape()->Push(std::move(out), Needs(x), [ix](Tape& tape, int self) {
    const Matrix& y = tape.value(self);
    tape.GradRef(ix).array() += tape.GradRef(self).array() * (1.0 - y.array().square());
  });
}

Var Sigmoid(Var x) {
  Matrix out = (1.0 / (1.0 + (-x.value().array()).exp())).matrix();
  const int ix = x.id();
  return x.tape()->Push(std::move(out), Needs(x), [ix](Tape& tape, int self) {
    const Matrix& y = tape.value(self);
    tape.GradRef(ix).array() += tape.GradRef(self).array() * y.array() * (1.0 - y.array());
  });
}

Var Relu(Var x) {
  Matrix out = x.value().cwiseMax(0.0);
  const int ix = x.id();
  return x.tape()->Push(std::move(out), Needs(x), [ix](Tape& tape, int self) {
    const Matrix& in = tape.value(ix);
    tape.GradRef(ix).array() +=
        tape.GradRef(self).array() * (in.array() > 0.0).cast<double>();
  });
}

Var Abs(Var x) {
  Matrix out = x.value().cwiseAbs();
  const int ix = x.id();
  return x.tape()->Push(std::move(out), Needs(x), [ix](Tape& tape, int self) {
    const Matrix& in = tape.value(ix);
    tape.GradRef(ix).array() += tape.GradRef(self).array() * in.array().sign();
  });
}

Var SoftmaxRows(Var x) {
  const Matrix& in = x.value();
  Matrix out(in.rows(), in.cols());
  for (Eigen::Index r = 0; r < in.rows(); ++r) {
    const double m = in.row(r).maxCoeff();
    out.row(r) = (in.row(r).array() - m).exp().matrix();
    out.row(r) /= out.row(r).sum();
  }
  const int ix = x.id();
  return x.tape()->Push(std::move(out), Needs(x), [ix](Tape& tape, int self) {
    const Matrix& y = tape.value(self);
    const Matrix& g = tape.GradRef(self);
    Matrix& gx = tape.GradRef(ix);
    for (Eigen::Index r = 0; r < y.rows(); ++r) {
      const double dot = g.row(r).dot(y.row(r));
      gx.row(r).array() += y.row(r).array() * (g.row(r).array() - dot);
    }
  });
}

Var NormalizeRows(Var x, double eps) {
  const Matrix& in = x.value();
  const Eigen::Index n = in.rows(), d = in.cols();
  Matrix out(n, d);
  Eigen::VectorXd sigma(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    const double mu = in.row(r).mean();
    const auto centered = in.row(r).array() - mu;
    sigma(r) = std::sqrt(centered.square().sum() / static_cast<double>(d));
    out.row(r) = (centered / (sigma(r) + eps)).matrix();
  }
  const int ix = x.id();
  return x.tape()->Push(std::move(out), Needs(x), [ix, sigma, eps](Tape& tape, int self) {
    const Matrix& in = tape.value(ix);
    const Matrix& g = tape.GradRef(self);
    Matrix& gx = tape.GradRef(ix);
    const double d = static_cast<double>(in.cols());
    for (Eigen::Index r = 0; r < in.rows(); ++r) {
      const double s = sigma(r) + eps;
      const Eigen::RowVectorXd centered = in.row(r).array() - in.row(r).mean();
      gx.row(r).array() += (g.row(r).array() - g.row(r).mean()) / s;
      if (sigma(r) > 0.0) {
        const double proj = g.row(r).dot(centered);
        gx.row(r) -= centered * (proj / (d * sigma(r) * s * s));
      }
    }
  });
}

Var ConcatCols(std::span<const Var> parts) {
  if (parts.empty()) throw ShapeError("ConcatCols of nothing");
  const Eigen::Index rows = parts[0].rows();
  Eigen::Index cols = 0;
  bool needs = false;
  for (const Var& p : parts) {
    RequireSameTape(parts[0], p);
    if (p.rows() != rows) throw ShapeError("ConcatCols: row count mismatch");
    cols += p.cols();
    needs = needs || Needs(p);
  }
  Matrix out(rows, cols);
  std::vector<int> ids;
  std::vector<Eigen::Index> widths;
  Eigen::Index at = 0;
  for (const Var& p : parts) {
    out.middleCols(at, p.cols()) = p.value();
    at += p.cols();
    ids.push_back(p.id());
    widths.push_back(p.cols());
  }
  return parts[0].tape()->Push(std::move(out), needs, [ids, widths](Tape& tape, int self) {
    const Matrix& g = tape.GradRef(self);
    Eigen::Index at = 0;
    for (size_t k = 0; k < ids.size(); ++k) {
      if (tape.NeedsGrad(ids[k])) tape.GradRef(ids[k]) += g.middleCols(at, widths[k]);
      at += widths[k];
    }
  });
}

Var ConcatCols(std::initializer_list<Var> parts) {
  return ConcatCols(std::span<const Var>(parts.begin(), parts.size()));
}

Var ConcatRows(std::span<const Var> parts) {
  if (parts.empty()) throw ShapeError("ConcatRows of nothing");
  const Eigen::Index cols = parts[0].cols();
  Eigen::Index rows = 0;
  bool needs = false;
  for (const Var& p : parts) {
    RequireSameTape(parts[0], p);
    if (p.cols() != cols) throw ShapeError("ConcatRows: column count mismatch");
    rows += p.rows();
    needs = needs || Needs(p);
  }
  Matrix out(rows, cols);
  std::vector<int> ids;
  std::vector<Eigen::Index> heights;
  Eigen::Index at = 0;
  for (const Var& p : parts) {
    out.middleRows(at, p.rows()) = p.value();
    at += p.rows();
    ids.push_back(p.id());
    heights.push_back(p.rows());
  }
  return parts[0].tape()->Push(std::move(out), needs, [ids, heights](Tape& tape, int self) {
    const Matrix& g = tape.GradRef(self);
    Eigen::Index at = 0;
    for (size_t k = 0; k < ids.size(); ++k) {
      if (tape.NeedsGrad(ids[k])) tape.GradRef(ids[k]) += g.middleRows(at, heights[k]);
      at += heights[k];
    }
  });
}

Var SliceCols(Var x, Eigen::Index begin, Eigen::Index count) {
  if (begin < 0 || count < 0 || begin + count > x.cols()) {
    throw ShapeError("SliceCols out of range");
  }
  Matrix out = x.value().middleCols(begin, count);
  const int ix = x.id();
  return x.tape()->Push(std::move(out), Needs(x), [ix, begin, count](Tape& tape, int self) {
    tape.GradRef(ix).middleCols(begin, count) += tape.GradRef(self);
  });
}

Var SliceRows(Var x, Eigen::Index begin, Eigen::Index count) {
  if (begin < 0 || count < 0 || begin + count > x.rows()) {
    throw ShapeError("SliceRows out of range");
  }
  Matrix out = x.value().middleRows(begin, count);
  const int ix = x.id();
  return x.tape()->Push(std::move(out), Needs(x), [ix, begin, count](Tape& tape, int self) {
    tape.GradRef(ix).middleRows(begin, count) += tape.GradRef(self);
  });
}

Var GatherRows(Var table, std::span<const int> indices) {
  const Matrix& t = table.value();
  Matrix out(static_cast<Eigen::Index>(indices.size()), t.cols());
  for (size_t k = 0; k < indices.size(); ++k) {
    if (indices[k] < 0 || indices[k] >= t.rows()) {
      throw ShapeError("GatherRows index " + std::to_string(indices[k]) +
                       " outside table of " + std::to_string(t.rows()) + " rows");
    }
    out.row(static_cast<Eigen::Index>(k)) = t.row(indices[k]);
  }
  const int it = table.id();
  std::vector<int> idx(indices.begin(), indices.end());
  return table.tape()->Push(std::move(out), Needs(table), [it, idx](Tape& tape, int self) {
    const Matrix& g = tape.GradRef(self);
    Matrix& gt = tape.GradRef(it);
    for (size_t k = 0; k < idx.size(); ++k) gt.row(idx[k]) += g.row(static_cast<Eigen::Index>(k));
  });
}

Var RepeatRows(Var x, Eigen::Index times) {
  const Matrix& in = x.value();
  Matrix out(in.rows() * times, in.cols());
  for (Eigen::Index r = 0; r < in.rows(); ++r) {
    out.middleRows(r * times, times) = in.row(r).replicate(times, 1);
  }
  const int ix = x.id();
  return x.tape()->Push(std::move(out), Needs(x), [ix, times](Tape& tape, int self) {
    const Matrix& g = tape.GradRef(self);
    Matrix& gx = tape.GradRef(ix);
    for (Eigen::Index r = 0; r < gx.rows(); ++r) {
      gx.row(r) += g.middleRows(r * times, times).colwise().sum();
    }
  });
}

Var TileRows(Var x, Eigen::Index times) {
  const Matrix& in = x.value();
  Matrix out = in.replicate(times, 1);
  const int ix = x.id();
  return x.tape()->Push(std::move(out), Needs(x), [ix, times](Tape& tape, int self) {
    const Matrix& g = tape.GradRef(self);
    Matrix& gx = tape.GradRef(ix);
    const Eigen::Index n = gx.rows();
    for (Eigen::Index k = 0; k < times; ++k) gx += g.middleRows(k * n, n);
  });
}

Var Reshape(Var x, Eigen::Index rows, Eigen::Index cols) {
  if (rows * cols != x.value().size()) throw ShapeError("Reshape size mismatch");
  Matrix out = Eigen::Map<const Matrix>(x.value().data(), rows, cols);
  const int ix = x.id();
  return x.tape()->Push(std::move(out), Needs(x), [ix](Tape& tape, int self) {
    const Matrix& g = tape.GradRef(self);
    Matrix& gx = tape.GradRef(ix);
    Eigen::Map<Matrix>(gx.data(), g.rows(), g.cols()) += g;
  });
}

Var MaxOverRows(Var x) {
  const Matrix& in = x.value();
  if (in.rows() == 0) throw ShapeError("MaxOverRows of empty matrix");
  Matrix out(1, in.cols());
  std::vector<Eigen::Index> arg(static_cast<size_t>(in.cols()));
  for (Eigen::Index c = 0; c < in.cols(); ++c) {
    Eigen::Index best = 0;
    out(0, c) = in.col(c).maxCoeff(&best);
    arg[static_cast<size_t>(c)] = best;
  }
  const int ix = x.id();
  return x.tape()->Push(std::move(out), Needs(x), [ix, arg](Tape& tape, int self) {
    const Matrix& g = tape.GradRef(self);
    Matrix& gx = tape.GradRef(ix);
    for (size_t c = 0; c < arg.size(); ++c) {
      gx(arg[c], static_cast<Eigen::Index>(c)) += g(0, static_cast<Eigen::Index>(c));
    }
  });
}

Var MeanOverRows(Var x) {
  const Matrix& in = x.value();
  if (in.rows() == 0) throw ShapeError("MeanOverRows of empty matrix");
  Matrix out = in.colwise().mean();
  const int ix = x.id();
  return x.tape()->Push(std::move(out), Needs(x), [ix](Tape& tape, int self) {
    Matrix& gx = tape.GradRef(ix);
    const double inv = 1.0 / static_cast<double>(gx.rows());
    gx.rowwise() += tape.GradRef(self).row(0) * inv;
  });
}

Var Sum(Var x) {
  Matrix out(1, 1);
  out(0, 0) = x.value().sum();
  const int ix = x.id();
  return x.tape()->Push(std::move(out), Needs(x), [ix](Tape& tape, int self) {
    tape.GradRef(ix).array() += tape.GradRef(self)(0, 0);
  });
}

Var Dropout(Var x, double rate, std::mt19937_64& rng) {
  if (rate <= 0.0) return x;
  if (rate >= 1.0) throw ArgumentError("dropout rate must be < 1");
  std::bernoulli_distribution keep(1.0 - rate);
  const double scale = 1.0 / (1.0 - rate);
  Matrix mask(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < mask.size(); ++i) mask.data()[i] = keep(rng) ? scale : 0.0;
  Matrix out = x.value().cwiseProduct(mask);
  const int ix = x.id();
  return x.tape()->Push(std::move(out), Needs(x), [ix, mask](Tape& tape, int self) {
    tape.GradRef(ix) += tape.GradRef(self).cwiseProduct(mask);
  });
}

Var BinaryCrossEntropy(Var p, const Matrix& labels, double clamp) {
  if (labels.rows() != p.rows() || labels.cols() != p.cols()) {
    throw ShapeError("BinaryCrossEntropy: labels " + ShapeOf(labels) + " vs probs " +
                     ShapeOf(p.value()));
  }
  const Matrix pc = p.value().cwiseMax(clamp).cwiseMin(1.0 - clamp);
  double total = 0.0;
  for (Eigen::Index i = 0; i < pc.size(); ++i) {
    const double y = labels.data()[i];
    const double q = pc.data()[i];
    total -= y * std::log(q) + (1.0 - y) * std::log(1.0 - q);
  }
  Matrix out(1, 1);
  out(0, 0) = total;
  const int ip = p.id();
  // The clamp is straight-through: the gradient is evaluated at the clamped
  // probability so saturated predictions still receive a training signal.
  return p.tape()->Push(std::move(out), Needs(p), [ip, pc, labels](Tape& tape, int self) {
    const double g = tape.GradRef(self)(0, 0);
    tape.GradRef(ip).array() +=
        g * (pc.array() - labels.array()) / (pc.array() * (1.0 - pc.array()));
  });
}

}  // namespace cascade
