#include "cascade/layers.h"

#include <cmath>
#include <vector>

#include "cascade/errors.h"

namespace cascade {

Linear::Linear(ParameterStore& store, const std::string& name, int in, int out,
               ParamGroup group, std::mt19937_64& rng, bool bias)
    : in_(in), out_(out) {
  weight_ = store.Add(name + ".weight", in, out, Init::kXavierUniform, group, true, rng);
  if (bias) bias_ = store.Add(name + ".bias", 1, out, Init::kZeros, group, false, rng);
}

Var Linear::Forward(Var x) const {
  Tape* t = x.tape();
  Var y = MatMul(x, t->Param(*weight_));
  if (bias_ != nullptr) y = AddRow(y, t->Param(*bias_));
  return y;
}

LayerNorm::LayerNorm(ParameterStore& store, const std::string& name, int dim,
                     ParamGroup group, std::mt19937_64& rng) {
  gain_ = store.Add(name + ".gain", 1, dim, Init::kOnes, group, false, rng);
  bias_ = store.Add(name + ".bias", 1, dim, Init::kZeros, group, false, rng);
}

Var LayerNorm::Forward(Var x) const {
  Tape* t = x.tape();
  return AddRow(MulRow(NormalizeRows(x, kNormEpsilon), t->Param(*gain_)), t->Param(*bias_));
}

ConditionalLayerNorm::ConditionalLayerNorm(ParameterStore& store, const std::string& name,
                                           int cond_dim, int dim, ParamGroup group,
                                           std::mt19937_64& rng)
    : cond_dim_(cond_dim), dim_(dim) {
  gain_w_ = store.Add(name + ".gain_weight", cond_dim, dim, Init::kXavierUniform, group, true, rng);
  gain_b_ = store.Add(name + ".gain_bias", 1, dim, Init::kOnes, group, false, rng);
  shift_w_ = store.Add(name + ".shift_weight", cond_dim, dim, Init::kXavierUniform, group, true, rng);
  shift_b_ = store.Add(name + ".shift_bias", 1, dim, Init::kZeros, group, false, rng);
}

Var ConditionalLayerNorm::Forward(Var condition, Var states) const {
  if (states.cols() != dim_) {
    throw ShapeError("cln: states have " + std::to_string(states.cols()) +
                     " features, expected " + std::to_string(dim_));
  }
  return ForwardNormalized(condition, NormalizeRows(states, kNormEpsilon));
}

Var ConditionalLayerNorm::ForwardNormalized(Var condition, Var normalized) const {
  if (condition.rows() != 1 || condition.cols() != cond_dim_) {
    throw ShapeError("cln: condition must be 1x" + std::to_string(cond_dim_));
  }
  if (normalized.cols() != dim_) throw ShapeError("cln: state dimension mismatch");
  Tape* t = condition.tape();
  Var gain = AddRow(MatMul(condition, t->Param(*gain_w_)), t->Param(*gain_b_));
  Var shift = AddRow(MatMul(condition, t->Param(*shift_w_)), t->Param(*shift_b_));
  return AddRow(MulRow(normalized, gain), shift);
}

std::string_view FusionModeName(FusionMode mode) {
  switch (mode) {
    case FusionMode::kCln: return "cln";
    case FusionMode::kConcat: return "concat";
    case FusionMode::kAdd: return "add";
    case FusionMode::kGate: return "gate";
  }
  return "cln";
}

FusionMode ParseFusionMode(std::string_view name) {
  if (name == "cln") return FusionMode::kCln;
  if (name == "concat") return FusionMode::kConcat;
  if (name == "add") return FusionMode::kAdd;
  if (name == "gate") return FusionMode::kGate;
  throw ConfigError("unknown fusion mode: " + std::string(name));
}

Fusion::Fusion(ParameterStore& store, const std::string& name, FusionMode mode, int cond_dim,
               int state_dim, ParamGroup group, std::mt19937_64& rng)
    : mode_(mode), cond_dim_(cond_dim), state_dim_(state_dim) {
  switch (mode) {
    case FusionMode::kCln:
      cln_ = ConditionalLayerNorm(store, name + ".cln", cond_dim, state_dim, group, rng);
      break;
    case FusionMode::kGate:
      if (cond_dim != state_dim) throw ShapeError("gate fusion needs equal dimensions");
      gate_ = Linear(store, name + ".gate", state_dim + cond_dim, state_dim, group, rng);
      break;
    case FusionMode::kAdd:
      if (cond_dim != state_dim) throw ShapeError("add fusion needs equal dimensions");
      break;
    case FusionMode::kConcat:
      break;
  }
}

int Fusion::output_dim() const {
  return mode_ == FusionMode::kConcat ? state_dim_ + cond_dim_ : state_dim_;
}

Var Fusion::Forward(Var condition, Var states) const {
  if (condition.rows() != 1 || condition.cols() != cond_dim_ || states.cols() != state_dim_) {
    throw ShapeError("fusion: condition/state dimension mismatch");
  }
  switch (mode_) {
    case FusionMode::kCln:
      return cln_.Forward(condition, states);
    case FusionMode::kAdd:
      return AddRow(states, condition);
    case FusionMode::kConcat: {
      Var tiled = TileRows(condition, states.rows());
      return ConcatCols({states, tiled});
    }
    case FusionMode::kGate: {
      Var tiled = TileRows(condition, states.rows());
      Var g = Sigmoid(gate_.Forward(ConcatCols({states, tiled})));
      // g .* h + (1 - g) .* c  ==  c + g .* (h - c)
      return Add(tiled, Mul(g, Sub(states, tiled)));
    }
  }
  throw ShapeError("fusion: unknown mode");
}

SelfAttentionBlock::SelfAttentionBlock(ParameterStore& store, const std::string& name, int dim,
                                       int heads, bool feed_forward, int ff_dim,
                                       ParamGroup group, std::mt19937_64& rng)
    : dim_(dim), heads_(heads), feed_forward_(feed_forward) {
  if (heads <= 0 || dim % heads != 0) {
    throw ShapeError("attention: dim " + std::to_string(dim) + " not divisible by " +
                     std::to_string(heads) + " heads");
  }
  query_ = Linear(store, name + ".query", dim, dim, group, rng);
  // A key bias shifts every score of a query row equally, so softmax cancels it.
  key_ = Linear(store, name + ".key", dim, dim, group, rng, /*bias=*/false);
  value_ = Linear(store, name + ".value", dim, dim, group, rng);
  output_ = Linear(store, name + ".output", dim, dim, group, rng);
  attn_norm_ = LayerNorm(store, name + ".attn_norm", dim, group, rng);
  if (feed_forward) {
    ff_in_ = Linear(store, name + ".ff_in", dim, ff_dim, group, rng);
    ff_out_ = Linear(store, name + ".ff_out", ff_dim, dim, group, rng);
    ff_norm_ = LayerNorm(store, name + ".ff_norm", dim, group, rng);
  }
}

Var SelfAttentionBlock::Forward(Var x) const {
  if (x.cols() != dim_) throw ShapeError("attention: input dimension mismatch");
  if (x.rows() < 1) throw ShapeError("attention: empty sequence");
  const int head_dim = dim_ / heads_;
  const double scale = 1.0 / std::sqrt(static_cast<double>(head_dim));
  Var q = query_.Forward(x);
  Var k = key_.Forward(x);
  Var v = value_.Forward(x);
  std::vector<Var> heads;
  heads.reserve(static_cast<size_t>(heads_));
  for (int h = 0; h < heads_; ++h) {
    Var qh = SliceCols(q, h * head_dim, head_dim);
    Var kh = SliceCols(k, h * head_dim, head_dim);
    Var vh = SliceCols(v, h * head_dim, head_dim);
    Var weights = SoftmaxRows(Scale(MatMulNT(qh, kh), scale));
    heads.push_back(MatMul(weights, vh));
  }
  Var attended = heads_ == 1 ? heads[0] : ConcatCols(heads);
  Var y = attn_norm_.Forward(Add(x, output_.Forward(attended)));
  if (feed_forward_) {
    y = ff_norm_.Forward(Add(y, ff_out_.Forward(Relu(ff_in_.Forward(y)))));
  }
  return y;
}

}  // namespace cascade
