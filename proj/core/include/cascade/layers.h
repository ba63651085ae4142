#ifndef CASCADE_LAYERS_H_
#define CASCADE_LAYERS_H_

#include <optional>
#include <random>
#include <string>
#include <string_view>

#include "cascade/autograd.h"
#include "cascade/parameters.h"

namespace cascade {

// Variance epsilon used by every normalization layer.
inline constexpr double kNormEpsilon = 1e-12;

// Affine map x * W + b, W stored as (in x out).
class Linear {
 public:
  Linear() = default;
  Linear(ParameterStore& store, const std::string& name, int in, int out,
         ParamGroup group, std::mt19937_64& rng, bool bias = true);

  Var Forward(Var x) const;
  int in_dim() const { return in_; }
  int out_dim() const { return out_; }
  Parameter* weight() const { return weight_; }
  Parameter* bias() const { return bias_; }

 private:
  Parameter* weight_ = nullptr;
  Parameter* bias_ = nullptr;
  int in_ = 0;
  int out_ = 0;
};

// Layer normalization with learned gain and bias.
class LayerNorm {
 public:
  LayerNorm() = default;
  LayerNorm(ParameterStore& store, const std::string& name, int dim, ParamGroup group,
            std::mt19937_64& rng);
  Var Forward(Var x) const;

 private:
  Parameter* gain_ = nullptr;
  Parameter* bias_ = nullptr;
};

// Layer normalization whose gain and bias are affine functions of a
// condition vector:
//   out_i = (W_g c + b_g) .* (h_i - mean_i) / (std_i + eps) + (W_b c + b_b)
class ConditionalLayerNorm {
 public:
  ConditionalLayerNorm() = default;
  ConditionalLayerNorm(ParameterStore& store, const std::string& name, int cond_dim,
                       int dim, ParamGroup group, std::mt19937_64& rng);

  // condition: 1 x cond_dim; states: N x dim.
  Var Forward(Var condition, Var states) const;
  // Same, for states already passed through NormalizeRows.
  Var ForwardNormalized(Var condition, Var normalized) const;

  Parameter* gain_weight() const { return gain_w_; }
  Parameter* gain_bias() const { return gain_b_; }
  Parameter* shift_weight() const { return shift_w_; }
  Parameter* shift_bias() const { return shift_b_; }
  int dim() const { return dim_; }
  int cond_dim() const { return cond_dim_; }

 private:
  Parameter* gain_w_ = nullptr;
  Parameter* gain_b_ = nullptr;
  Parameter* shift_w_ = nullptr;
  Parameter* shift_b_ = nullptr;
  int cond_dim_ = 0;
  int dim_ = 0;
};

enum class FusionMode { kCln, kConcat, kAdd, kGate };

std::string_view FusionModeName(FusionMode mode);
// Throws ConfigError on an unknown name.
FusionMode ParseFusionMode(std::string_view name);

// Integrates a condition vector into every token state.
//   cln:    ConditionalLayerNorm(c, h_i)
//   add:    h_i + c
//   concat: [h_i ; c]                     (output dim = state + cond)
//   gate:   g .* h_i + (1 - g) .* c,  g = sigmoid([h_i ; c] W_g + b_g)
class Fusion {
 public:
  Fusion() = default;
  Fusion(ParameterStore& store, const std::string& name, FusionMode mode, int cond_dim,
         int state_dim, ParamGroup group, std::mt19937_64& rng);

  Var Forward(Var condition, Var states) const;
  int output_dim() const;
  FusionMode mode() const { return mode_; }
  const ConditionalLayerNorm& cln() const { return cln_; }
  const Linear& gate() const { return gate_; }

 private:
  FusionMode mode_ = FusionMode::kCln;
  int cond_dim_ = 0;
  int state_dim_ = 0;
  ConditionalLayerNorm cln_;
  Linear gate_;
};

// One multi-head scaled dot-product self-attention layer with a residual
// connection and layer normalization, optionally followed by a position-wise
// feed-forward sublayer (also residual + layer norm).
class SelfAttentionBlock {
 public:
  SelfAttentionBlock() = default;
  SelfAttentionBlock(ParameterStore& store, const std::string& name, int dim, int heads,
                     bool feed_forward, int ff_dim, ParamGroup group, std::mt19937_64& rng);

  Var Forward(Var x) const;
  int dim() const { return dim_; }
  int heads() const { return heads_; }
  const Linear& query() const { return query_; }
  const Linear& key() const { return key_; }
  const Linear& value() const { return value_; }
  const Linear& output() const { return output_; }

 private:
  int dim_ = 0;
  int heads_ = 1;
  bool feed_forward_ = false;
  Linear query_, key_, value_, output_;
  LayerNorm attn_norm_;
  Linear ff_in_, ff_out_;
  LayerNorm ff_norm_;
};

}  // namespace cascade

#endif  // CASCADE_LAYERS_H_
