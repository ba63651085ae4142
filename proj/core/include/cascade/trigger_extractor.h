#ifndef CASCADE_TRIGGER_EXTRACTOR_H_
#define CASCADE_TRIGGER_EXTRACTOR_H_

#include <optional>
#include <random>

#include "cascade/autograd.h"
#include "cascade/layers.h"

namespace cascade {

struct ExtractorOptions {
  FusionMode fusion = FusionMode::kCln;
  bool self_attention = true;
  int heads = 4;
  bool feed_forward = false;
};

// Decoder 2: triggers of one given type. The type embedding is fused into
// every token state (G^c), refined by self-attention (Z^c), and a pair of
// sigmoid taggers marks start and end tokens.
class TriggerExtractor {
 public:
  TriggerExtractor() = default;
  TriggerExtractor(ParameterStore& store, int state_dim, int type_dim,
                   const ExtractorOptions& options, std::mt19937_64& rng);

  struct Conditioned {
    Var fused;    // G^c, N x fused_dim()
    Var refined;  // Z^c, N x fused_dim()
  };
  Conditioned ConditionOnType(Var states, Var type_embedding) const;

  struct Tagged {
    Var start;  // N x 1 probabilities
    Var end;    // N x 1
  };
  Tagged Tag(Var refined) const;

  int fused_dim() const { return fusion_.output_dim(); }
  const Fusion& fusion() const { return fusion_; }
  const Linear& start_head() const { return start_head_; }
  const Linear& end_head() const { return end_head_; }
  const std::optional<SelfAttentionBlock>& attention() const { return attention_; }

 private:
  Fusion fusion_;
  std::optional<SelfAttentionBlock> attention_;
  Linear start_head_;
  Linear end_head_;
};

}  // namespace cascade

#endif  // CASCADE_TRIGGER_EXTRACTOR_H_
