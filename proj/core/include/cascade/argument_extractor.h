#ifndef CASCADE_ARGUMENT_EXTRACTOR_H_
#define CASCADE_ARGUMENT_EXTRACTOR_H_

#include <optional>
#include <random>
#include <vector>

#include "cascade/autograd.h"
#include "cascade/layers.h"
#include "cascade/schema.h"
#include "cascade/trigger_extractor.h"

namespace cascade {

struct ArgumentOptions {
  ExtractorOptions extractor;
  bool position_embedding = true;
  int position_dim = 64;
  int max_distance = 50;  // L_max: distances are clipped to [-L_max, L_max]
  bool indicator = true;
};

// Signed distance from each token to the trigger: negative before the span
// (measured to its start), 0 inside, positive after (measured to its end),
// clipped to [-max_distance, max_distance].
std::vector<int> RelativeDistances(int length, Span trigger, int max_distance);
// Distances shifted by max_distance into [0, 2 * max_distance].
std::vector<int> RelativePositionIndices(int length, Span trigger, int max_distance);

// Decoder 3: role-specific arguments of one (type, trigger) condition.
//
// The trigger embedding (mean of the fused states at the trigger boundaries)
// is fused into G^c, refined by self-attention, concatenated with relative
// position embeddings, and scored by one start/end tagger pair per role. Each
// role's probabilities are scaled by a learned indicator
// I(r, c) = sigmoid(w_r . c + b_r).
class ArgumentExtractor {
 public:
  ArgumentExtractor() = default;
  ArgumentExtractor(ParameterStore& store, int state_dim, int type_dim, int num_roles,
                    const ArgumentOptions& options, std::mt19937_64& rng);

  // (g_start + g_end) / 2. Throws ArgumentError if the span is out of range.
  Var TriggerEmbedding(Var fused, Span trigger) const;

  // Z^{ct}: N x conditioned_dim().
  Var ConditionOnTrigger(Var fused, Span trigger) const;

  // 1 x R. All ones when the indicator is disabled.
  Var RoleIndicator(Var type_embedding) const;

  struct Tagged {
    Var start;      // N x R
    Var end;        // N x R
    Var indicator;  // 1 x R
  };
  Tagged Tag(Var conditioned, Var type_embedding) const;

  int conditioned_dim() const;
  int num_roles() const { return num_roles_; }
  const ArgumentOptions& options() const { return options_; }
  const Fusion& fusion() const { return fusion_; }
  const std::optional<SelfAttentionBlock>& attention() const { return attention_; }
  const Linear& start_head() const { return start_head_; }
  const Linear& end_head() const { return end_head_; }
  const Linear& indicator() const { return indicator_; }
  Parameter* position_table() const { return position_table_; }

 private:
  ArgumentOptions options_;
  int num_roles_ = 0;
  Fusion fusion_;
  std::optional<SelfAttentionBlock> attention_;
  Parameter* position_table_ = nullptr;
  Linear start_head_;
  Linear end_head_;
  Linear indicator_;
};

}  // namespace cascade

#endif  // CASCADE_ARGUMENT_EXTRACTOR_H_
