#include "cascade/trigger_extractor.h"

namespace cascade {

TriggerExtractor::TriggerExtractor(ParameterStore& store, int state_dim, int type_dim,
                                   const ExtractorOptions& options, std::mt19937_64& rng) {
  const auto g = ParamGroup::kDecoder;
  fusion_ = Fusion(store, "trigger.fusion", options.fusion, type_dim, state_dim, g, rng);
  const int dim = fusion_.output_dim();
  if (options.self_attention) {
    attention_.emplace(store, "trigger.attention", dim, options.heads, options.feed_forward,
                       2 * dim, g, rng);
  }
  start_head_ = Linear(store, "trigger.start", dim, 1, g, rng);
  end_head_ = Linear(store, "trigger.end", dim, 1, g, rng);
}

TriggerExtractor::Conditioned TriggerExtractor::ConditionOnType(Var states,
                                                                Var type_embedding) const {
  Var fused = fusion_.Forward(type_embedding, states);
  Var refined = attention_ ? attention_->Forward(fused) : fused;
  return Conditioned{fused, refined};
}

TriggerExtractor::Tagged TriggerExtractor::Tag(Var refined) const {
  return Tagged{Sigmoid(start_head_.Forward(refined)), Sigmoid(end_head_.Forward(refined))};
}

}  // namespace cascade
