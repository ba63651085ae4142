#include "cascade/argument_extractor.h"

#include <algorithm>
#include <string>

#include "cascade/errors.h"

namespace cascade {

std::vector<int> RelativeDistances(int length, Span trigger, int max_distance) {
  if (trigger.start < 0 || trigger.start > trigger.end || trigger.end >= length) {
    throw ArgumentError("trigger span outside the sentence");
  }
  std::vector<int> out(static_cast<size_t>(length));
  for (int i = 0; i < length; ++i) {
    int d = 0;
    if (i < trigger.start) d = i - trigger.start;
    if (i > trigger.end) d = i - trigger.end;
    out[static_cast<size_t>(i)] = std::clamp(d, -max_distance, max_distance);
  }
  return out;
}

std::vector<int> RelativePositionIndices(int length, Span trigger, int max_distance) {
  std::vector<int> out = RelativeDistances(length, trigger, max_distance);
  for (int& d : out) d += max_distance;
  return out;
}

ArgumentExtractor::ArgumentExtractor(ParameterStore& store, int state_dim, int type_dim,
                                     int num_roles, const ArgumentOptions& options,
                                     std::mt19937_64& rng)
    : options_(options), num_roles_(num_roles) {
  const auto g = ParamGroup::kDecoder;
  fusion_ = Fusion(store, "argument.fusion", options.extractor.fusion, state_dim, state_dim, g,
                   rng);
  const int dim = fusion_.output_dim();
  if (options.extractor.self_attention) {
    attention_.emplace(store, "argument.attention", dim, options.extractor.heads,
                       options.extractor.feed_forward, 2 * dim, g, rng);
  }
  if (options.position_embedding) {
    position_table_ = store.Add("argument.relative_position", 2 * options.max_distance + 1,
                                options.position_dim, Init::kNormal, g, true, rng);
  }
  start_head_ = Linear(store, "argument.start", conditioned_dim(), num_roles, g, rng);
  end_head_ = Linear(store, "argument.end", conditioned_dim(), num_roles, g, rng);
  if (options.indicator) {
    indicator_ = Linear(store, "argument.indicator", type_dim, num_roles, g, rng);
  }
}

int ArgumentExtractor::conditioned_dim() const {
  return fusion_.output_dim() + (options_.position_embedding ? options_.position_dim : 0);
}

Var ArgumentExtractor::TriggerEmbedding(Var fused, Span trigger) const {
  if (trigger.start < 0 || trigger.start > trigger.end || trigger.end >= fused.rows()) {
    throw ArgumentError("trigger span [" + std::to_string(trigger.start) + ", " +
                        std::to_string(trigger.end) + "] outside sentence of " +
                        std::to_string(fused.rows()) + " tokens");
  }
  return Scale(Add(SliceRows(fused, trigger.start, 1), SliceRows(fused, trigger.end, 1)), 0.5);
}

Var ArgumentExtractor::ConditionOnTrigger(Var fused, Span trigger) const {
  Var refined = fusion_.Forward(TriggerEmbedding(fused, trigger), fused);
  if (attention_) refined = attention_->Forward(refined);
  if (!options_.position_embedding) return refined;
  const std::vector<int> idx =
      RelativePositionIndices(static_cast<int>(fused.rows()), trigger, options_.max_distance);
  Var positions = GatherRows(fused.tape()->Param(*position_table_), idx);
  return ConcatCols({refined, positions});
}

Var ArgumentExtractor::RoleIndicator(Var type_embedding) const {
  if (!options_.indicator) {
    return type_embedding.tape()->Constant(Matrix::Ones(1, num_roles_));
  }
  return Sigmoid(indicator_.Forward(type_embedding));
}

ArgumentExtractor::Tagged ArgumentExtractor::Tag(Var conditioned, Var type_embedding) const {
  Var indicator = RoleIndicator(type_embedding);
  Var start = MulRow(Sigmoid(start_head_.Forward(conditioned)), indicator);
  Var end = MulRow(Sigmoid(end_head_.Forward(conditioned)), indicator);
  return Tagged{start, end, indicator};
}

}  // namespace cascade
