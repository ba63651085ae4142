#include "cascade/model.h"

namespace cascade {

CascadeModel::CascadeModel(EventSchema schema, Vocabulary vocab, const ModelConfig& config)
    : schema_(std::move(schema)), vocab_(std::move(vocab)), config_(config) {
  config_.encoder.vocab_size = vocab_.size();
  config_.encoder.sentence_token = config_.pooling == PoolingMode::kCls;
  std::mt19937_64 rng(config_.seed);
  encoder_ = std::make_unique<ToyTransformerEncoder>(params_, config_.encoder, rng);
  const int d = encoder_->hidden_dim();
  type_table_ = params_.Add("type_embedding", schema_.num_types(), d, Init::kNormal,
                            ParamGroup::kDecoder, true, rng);
  indicator_table_ = type_table_;
  if (config_.split_type_embeddings) {
    indicator_table_ = params_.Add("indicator_type_embedding", schema_.num_types(), d,
                                   Init::kNormal, ParamGroup::kDecoder, true, rng);
  }
  type_detector_ = TypeDetector(params_, d, config_.pooling, rng);
  trigger_extractor_ = TriggerExtractor(params_, d, d, config_.trigger, rng);
  argument_extractor_ = ArgumentExtractor(params_, trigger_extractor_.fused_dim(), d,
                                          schema_.num_roles(), config_.argument, rng);
}

EncoderOutput CascadeModel::Encode(Tape& tape, std::span<const int> ids, bool training,
                                   std::mt19937_64* rng) const {
  return encoder_->Encode(tape, ids, training, rng);
}

Var CascadeModel::TypeEmbeddings(Tape& tape) const { return tape.Param(*type_table_); }

Var CascadeModel::TypeEmbedding(Tape& tape, int type) const {
  return SliceRows(tape.Param(*type_table_), type, 1);
}

Var CascadeModel::IndicatorEmbedding(Tape& tape, int type) const {
  return SliceRows(tape.Param(*indicator_table_), type, 1);
}

}  // namespace cascade
