#ifndef CASCADE_MODEL_H_
#define CASCADE_MODEL_H_

#include <memory>
#include <random>
#include <span>
#include <vector>

#include "cascade/argument_extractor.h"
#include "cascade/encoder.h"
#include "cascade/parameters.h"
#include "cascade/schema.h"
#include "cascade/trigger_extractor.h"
#include "cascade/type_detector.h"
#include "cascade/vocabulary.h"

namespace cascade {

struct ModelConfig {
  ToyEncoderConfig encoder;  // vocab_size is taken from the vocabulary
  PoolingMode pooling = PoolingMode::kAdaptive;
  ExtractorOptions trigger;
  ArgumentOptions argument;
  // One type-embedding table serves the detector, the trigger condition and
  // the role indicator. When split, the indicator reads its own table.
  bool split_type_embeddings = false;
  uint64_t seed = 42;
};

// Shared encoder plus the three cascade decoders.
class CascadeModel {
 public:
  CascadeModel(EventSchema schema, Vocabulary vocab, const ModelConfig& config);
  CascadeModel(const CascadeModel&) = delete;
  CascadeModel& operator=(const CascadeModel&) = delete;

  const EventSchema& schema() const { return schema_; }
  const Vocabulary& vocab() const { return vocab_; }
  const ModelConfig& config() const { return config_; }
  ParameterStore& params() { return params_; }
  const ParameterStore& params() const { return params_; }

  const Encoder& encoder() const { return *encoder_; }
  const TypeDetector& type_detector() const { return type_detector_; }
  const TriggerExtractor& trigger_extractor() const { return trigger_extractor_; }
  const ArgumentExtractor& argument_extractor() const { return argument_extractor_; }
  Parameter* type_table() const { return type_table_; }
  Parameter* indicator_type_table() const { return indicator_table_; }

  int hidden_dim() const { return encoder_->hidden_dim(); }

  EncoderOutput Encode(Tape& tape, std::span<const int> ids, bool training,
                       std::mt19937_64* rng) const;
  // |types| x d.
  Var TypeEmbeddings(Tape& tape) const;
  Var TypeEmbedding(Tape& tape, int type) const;
  // Row fed to the role indicator (same as TypeEmbedding unless split).
  Var IndicatorEmbedding(Tape& tape, int type) const;

 private:
  EventSchema schema_;
  Vocabulary vocab_;
  ModelConfig config_;
  ParameterStore params_;
  std::unique_ptr<Encoder> encoder_;
  Parameter* type_table_ = nullptr;
  Parameter* indicator_table_ = nullptr;
  TypeDetector type_detector_;
  TriggerExtractor trigger_extractor_;
  ArgumentExtractor argument_extractor_;
};

}  // namespace cascade

#endif  // CASCADE_MODEL_H_
