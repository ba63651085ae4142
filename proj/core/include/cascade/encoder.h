#ifndef CASCADE_ENCODER_H_
#define CASCADE_ENCODER_H_

#include <optional>
#include <random>
#include <span>
#include <vector>

#include "cascade/autograd.h"
#include "cascade/layers.h"

namespace cascade {

struct EncoderOutput {
  Var states;                   // N x hidden_dim, one row per input token
  std::optional<Var> sentence;  // 1 x hidden_dim when a sentence token is prepended
};

// Contextual encoder contract: N token ids in, N vectors of hidden_dim out.
//
// A pretrained encoder plugs in by implementing this interface, registering
// its weights in the model's ParameterStore under ParamGroup::kEncoder, and
// returning its final hidden layer from Encode. Everything downstream only
// sees EncoderOutput.
class Encoder {
 public:
  virtual ~Encoder() = default;
  virtual int hidden_dim() const = 0;
  virtual int max_length() const = 0;
  // rng is only consulted when training (dropout). Ids outside the vocabulary
  // map to Vocabulary::kUnk. Throws TruncationError when N > max_length().
  virtual EncoderOutput Encode(Tape& tape, std::span<const int> ids, bool training,
                               std::mt19937_64* rng) const = 0;
};

struct ToyEncoderConfig {
  int vocab_size = 3;
  int hidden_dim = 64;
  int layers = 2;
  int heads = 4;
  bool feed_forward = true;
  int ff_dim = 128;
  int max_length = 128;
  double dropout = 0.3;
  bool sentence_token = false;
};

// Small transformer trained from scratch: token + learned absolute position
// embeddings, layer norm, then `layers` self-attention blocks.
class ToyTransformerEncoder : public Encoder {
 public:
  ToyTransformerEncoder(ParameterStore& store, const ToyEncoderConfig& config,
                        std::mt19937_64& rng);

  int hidden_dim() const override { return config_.hidden_dim; }
  int max_length() const override { return config_.max_length; }
  EncoderOutput Encode(Tape& tape, std::span<const int> ids, bool training,
                       std::mt19937_64* rng) const override;

  const ToyEncoderConfig& config() const { return config_; }

 private:
  ToyEncoderConfig config_;
  Parameter* token_table_ = nullptr;
  Parameter* position_table_ = nullptr;
  LayerNorm input_norm_;
  std::vector<SelfAttentionBlock> blocks_;
};

}  // namespace cascade

#endif  // CASCADE_ENCODER_H_
