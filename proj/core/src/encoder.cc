#include "cascade/encoder.h"

#include <cmath>
#include <numeric>
#include <string>

#include "cascade/errors.h"
#include "cascade/vocabulary.h"

namespace cascade {

ToyTransformerEncoder::ToyTransformerEncoder(ParameterStore& store,
                                             const ToyEncoderConfig& config,
                                             std::mt19937_64& rng)
    : config_(config) {
  if (config.hidden_dim % config.heads != 0) {
    throw ConfigError("encoder hidden_dim must be divisible by heads");
  }
  if (config.vocab_size < 3) throw ConfigError("encoder vocabulary too small");
  const auto g = ParamGroup::kEncoder;
  token_table_ = store.Add("encoder.token_embedding", config.vocab_size, config.hidden_dim,
                           Init::kNormal, g, true, rng);
  position_table_ = store.Add("encoder.position_embedding", config.max_length + 1,
                              config.hidden_dim, Init::kNormal, g, true, rng);
  // Start the (still learned) position table from sinusoids so attention can
  // pick out neighbours by offset early on. Scaled to match the token table.
  const double amplitude = 0.02 * std::sqrt(2.0);
  for (int pos = 0; pos <= config.max_length; ++pos) {
    for (int k = 0; k < config.hidden_dim; ++k) {
      const double rate = std::pow(10000.0, -static_cast<double>(k / 2 * 2) / config.hidden_dim);
      const double angle = pos * rate;
      position_table_->value(pos, k) = amplitude * (k % 2 == 0 ? std::sin(angle) : std::cos(angle));
    }
  }
  input_norm_ = LayerNorm(store, "encoder.input_norm", config.hidden_dim, g, rng);
  for (int l = 0; l < config.layers; ++l) {
    blocks_.emplace_back(store, "encoder.block" + std::to_string(l), config.hidden_dim,
                         config.heads, config.feed_forward, config.ff_dim, g, rng);
  }
}

EncoderOutput ToyTransformerEncoder::Encode(Tape& tape, std::span<const int> ids, bool training,
                                            std::mt19937_64* rng) const {
  const int n = static_cast<int>(ids.size());
  if (n < 1) throw ArgumentError("encoder input is empty");
  if (n > config_.max_length) {
    throw TruncationError("sequence of " + std::to_string(n) + " tokens exceeds max length " +
                          std::to_string(config_.max_length));
  }
  std::vector<int> input;
  input.reserve(static_cast<size_t>(n) + 1);
  if (config_.sentence_token) input.push_back(Vocabulary::kSentence);
  for (int id : ids) input.push_back(id >= 0 && id < config_.vocab_size ? id : Vocabulary::kUnk);
  std::vector<int> positions(input.size());
  std::iota(positions.begin(), positions.end(), 0);

  Var x = Add(GatherRows(tape.Param(*token_table_), input),
              GatherRows(tape.Param(*position_table_), positions));
  x = input_norm_.Forward(x);
  for (const auto& block : blocks_) x = block.Forward(x);
  if (training && config_.dropout > 0.0) {
    if (rng == nullptr) throw ArgumentError("training encode needs an rng for dropout");
    x = Dropout(x, config_.dropout, *rng);
  }
  EncoderOutput out;
  if (config_.sentence_token) {
    out.sentence = SliceRows(x, 0, 1);
    out.states = SliceRows(x, 1, n);
  } else {
    out.states = x;
  }
  return out;
}

}  // namespace cascade
