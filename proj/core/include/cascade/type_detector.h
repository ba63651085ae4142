#ifndef CASCADE_TYPE_DETECTOR_H_
#define CASCADE_TYPE_DETECTOR_H_

#include <random>
#include <string_view>
#include <utility>
#include <vector>

#include "cascade/autograd.h"
#include "cascade/encoder.h"

namespace cascade {

enum class PoolingMode { kAdaptive, kMaxPool, kMeanPool, kCls };

std::string_view PoolingModeName(PoolingMode mode);
PoolingMode ParsePoolingMode(std::string_view name);

// Decoder 1: which event types occur in a sentence.
//
// delta(c, h) = v^T tanh([c; h; |c - h|; c .* h] W) scores a type embedding
// against a token; a type-adaptive sentence vector s_c is the softmax(delta)
// weighted sum of token states; p(c | x) = sigmoid(delta(c, s_c)).
class TypeDetector {
 public:
  TypeDetector() = default;
  TypeDetector(ParameterStore& store, int dim, PoolingMode pooling, std::mt19937_64& rng);

  // Row-wise delta over matching rows of cs and hs (M x d each) -> M x 1.
  Var Similarity(Var cs, Var hs) const;

  struct Pooled {
    Var sentence;  // T x d, row t is s_c for type t
    Var weights;   // T x N attention weights (adaptive pooling only)
  };
  // types: T x d embedding rows; states: N x d.
  Pooled AttendPool(Var types, Var states) const;

  // T x 1 probabilities for every type in the table.
  Var TypeProbabilities(Var types, const EncoderOutput& encoded) const;

  PoolingMode pooling() const { return pooling_; }
  int dim() const { return dim_; }
  Parameter* weight() const { return weight_; }
  Parameter* projection() const { return projection_; }

 private:
  int dim_ = 0;
  PoolingMode pooling_ = PoolingMode::kAdaptive;
  Parameter* weight_ = nullptr;      // 4d x 4d
  Parameter* projection_ = nullptr;  // 4d x 1
};

// Types whose probability strictly exceeds the threshold, with probabilities,
// in type-index order.
std::vector<std::pair<int, double>> DetectTypes(const Matrix& type_probs, double threshold);

}  // namespace cascade

#endif  // CASCADE_TYPE_DETECTOR_H_
