#include "cascade/type_detector.h"

#include <string>

#include "cascade/errors.h"

namespace cascade {

std::string_view PoolingModeName(PoolingMode mode) {
  switch (mode) {
    case PoolingMode::kAdaptive: return "adaptive";
    case PoolingMode::kMaxPool: return "maxp";
    case PoolingMode::kMeanPool: return "meanp";
    case PoolingMode::kCls: return "cls";
  }
  return "adaptive";
}

PoolingMode ParsePoolingMode(std::string_view name) {
  if (name == "adaptive") return PoolingMode::kAdaptive;
  if (name == "maxp") return PoolingMode::kMaxPool;
  if (name == "meanp") return PoolingMode::kMeanPool;
  if (name == "cls") return PoolingMode::kCls;
  throw ConfigError("unknown pooling mode: " + std::string(name));
}

TypeDetector::TypeDetector(ParameterStore& store, int dim, PoolingMode pooling,
                           std::mt19937_64& rng)
    : dim_(dim), pooling_(pooling) {
  weight_ = store.Add("type_detector.similarity_weight", 4 * dim, 4 * dim, Init::kXavierUniform,
                      ParamGroup::kDecoder, true, rng);
  projection_ = store.Add("type_detector.similarity_projection", 4 * dim, 1,
                          Init::kXavierUniform, ParamGroup::kDecoder, true, rng);
}

Var TypeDetector::Similarity(Var cs, Var hs) const {
  if (cs.cols() != dim_ || hs.cols() != dim_ || cs.rows() != hs.rows()) {
    throw ShapeError("similarity: expected matching M x " + std::to_string(dim_) + " inputs");
  }
  Tape* t = cs.tape();
  Var features = ConcatCols({cs, hs, Abs(Sub(cs, hs)), Mul(cs, hs)});
  return MatMul(Tanh(MatMul(features, t->Param(*weight_))), t->Param(*projection_));
}

TypeDetector::Pooled TypeDetector::AttendPool(Var types, Var states) const {
  const Eigen::Index num_types = types.rows();
  const Eigen::Index n = states.rows();
  if (n < 1) throw ShapeError("attend_pool: empty sentence");
  // Pair (t, i) lives in row t * n + i.
  Var scores = Similarity(RepeatRows(types, n), TileRows(states, num_types));
  Var weights = SoftmaxRows(Reshape(scores, num_types, n));
  return Pooled{MatMul(weights, states), weights};
}

Var TypeDetector::TypeProbabilities(Var types, const EncoderOutput& encoded) const {
  Var pooled;
  switch (pooling_) {
    case PoolingMode::kAdaptive:
      pooled = AttendPool(types, encoded.states).sentence;
      break;
    case PoolingMode::kMaxPool:
      pooled = TileRows(MaxOverRows(encoded.states), types.rows());
      break;
    case PoolingMode::kMeanPool:
      pooled = TileRows(MeanOverRows(encoded.states), types.rows());
      break;
    case PoolingMode::kCls:
      if (!encoded.sentence) {
        throw ConfigError("cls pooling needs an encoder with a sentence token");
      }
      pooled = TileRows(*encoded.sentence, types.rows());
      break;
  }
  return Sigmoid(Similarity(types, pooled));
}

std::vector<std::pair<int, double>> DetectTypes(const Matrix& type_probs, double threshold) {
  std::vector<std::pair<int, double>> out;
  for (Eigen::Index t = 0; t < type_probs.rows(); ++t) {
    if (type_probs(t, 0) > threshold) out.emplace_back(static_cast<int>(t), type_probs(t, 0));
  }
  return out;
}

}  // namespace cascade
