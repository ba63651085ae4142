#ifndef CASCADE_PARAMETERS_H_
#define CASCADE_PARAMETERS_H_

#include <deque>
#include <map>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace cascade {

// Row-major so that a token sequence is a (tokens x features) matrix and a
// single vector is a 1 x d row.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Optimizer parameter groups. The encoder and the three decoders train with
// separate learning rates.
enum class ParamGroup { kEncoder, kDecoder };

enum class Init {
  kZeros,
  kOnes,
  kXavierUniform,  // U(-a, a), a = sqrt(6 / (fan_in + fan_out))
  kNormal,         // N(0, 0.02^2)
};

struct Parameter {
  std::string name;
  Matrix value;
  Matrix grad;
  ParamGroup group = ParamGroup::kDecoder;
  // Decoupled weight decay applies to weight matrices and embeddings, not to
  // biases or normalization parameters.
  bool decay = true;

  int size() const { return static_cast<int>(value.size()); }
};

// Owns every trainable tensor of a model. Addresses are stable for the
// lifetime of the store, so layers hold raw pointers into it.
class ParameterStore {
 public:
  ParameterStore() = default;
  ParameterStore(const ParameterStore&) = delete;
  ParameterStore& operator=(const ParameterStore&) = delete;

  // Registers a new tensor. Throws ArgumentError on a duplicate name.
  Parameter* Add(const std::string& name, int rows, int cols, Init init,
                 ParamGroup group, bool decay, std::mt19937_64& rng);

  Parameter* Find(const std::string& name);
  const Parameter* Find(const std::string& name) const;

  // Insertion order.
  std::vector<Parameter*> All();
  std::vector<const Parameter*> All() const;

  void ZeroGrad();
  int TotalSize() const;
  size_t count() const { return params_.size(); }

  // Copies values (not gradients) from another store with identical layout.
  void CopyValuesFrom(const ParameterStore& other);

 private:
  std::deque<Parameter> params_;
  std::map<std::string, size_t> index_;
};

}  // namespace cascade

#endif  // CASCADE_PARAMETERS_H_
