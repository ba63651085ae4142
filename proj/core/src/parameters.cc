#include "cascade/parameters.h"

#include <cmath>

#include "cascade/errors.h"

namespace cascade {

Parameter* ParameterStore::Add(const std::string& name, int rows, int cols,
                               Init init, ParamGroup group, bool decay,
                               std::mt19937_64& rng) {
  if (index_.count(name) > 0) {
    throw ArgumentError("duplicate parameter name: " + name);
  }
  Parameter p;
  p.name = name;
  p.group = group;
  p.decay = decay;
  p.value.resize(rows, cols);
  p.grad = Matrix::Zero(rows, cols);
  switch (init) {
    case Init::kZeros:
      p.value.setZero();
      break;
    case Init::kOnes:
      p.value.setOnes();
      break;
    case Init::kXavierUniform: {
      const double a = std::sqrt(6.0 / static_cast<double>(rows + cols));
      std::uniform_real_distribution<double> dist(-a, a);
      for (Eigen::Index i = 0; i < p.value.size(); ++i) p.value.data()[i] = dist(rng);
      break;
    }
    case Init::kNormal: {
      std::normal_distribution<double> dist(0.0, 0.02);
      for (Eigen::Index i = 0; i < p.value.size(); ++i) p.value.data()[i] = dist(rng);
      break;
    }
  }
  index_[name] = params_.size();
  params_.push_back(std::move(p));
  return &params_.back();
}

Parameter* ParameterStore::Find(const std::string& name) {
  auto it = index_.find(name);
  return it == index_.end() ? nullptr : &params_[it->second];
}

const Parameter* ParameterStore::Find(const std::string& name) const {
  auto it = index_.find(name);
  return it == index_.end() ? nullptr : &params_[it->second];
}

std::vector<Parameter*> ParameterStore::All() {
  std::vector<Parameter*> out;
  out.reserve(params_.size());
  for (auto& p : params_) out.push_back(&p);
  return out;
}

std::vector<const Parameter*> ParameterStore::All() const {
  std::vector<const Parameter*> out;
  out.reserve(params_.size());
  for (const auto& p : params_) out.push_back(&p);
  return out;
}

void ParameterStore::ZeroGrad() {
  for (auto& p : params_) p.grad.setZero();
}

int ParameterStore::TotalSize() const {
  int total = 0;
  for (const auto& p : params_) total += p.size();
  return total;
}

void ParameterStore::CopyValuesFrom(const ParameterStore& other) {
  if (other.params_.size() != params_.size()) {
    throw ShapeError("parameter stores differ in size");
  }
  for (size_t i = 0; i < params_.size(); ++i) {
    const Parameter& src = other.params_[i];
    Parameter& dst = params_[i];
    if (src.name != dst.name || src.value.rows() != dst.value.rows() ||
        src.value.cols() != dst.value.cols()) {
      throw ShapeError("parameter layout mismatch at " + dst.name);
    }
    dst.value = src.value;
  }
}

}  // namespace cascade
