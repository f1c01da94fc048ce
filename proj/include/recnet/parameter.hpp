#pragma once

#include <string>
#include <vector>

#include "recnet/rng.hpp"
#include "recnet/tensor.hpp"

namespace recnet::ad {

struct Parameter {
  std::string name;  // dotted path, e.g. "decoder.attn.w_vd"
  Tensor tensor;
};

// Ordered registry of named trainable tensors. Registration order is the
// iteration order everywhere (optimizer state, checkpoints).
class ParameterSet {
 public:
  // Uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)].
  Tensor add_uniform(const std::string& name, Shape shape, std::size_t fan_in, Rng& rng);
  Tensor add_zeros(const std::string& name, Shape shape);
  Tensor add(const std::string& name, Shape shape, std::vector<double> values);

  const Parameter* find(const std::string& name) const;
  Tensor at(const std::string& name) const;

  std::size_t size() const { return params_.size(); }
  auto begin() const { return params_.begin(); }
  auto end() const { return params_.end(); }
  const Parameter& operator[](std::size_t i) const { return params_[i]; }

  void zero_grad();
  std::size_t scalar_count() const;

 private:
  std::vector<Parameter> params_;
};

}  // namespace recnet::ad
