#include "recnet/parameter.hpp"

#include <cmath>
#include <stdexcept>

namespace recnet::ad {

Tensor ParameterSet::add(const std::string& name, Shape shape, std::vector<double> values) {
  if (find(name)) throw std::invalid_argument("duplicate parameter name: " + name);
  auto t = Tensor::variable(std::move(shape), std::move(values));
  params_.push_back({name, t});
  return t;
}

Tensor ParameterSet::add_uniform(const std::string& name, Shape shape, std::size_t fan_in,
                                 Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  std::vector<double> values(shape_size(shape));
  for (auto& v : values) v = rng.uniform(-bound, bound);
  return add(name, std::move(shape), std::move(values));
}

Tensor ParameterSet::add_zeros(const std::string& name, Shape shape) {
  auto n = shape_size(shape);
  return add(name, std::move(shape), std::vector<double>(n, 0.0));
}

const Parameter* ParameterSet::find(const std::string& name) const {
  for (const auto& p : params_)
    if (p.name == name) return &p;
  return nullptr;
}

Tensor ParameterSet::at(const std::string& name) const {
  const auto* p = find(name);
  if (!p) throw std::out_of_range("unknown parameter: " + name);
  return p->tensor;
}

void ParameterSet::zero_grad() {
  for (auto& p : params_) p.tensor.clear_grad();
}

std::size_t ParameterSet::scalar_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.tensor.size();
  return n;
}

}  // namespace recnet::ad
