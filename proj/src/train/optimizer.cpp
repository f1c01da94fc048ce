#include "recnet/optimizer.hpp"

#include <cmath>
#include <stdexcept>

namespace recnet::train {

std::string to_string(OptimizerKind kind) { return kind == OptimizerKind::adam ? "adam" : "adadelta"; }

OptimizerKind parse_optimizer_kind(const std::string& text) {
  if (text == "adadelta") return OptimizerKind::adadelta;
  if (text == "adam") return OptimizerKind::adam;
  throw std::invalid_argument("unknown optimizer '" + text + "' (adadelta|adam)");
}

namespace {

void grow(std::vector<std::vector<double>>& state, const ad::ParameterSet& params) {
  for (std::size_t i = state.size(); i < params.size(); ++i) state.emplace_back(params[i].tensor.size(), 0.0);
}

}  // namespace

void AdaDelta::step(const ad::ParameterSet& params) {
  grow(sq_grad_, params);
  grow(sq_delta_, params);
  const double rho = config_.rho, eps = config_.eps;
  for (std::size_t p = 0; p < params.size(); ++p) {
    auto tensor = params[p].tensor;
    auto grad = tensor.grad();
    if (grad.empty()) continue;
    auto values = tensor.mutable_values();
    auto& eg = sq_grad_[p];
    auto& ed = sq_delta_[p];
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double g = grad[i];
      eg[i] = rho * eg[i] + (1.0 - rho) * g * g;
      const double delta = -std::sqrt(ed[i] + eps) / std::sqrt(eg[i] + eps) * g;
      ed[i] = rho * ed[i] + (1.0 - rho) * delta * delta;
      values[i] += delta;
    }
  }
}

void Adam::step(const ad::ParameterSet& params) {
  grow(m_, params);
  grow(v_, params);
  ++t_;
  const double b1 = config_.beta1, b2 = config_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  for (std::size_t p = 0; p < params.size(); ++p) {
    auto tensor = params[p].tensor;
    auto grad = tensor.grad();
    auto values = tensor.mutable_values();
    auto& m = m_[p];
    auto& v = v_[p];
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double g = grad.empty() ? 0.0 : grad[i];
      m[i] = b1 * m[i] + (1.0 - b1) * g;
      v[i] = b2 * v[i] + (1.0 - b2) * g * g;
      values[i] -= config_.lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + config_.eps);
    }
  }
}

std::unique_ptr<Optimizer> make_optimizer(OptimizerKind kind, const AdaDeltaConfig& adadelta,
                                          const AdamConfig& adam) {
  if (kind == OptimizerKind::adam) return std::make_unique<Adam>(adam);
  return std::make_unique<AdaDelta>(adadelta);
}

}  // namespace recnet::train
