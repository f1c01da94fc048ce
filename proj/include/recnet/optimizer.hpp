#pragma once

#include <memory>
#include <string>
#include <vector>

#include "recnet/parameter.hpp"

namespace recnet::train {

struct AdaDeltaConfig {
  double rho = 0.95;
  double eps = 1e-6;
};

struct AdamConfig {
  double lr = 1e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

enum class OptimizerKind { adadelta, adam };
std::string to_string(OptimizerKind kind);
OptimizerKind parse_optimizer_kind(const std::string& text);

// Applies one update from the gradients currently held by the parameters.
// Absent gradients count as zero. State is keyed by registration index, so
// the parameter set may grow between steps but never reorder.
class Optimizer {
 public:
  virtual ~Optimizer() = default;
  virtual void step(const ad::ParameterSet& params) = 0;
};

class AdaDelta final : public Optimizer {
 public:
  explicit AdaDelta(AdaDeltaConfig config = {}) : config_(config) {}
  void step(const ad::ParameterSet& params) override;

 private:
  AdaDeltaConfig config_;
  std::vector<std::vector<double>> sq_grad_;
  std::vector<std::vector<double>> sq_delta_;
};

class Adam final : public Optimizer {
 public:
  explicit Adam(AdamConfig config = {}) : config_(config) {}
  void step(const ad::ParameterSet& params) override;

 private:
  AdamConfig config_;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
  long t_ = 0;
};

std::unique_ptr<Optimizer> make_optimizer(OptimizerKind kind, const AdaDeltaConfig& adadelta,
                                          const AdamConfig& adam);

}  // namespace recnet::train
