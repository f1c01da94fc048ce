#include "gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "recnet/rng.hpp"

namespace recnet::testing {

double relative_error(double analytic, double numeric) {
  const double scale = std::max({std::abs(analytic), std::abs(numeric), kGradFloor});
  return std::abs(analytic - numeric) / scale;
}

GradCheckReport grad_check(const std::function<ad::Tensor()>& loss,
                           const std::vector<std::pair<std::string, ad::Tensor>>& inputs, double h,
                           std::size_t max_per_input, std::uint64_t seed) {
  for (const auto& [name, t] : inputs) {
    auto copy = t;
    copy.clear_grad();
  }
  ad::backward(loss());
  std::vector<std::vector<double>> analytic;
  for (const auto& [name, t] : inputs) {
    auto g = t.grad();
    analytic.emplace_back(t.size(), 0.0);
    std::copy(g.begin(), g.end(), analytic.back().begin());
  }

  auto eval = [&] {
    ad::NoGradGuard no_grad;
    return loss().item();
  };

  Rng rng(seed);
  GradCheckReport report;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    auto tensor = inputs[k].second;
    std::vector<std::size_t> idx(tensor.size());
    std::iota(idx.begin(), idx.end(), 0);
    if (max_per_input && idx.size() > max_per_input) {
      for (std::size_t i = 0; i < max_per_input; ++i) {
        std::swap(idx[i], idx[i + rng.below(idx.size() - i)]);
      }
      idx.resize(max_per_input);
    }
    auto values = tensor.mutable_values();
    for (std::size_t i : idx) {
      const double x = values[i];
      values[i] = x + h;
      const double f1 = eval();
      values[i] = x - h;
      const double fm1 = eval();
      values[i] = x + 2 * h;
      const double f2 = eval();
      values[i] = x - 2 * h;
      const double fm2 = eval();
      values[i] = x;
      const double numeric = (8.0 * (f1 - fm1) - (f2 - fm2)) / (12.0 * h);
      const double err = relative_error(analytic[k][i], numeric);
      ++report.checked;
      if (!(err <= report.max_rel_error)) {
        report.max_rel_error = std::isnan(err) ? INFINITY : err;
        char buf[200];
        std::snprintf(buf, sizeof buf, "%s[%zu]: analytic %.10g vs numeric %.10g", inputs[k].first.c_str(), i,
                      analytic[k][i], numeric);
        report.worst = buf;
      }
    }
  }
  return report;
}

}  // namespace recnet::testing
