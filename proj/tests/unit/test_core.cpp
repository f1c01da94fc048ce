#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "gradcheck.hpp"
#include "recnet/ops.hpp"
#include "recnet/optimizer.hpp"
#include "recnet/parameter.hpp"
#include "recnet/rng.hpp"
#include "suites.hpp"

using namespace recnet;
using ad::Tensor;

TEST(Rng, SameSeedSameStream) {
  Rng a(42), b(42), c(43);
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next_u64();
    EXPECT_EQ(x, b.next_u64());
    (void)c;
  }
  Rng d(42), e(43);
  EXPECT_NE(d.next_u64(), e.next_u64());
}

TEST(Rng, SplitmixKnownValue) {
  // First output of splitmix64 from state 0.
  std::uint64_t s = 0;
  EXPECT_EQ(splitmix64(s), 0xE220A8397B1DCDAFull);
}

TEST(Rng, RangesAndMoments) {
  Rng rng(5);
  double sum = 0, sq = 0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    ASSERT_LT(rng.below(7), 7u);
    const double z = rng.normal();
    sum += z;
    sq += z * z;
  }
  EXPECT_NEAR(sum / n, 0.0, 0.05);
  EXPECT_NEAR(sq / n, 1.0, 0.05);
}

TEST(Rng, SplitIsIndependentAndDeterministic) {
  Rng a(9), b(9);
  auto ca = a.split();
  auto cb = b.split();
  EXPECT_EQ(ca.next_u64(), cb.next_u64());
  EXPECT_EQ(a.next_u64(), b.next_u64());
  Rng p(9);
  auto child = p.split();
  EXPECT_NE(child.next_u64(), p.next_u64());
}

TEST(Ops, MatmulValues) {
  auto a = Tensor::matrix(2, 3, {1, 2, 3, 4, 5, 6});
  auto b = Tensor::matrix(3, 2, {7, 8, 9, 10, 11, 12});
  auto c = ad::matmul(a, b);
  ASSERT_EQ(c.shape(), (ad::Shape{2, 2}));
  EXPECT_EQ(c.at(0, 0), 58);
  EXPECT_EQ(c.at(0, 1), 64);
  EXPECT_EQ(c.at(1, 0), 139);
  EXPECT_EQ(c.at(1, 1), 154);
}

TEST(Ops, ShapeMismatchThrows) {
  auto a = Tensor::matrix(2, 3, std::vector<double>(6, 1.0));
  auto x = Tensor::vector({1, 2});
  EXPECT_THROW(ad::matvec(a, x), ad::DimensionError);
  EXPECT_THROW(ad::add(x, Tensor::vector({1, 2, 3})), ad::DimensionError);
}

TEST(Ops, SoftmaxStableForLargeInputs) {
  auto p = ad::softmax(Tensor::vector({1000.0, 1001.0, 999.0}));
  double s = 0;
  for (double v : p.values()) {
    EXPECT_TRUE(std::isfinite(v));
    s += v;
  }
  EXPECT_NEAR(s, 1.0, 1e-15);
  auto lp = ad::log_softmax(Tensor::vector({-1000.0, 0.0}));
  EXPECT_NEAR(lp[1], 0.0, 1e-15);
  EXPECT_NEAR(lp[0], -1000.0, 1e-9);
}

TEST(Ops, SqEuclideanAveragesOverDimension) {
  auto d = ad::sq_euclidean(Tensor::vector({1, 2, 3, 4}), Tensor::vector({0, 2, 3, 6}));
  EXPECT_DOUBLE_EQ(d.item(), (1.0 + 4.0) / 4.0);
}

TEST(Autodiff, SharedSubexpressionAccumulates) {
  auto x = Tensor::variable({1}, {3.0});
  auto y = ad::hadamard(x, x);  // x^2
  auto z = ad::sum(ad::add(y, x));
  ad::backward(z);
  EXPECT_DOUBLE_EQ(x.grad()[0], 7.0);
}

TEST(Autodiff, NoGradGuardBuildsNoGraph) {
  auto x = Tensor::variable({2}, {1.0, 2.0});
  {
    ad::NoGradGuard guard;
    EXPECT_FALSE(ad::grad_enabled());
    auto y = ad::sum(ad::tanh(x));
    EXPECT_FALSE(y.requires_grad());
    EXPECT_TRUE(y.node()->parents.empty());
  }
  EXPECT_TRUE(ad::grad_enabled());
}

TEST(Autodiff, ConstantsGetNoGradient) {
  auto c = Tensor::vector({1.0, 2.0});
  auto x = Tensor::variable({2}, {0.5, 0.5});
  ad::backward(ad::sum(ad::hadamard(c, x)));
  EXPECT_FALSE(c.has_grad());
  EXPECT_DOUBLE_EQ(x.grad()[1], 2.0);
}

TEST(GradCheck, EveryPrimitive) {
  for (const auto& c : recnet::testing::primitive_gradient_cases(10, 11)) {
    EXPECT_LE(c.max_rel_error, recnet::testing::kGradTolerance) << c.name << " " << c.worst;
    EXPECT_EQ(c.instances, 10u);
  }
}

TEST(Parameters, UniformInitWithinFanInBound) {
  ad::ParameterSet ps;
  Rng rng(1);
  auto w = ps.add_uniform("w", {8, 16}, 16, rng);
  for (double v : w.values()) EXPECT_LE(std::abs(v), 0.25);
  EXPECT_THROW(ps.add_zeros("w", {1}), std::invalid_argument);
  EXPECT_EQ(ps.scalar_count(), 128u);
}

TEST(Optimizer, AdaDeltaFirstStepMagnitude) {
  // With zero accumulators the first update is -sqrt(eps)/sqrt((1-rho) g^2 + eps) * g.
  ad::ParameterSet ps;
  auto w = ps.add("w", {1}, {1.0});
  ad::backward(ad::scale(ad::sum(w), 2.0));
  train::AdaDelta opt;
  opt.step(ps);
  const double g = 2.0;
  const double expected = 1.0 - std::sqrt(1e-6) / std::sqrt(0.05 * g * g + 1e-6) * g;
  EXPECT_NEAR(ps.at("w")[0], expected, 1e-15);
}

TEST(Optimizer, AdamFirstStepIsLearningRate) {
  ad::ParameterSet ps;
  auto w = ps.add("w", {2}, {1.0, -1.0});
  ad::backward(ad::sum(ad::hadamard(w, Tensor::vector({3.0, -0.5}))));
  train::Adam opt;
  opt.step(ps);
  EXPECT_NEAR(ps.at("w")[0], 1.0 - 1e-5, 1e-12);
  EXPECT_NEAR(ps.at("w")[1], -1.0 + 1e-5, 1e-12);
}

TEST(Optimizer, ZeroGradientLeavesParametersUnchanged) {
  ad::ParameterSet ps;
  ps.add("w", {3}, {0.1, 0.2, 0.3});
  const std::vector<double> before(ps.at("w").values().begin(), ps.at("w").values().end());
  train::Adam adam;
  adam.step(ps);
  train::AdaDelta ada;
  ada.step(ps);
  const auto after = ps.at("w").values();
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(before[i], after[i]);
}
