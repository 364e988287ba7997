#include <gtest/gtest.h>

#include <cmath>

#include "nforge/activations.hpp"
#include "nforge/errors.hpp"

namespace nforge {
namespace {

TEST(Activations, KnownValues) {
  EXPECT_DOUBLE_EQ(act_logistic(0.0), 0.5);
  EXPECT_DOUBLE_EQ(act_logistic_prime(0.0), 0.25);
  EXPECT_DOUBLE_EQ(act_tanh(0.0), 0.0);
  EXPECT_DOUBLE_EQ(act_tanh_prime(0.0), 1.0);
  EXPECT_NEAR(act_arctan(1.0), M_PI / 4.0, 1e-15);
  EXPECT_DOUBLE_EQ(act_arctan_prime(1.0), 0.5);
  EXPECT_EQ(act_relu(-2.0), 0.0);
  EXPECT_EQ(act_relu(3.0), 3.0);
  EXPECT_EQ(act_relu_prime(-1e-300), 0.0);
  EXPECT_EQ(act_relu_prime(0.0), 1.0);
  EXPECT_NEAR(act_elu(-1.0), std::exp(-1.0) - 1.0, 1e-15);
  EXPECT_NEAR(act_elu(-1.0, 2.0), 2.0 * (std::exp(-1.0) - 1.0), 1e-15);
  EXPECT_EQ(act_elu(2.5), 2.5);
  EXPECT_NEAR(act_elu_prime(-1.0), std::exp(-1.0), 1e-15);
  EXPECT_EQ(act_elu_prime(0.5), 1.0);
}

TEST(Activations, LogisticDerivativeIsPositive) {
  for (double x = -10.0; x <= 10.0; x += 0.5) {
    const double f = act_logistic(x);
    EXPECT_GT(act_logistic_prime(x), 0.0);
    EXPECT_NEAR(act_logistic_prime(x), f * (1.0 - f), 1e-15);
  }
}

TEST(Activations, DerivativesMatchCentralDifferences) {
  const double h = 1e-6;
  for (ActivationKind k : kAllActivations)
    for (double x : {-3.0, -0.7, -0.1, 0.2, 1.3, 4.0}) {
      const double numeric = (activate(k, x + h, 1.5) - activate(k, x - h, 1.5)) / (2 * h);
      EXPECT_NEAR(activate_prime(k, x, 1.5), numeric, 1e-8) << activation_name(k) << " at " << x;
    }
}

TEST(Activations, EluDerivativePositiveAndAlphaChecked) {
  for (double x = -20.0; x <= 5.0; x += 0.25) EXPECT_GT(act_elu_prime(x, 0.5), 0.0);
  EXPECT_THROW(act_elu(1.0, 0.0), ArgumentError);
  EXPECT_THROW(act_elu_prime(1.0, -1.0), ArgumentError);
}

TEST(Activations, NamesRoundTrip) {
  for (ActivationKind k : kAllActivations) EXPECT_EQ(parse_activation(activation_name(k)), k);
  EXPECT_THROW(parse_activation("swish"), ArgumentError);
}

TEST(Activations, CorruptionIsScopedToOneKind) {
  testing::corrupt_derivative(ActivationKind::kTanh, 2.0);
  EXPECT_EQ(testing::derivative_factor(ActivationKind::kTanh), 2.0);
  EXPECT_EQ(testing::derivative_factor(ActivationKind::kRelu), 1.0);
  testing::clear_corruption();
  EXPECT_EQ(testing::derivative_factor(ActivationKind::kTanh), 1.0);
}

}  // namespace
}  // namespace nforge
