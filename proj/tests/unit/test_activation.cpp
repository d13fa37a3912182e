#include <gtest/gtest.h>

#include <cmath>

#include "taylornet/activation.hpp"

using taylornet::Activation;

namespace {

double relu(double t) { return t > 0 ? t : 0; }

}  // namespace

TEST(Activation, ReluCubedSixthValuesAndSecondDerivative) {
  const Activation a = Activation::relu_cubed_sixth();
  for (double t : {-2.0, -0.1, 0.0, 0.3, 1.7}) {
    EXPECT_DOUBLE_EQ(a.value(t), std::pow(relu(t), 3) / 6.0);
    EXPECT_DOUBLE_EQ(a.derivative(t, 1), relu(t) * relu(t) / 2.0);
    EXPECT_DOUBLE_EQ(a.derivative(t, 2), relu(t));
    EXPECT_DOUBLE_EQ(a.derivative(t, 3), t > 0 ? 1.0 : 0.0);
  }
  EXPECT_EQ(a.order(), 2);
  EXPECT_EQ(a.max_derivative(), 3);
}

TEST(Activation, ReluPowerKthDerivativeOverFactorialIsRelu) {
  for (int k = 2; k <= 6; ++k) {
    const Activation a = Activation::relu_power(k);
    double kfact = 1;
    for (int i = 2; i <= k; ++i) kfact *= i;
    for (double t : {-1.0, 0.0, 0.25, 2.0}) {
      EXPECT_NEAR(a.derivative(t, k) / kfact, relu(t), 1e-14 * (1 + relu(t))) << "k=" << k << " t=" << t;
      EXPECT_NEAR(a.value(t), std::pow(relu(t), k + 1) / (k + 1), 1e-14);
    }
  }
}

TEST(Activation, DerivativesMatchFiniteDifferences) {
  for (const Activation& a : {Activation::relu_cubed_sixth(), Activation::relu_power(3), Activation::relu_power(5)}) {
    for (int j = 0; j < a.max_derivative(); ++j) {
      for (double t : {-0.8, 0.4, 1.3}) {
        const double h = 1e-6;
        const double fd = (a.derivative(t + h, j) - a.derivative(t - h, j)) / (2 * h);
        EXPECT_NEAR(fd, a.derivative(t, j + 1), 1e-6 * (1 + std::abs(fd))) << a.tag() << " j=" << j;
      }
    }
  }
}

TEST(Activation, ArrayDerivativeMatchesScalar) {
  const Activation a = Activation::relu_power(4);
  Eigen::ArrayXXd t(2, 3);
  t << -1, 0.5, 2, 0, -0.2, 1.1;
  for (int j = 0; j <= a.max_derivative() + 1; ++j) {
    const Eigen::ArrayXXd v = a.derivative(t, j);
    for (int i = 0; i < 2; ++i)
      for (int c = 0; c < 3; ++c) EXPECT_DOUBLE_EQ(v(i, c), a.derivative(t(i, c), j));
  }
}

TEST(Activation, TagsRoundTripAndRejectBadInput) {
  EXPECT_EQ(Activation::from_tag("relu3_6"), Activation::relu_cubed_sixth());
  EXPECT_EQ(Activation::from_tag(Activation::relu_power(4).tag()), Activation::relu_power(4));
  EXPECT_THROW(Activation::from_tag("tanh"), std::invalid_argument);
  EXPECT_THROW(Activation::from_tag("relu_pow"), std::invalid_argument);
  EXPECT_THROW(Activation::relu_power(1), std::invalid_argument);
  EXPECT_THROW(Activation::relu_cubed_sixth().derivative(0.5, -1), std::invalid_argument);
  EXPECT_TRUE(Activation::relu_power(3).supports(4));
  EXPECT_FALSE(Activation::relu_power(3).supports(5));
}
