#include <gtest/gtest.h>

#include <cmath>

#include "taylornet/loss.hpp"

using namespace taylornet;

namespace {

const LossKind kReal[] = {LossKind::Logistic, LossKind::SoftHinge, LossKind::HuberAbs};

}  // namespace

TEST(Loss, DerivativesMatchFiniteDifferences) {
  for (LossKind k : kReal)
    for (double y : {-1.0, 1.0, 0.3})
      for (double z : {-2.0, -0.3, 0.2, 0.9, 3.0}) {
        if (k == LossKind::HuberAbs && std::abs(std::abs(y - z) - kHuberKnee) < 1e-3) continue;
        const double h = 1e-6;
        const double d1 = (loss_value(k, y, z + h) - loss_value(k, y, z - h)) / (2 * h);
        const double d2 = (loss_d1(k, y, z + h) - loss_d1(k, y, z - h)) / (2 * h);
        EXPECT_NEAR(d1, loss_d1(k, y, z), 1e-6) << loss_name(k);
        EXPECT_NEAR(d2, loss_d2(k, y, z), 1e-5 * (1 + std::abs(d2))) << loss_name(k);
      }
}

TEST(Loss, OneLipschitzAndConvex) {
  for (LossKind k : kReal)
    for (double y : {-1.0, 1.0, 0.5})
      for (double z = -10; z <= 10; z += 0.01) {
        EXPECT_LE(std::abs(loss_d1(k, y, z)), 1.0 + 1e-12) << loss_name(k);
        EXPECT_GE(loss_d2(k, y, z), 0.0) << loss_name(k);
        EXPECT_GE(loss_value(k, y, z), 0.0);
      }
}

TEST(Loss, SecondDerivativeBounds) {
  // Logistic and soft hinge have ell'' <= 1; the huberized absolute loss is bounded by 1/knee instead.
  for (double y : {-1.0, 1.0})
    for (double z = -5; z <= 5; z += 0.001) {
      EXPECT_LE(loss_d2(LossKind::Logistic, y, z), 1.0);
      EXPECT_LE(loss_d2(LossKind::SoftHinge, y, z), 1.0);
      EXPECT_LE(loss_d2(LossKind::HuberAbs, y, z), 1.0 / kHuberKnee + 1e-12);
    }
  EXPECT_GE(loss_d2_sup(LossKind::HuberAbs, 1.0), 1.0 / kHuberKnee - 1e-12);
  EXPECT_LE(loss_d2_sup(LossKind::Logistic, 1.0), 1.0);
}

TEST(Loss, KnownValues) {
  EXPECT_NEAR(loss_value(LossKind::Logistic, 1, 0), std::log(2.0), 1e-15);
  EXPECT_NEAR(loss_value(LossKind::SoftHinge, 1, 0), 1.0, 1e-15);
  EXPECT_NEAR(loss_value(LossKind::HuberAbs, 0.5, 0.5), 0.0, 1e-15);
  EXPECT_NEAR(loss_value(LossKind::HuberAbs, 2.0, 0.0), 2.0 - kHuberKnee / 2, 1e-15);
  // large margins stay finite
  EXPECT_TRUE(std::isfinite(loss_value(LossKind::Logistic, 1, -800)));
  EXPECT_NEAR(loss_d1(LossKind::Logistic, 1, -800), -1.0, 1e-15);
  EXPECT_EQ(loss_value(LossKind::Zero, 1, 5), 0.0);
}

TEST(Loss, NamesRoundTrip) {
  for (LossKind k : kReal) EXPECT_EQ(loss_from_name(loss_name(k)), k);
  EXPECT_THROW(loss_from_name("zero"), std::invalid_argument);
  EXPECT_THROW(loss_from_name("mse"), std::invalid_argument);
}
