#pragma once

#include <string>

namespace taylornet {

// Zero is a synthetic loss (identically 0) used to isolate the regularizer.
enum class LossKind { Logistic, SoftHinge, HuberAbs, Zero };

// Knee of the huberized absolute loss.
inline constexpr double kHuberKnee = 0.01;

double loss_value(LossKind kind, double y, double z);
double loss_d1(LossKind kind, double y, double z);  // d/dz
double loss_d2(LossKind kind, double y, double z);  // d^2/dz^2
// Largest value ell'' can take for labels in [-|y|max, |y|max]; used for step-size bounds.
double loss_d2_sup(LossKind kind, double y_abs_max);

std::string loss_name(LossKind kind);
LossKind loss_from_name(const std::string& name);

}  // namespace taylornet
