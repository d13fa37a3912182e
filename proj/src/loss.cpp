#include "taylornet/loss.hpp"

#include <cmath>
#include <stdexcept>

namespace taylornet {

namespace {

double softplus(double t) { return t > 0.0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t)); }

double sigmoid(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

const double kSoftplusOne = softplus(1.0);

}  // namespace

double loss_value(LossKind kind, double y, double z) {
  switch (kind) {
    case LossKind::Logistic: return softplus(-y * z);
    case LossKind::SoftHinge: return softplus(1.0 - y * z) / kSoftplusOne;
    case LossKind::HuberAbs: {
      const double r = std::abs(z - y);
      return r <= kHuberKnee ? r * r / (2.0 * kHuberKnee) : r - kHuberKnee / 2.0;
    }
    case LossKind::Zero: return 0.0;
  }
  throw std::logic_error("unhandled loss kind");
}

double loss_d1(LossKind kind, double y, double z) {
  switch (kind) {
    case LossKind::Logistic: return -y * sigmoid(-y * z);
    case LossKind::SoftHinge: return -y * sigmoid(1.0 - y * z) / kSoftplusOne;
    case LossKind::HuberAbs: {
      const double r = z - y;
      if (std::abs(r) <= kHuberKnee) return r / kHuberKnee;
      return r > 0.0 ? 1.0 : -1.0;
    }
    case LossKind::Zero: return 0.0;
  }
  throw std::logic_error("unhandled loss kind");
}

double loss_d2(LossKind kind, double y, double z) {
  switch (kind) {
    case LossKind::Logistic: {
      const double s = sigmoid(-y * z);
      return y * y * s * (1.0 - s);
    }
    case LossKind::SoftHinge: {
      const double s = sigmoid(1.0 - y * z);
      return y * y * s * (1.0 - s) / kSoftplusOne;
    }
    case LossKind::HuberAbs: return std::abs(z - y) <= kHuberKnee ? 1.0 / kHuberKnee : 0.0;
    case LossKind::Zero: return 0.0;
  }
  throw std::logic_error("unhandled loss kind");
}

double loss_d2_sup(LossKind kind, double y_abs_max) {
  switch (kind) {
    case LossKind::Logistic: return 0.25 * y_abs_max * y_abs_max;
    case LossKind::SoftHinge: return 0.25 * y_abs_max * y_abs_max / kSoftplusOne;
    case LossKind::HuberAbs: return 1.0 / kHuberKnee;
    case LossKind::Zero: return 0.0;
  }
  throw std::logic_error("unhandled loss kind");
}

std::string loss_name(LossKind kind) {
  switch (kind) {
    case LossKind::Logistic: return "logistic";
    case LossKind::SoftHinge: return "soft_hinge";
    case LossKind::HuberAbs: return "huber_abs";
    case LossKind::Zero: return "zero";
  }
  throw std::logic_error("unhandled loss kind");
}

LossKind loss_from_name(const std::string& name) {
  if (name == "logistic") return LossKind::Logistic;
  if (name == "soft_hinge") return LossKind::SoftHinge;
  if (name == "huber_abs") return LossKind::HuberAbs;
  throw std::invalid_argument("unknown loss '" + name + "' (expected logistic, soft_hinge or huber_abs)");
}

}  // namespace taylornet
