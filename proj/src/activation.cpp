#include "taylornet/activation.hpp"

#include <cmath>
#include <stdexcept>

namespace taylornet {

namespace {

// p! / (p-j)!
double falling_factorial(int p, int j) {
  double out = 1.0;
  for (int i = 0; i < j; ++i) out *= static_cast<double>(p - i);
  return out;
}

double ipow(double x, int e) {
  double out = 1.0;
  for (int i = 0; i < e; ++i) out *= x;
  return out;
}

}  // namespace

Activation::Activation(ActivationKind kind, int order) : kind_(kind), order_(order) {}

Activation Activation::relu_cubed_sixth() { return Activation(ActivationKind::ReluCubedSixth, 2); }

Activation Activation::relu_power(int k) {
  if (k < 2) throw std::invalid_argument("relu_power: k must be >= 2, got " + std::to_string(k));
  return Activation(ActivationKind::ReluPower, k);
}

double Activation::scale() const {
  return kind_ == ActivationKind::ReluCubedSixth ? 1.0 / 6.0 : 1.0 / static_cast<double>(order_ + 1);
}

double Activation::derivative(double t, int j) const {
  if (j < 0) throw std::invalid_argument("activation derivative order must be >= 0");
  const int p = degree();
  if (j > p || t <= 0.0) return 0.0;
  return scale() * falling_factorial(p, j) * ipow(t, p - j);
}

Eigen::ArrayXXd Activation::derivative(const Eigen::ArrayXXd& t, int j) const {
  if (j < 0) throw std::invalid_argument("activation derivative order must be >= 0");
  const int p = degree();
  if (j > p) return Eigen::ArrayXXd::Zero(t.rows(), t.cols());
  const double c = scale() * falling_factorial(p, j);
  const Eigen::ArrayXXd r = t.max(0.0);
  switch (p - j) {
    case 0: return c * (t > 0.0).cast<double>();
    case 1: return c * r;
    case 2: return c * r.square();
    case 3: return c * r.square() * r;
    default: {
      Eigen::ArrayXXd out = r;
      for (int i = 1; i < p - j; ++i) out *= r;
      return c * out;
    }
  }
}

std::string Activation::tag() const {
  if (kind_ == ActivationKind::ReluCubedSixth) return "relu3_6";
  return "relu_pow" + std::to_string(order_);
}

Activation Activation::from_tag(const std::string& tag) {
  if (tag == "relu3_6") return relu_cubed_sixth();
  const std::string prefix = "relu_pow";
  if (tag.rfind(prefix, 0) == 0) {
    const std::string rest = tag.substr(prefix.size());
    if (!rest.empty() && rest.find_first_not_of("0123456789") == std::string::npos)
      return relu_power(std::stoi(rest));
  }
  throw std::invalid_argument("unknown activation tag '" + tag + "'");
}

}  // namespace taylornet
