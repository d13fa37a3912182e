#pragma once

#include <Eigen/Dense>
#include <string>

namespace taylornet {

enum class ActivationKind { ReluCubedSixth, ReluPower };

// Smooth relu powers. ReluCubedSixth is relu^3/6 (sigma'' = relu) and drives
// the quadratic track; ReluPower(k) is relu^{k+1}/(k+1) (sigma^(k)/k! = relu)
// and drives the k-th order track.
class Activation {
 public:
  Activation() = default;

  static Activation relu_cubed_sixth();
  static Activation relu_power(int k);

  ActivationKind kind() const { return kind_; }
  // Taylor order the activation is built for: 2 for ReluCubedSixth, k for ReluPower(k).
  int order() const { return order_; }
  // Highest derivative the evaluators support, order()+1.
  int max_derivative() const { return order_ + 1; }
  bool supports(int j) const { return j >= 0 && j <= max_derivative(); }

  double value(double t) const { return derivative(t, 0); }
  double derivative(double t, int j) const;
  Eigen::ArrayXXd derivative(const Eigen::ArrayXXd& t, int j) const;

  std::string tag() const;
  static Activation from_tag(const std::string& tag);

  bool operator==(const Activation& o) const { return kind_ == o.kind_ && order_ == o.order_; }

  // sigma(t) = scale() * relu(t)^degree()
  double scale() const;
  int degree() const { return order_ + 1; }

 private:
  Activation(ActivationKind kind, int order);

  ActivationKind kind_ = ActivationKind::ReluCubedSixth;
  int order_ = 2;
};

}  // namespace taylornet
