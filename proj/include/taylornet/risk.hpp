#pragma once

#include <memory>
#include <vector>

#include "taylornet/loss.hpp"
#include "taylornet/model.hpp"
#include "taylornet/randomize.hpp"

namespace taylornet {

struct Dataset {
  Matrix x;  // n x d, rows on the sphere of radius bx
  Vector y;  // n labels
  double bx = 1.0;

  int n() const { return static_cast<int>(x.rows()); }
  int d() const { return static_cast<int>(x.cols()); }
  void validate() const;
  Dataset rows(const std::vector<int>& idx) const;
};

// d_{i,r} = a_r sigma''(w0_r^T x_i), n x m.
struct DCache {
  Matrix d;
};
DCache build_dcache(const Network& net, const Dataset& data);

// Immutable bundle of network, data, loss, lambda and the OPT level used by
// landscape checks. Copies share the cached preactivations.
class RiskSpec {
 public:
  RiskSpec(Network net, Dataset data, LossKind loss, double lambda = 0.0, double opt_reference = 0.0);

  const Network& net() const { return *net_; }
  const Dataset& data() const { return *data_; }
  LossKind loss() const { return loss_; }
  double lambda() const { return lambda_; }
  double opt_reference() const { return opt_reference_; }

  RiskSpec with_lambda(double lambda) const;
  RiskSpec with_opt_reference(double opt) const;
  RiskSpec with_loss(LossKind loss) const;

  const Matrix& preact0() const { return *preact0_; }  // X W0, n x m
  const DCache& dcache() const { return *dcache_; }

 private:
  std::shared_ptr<const Network> net_;
  std::shared_ptr<const Dataset> data_;
  std::shared_ptr<const Matrix> preact0_;
  std::shared_ptr<const DCache> dcache_;
  LossKind loss_;
  double lambda_;
  double opt_reference_;
};

struct McEstimate {
  double mean = 0.0;
  double stderr = 0.0;
};

double empirical_risk(const RiskSpec& spec, const WeightDelta& w);
McEstimate randomized_risk_mc(const RiskSpec& spec, const WeightDelta& w, int n_draws, Rng& rng);
double clean_risk(const RiskSpec& spec, const WeightDelta& w);
// Same value through (1/(2 sqrt m)) <x x^T, W D_i W^T>; O(n m d^2), for cross-checks.
double clean_risk_matrix_form(const RiskSpec& spec, const WeightDelta& w);

double reg_value(const WeightDelta& w, double lambda);
Matrix reg_grad(const WeightDelta& w, double lambda);

Matrix grad_clean(const RiskSpec& spec, const WeightDelta& w);
// Gradient of W -> L~(W sigma) + lambda ||W||_{2,4}^8.
Matrix grad_randomized_sample(const RiskSpec& spec, const WeightDelta& w, const SignDiagonal& sigma);
// Plain gradient of L~ at W (no signs, no regularizer).
Matrix grad_empirical(const RiskSpec& spec, const WeightDelta& w);

double hessq_clean(const RiskSpec& spec, const WeightDelta& w, const Matrix& u);
double hessq_clean_sigma_expect(const RiskSpec& spec, const WeightDelta& w, const Matrix& wstar);

// Per-sample model outputs on the spec's data.
Vector forward_values(const RiskSpec& spec, const WeightDelta& w);
Vector fquad_values(const RiskSpec& spec, const WeightDelta& w);
double mean_loss(LossKind loss, const Vector& y, const Vector& f);

// L~ at V and its gradient in V, optionally restricted to a subset of rows.
struct ValueGrad {
  double value = 0.0;
  Matrix grad;
};
ValueGrad empirical_value_grad(const RiskSpec& spec, const WeightDelta& v, const std::vector<int>* rows = nullptr);

}  // namespace taylornet

namespace taylornet {

// L^Q at W together with grad_clean(W).
ValueGrad clean_value_grad(const RiskSpec& spec, const WeightDelta& w);

}  // namespace taylornet
