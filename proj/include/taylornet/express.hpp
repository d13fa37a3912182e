#pragma once

#include <nlohmann/json.hpp>
#include <vector>

#include "taylornet/model.hpp"

namespace taylornet {

// Arc-cosine kernel of relu random features on the unit sphere:
// K(u) = (1/2pi)(u(pi - arccos u) + sqrt(1 - u^2)) = sum_p c_p u^p.
double kernel_value(double u);
double kernel_coeff(int p);

struct KernelSeries {
  int truncation = 200;  // number of powers p = 0..truncation-1
  double coeff(int p) const { return kernel_coeff(p); }
  double eval(double u) const;
};

struct PolyTerm {
  double alpha = 0.0;
  Vector beta;
  int p = 2;
};

struct TargetPoly {
  std::vector<PolyTerm> terms;
  double eval(const Vector& x) const;
  Vector eval_rows(const Matrix& x) const;
};

TargetPoly target_from_json(const nlohmann::json& j);
nlohmann::json target_to_json(const TargetPoly& t);

// Degree q is representable by relu features iff q in {0, 1} or q even.
bool admissible_degree(int q);

struct NeuronBlock {
  int begin = 0;
  int count = -1;  // -1: the whole first half
};

struct FitResult {
  Vector a;  // one coefficient per neuron of the block
  double residual = 0.0;  // max |fit - target| over the probes
  double msq = 0.0;       // (2/m) sum_r a_r^2
  double ridge = 0.0;     // absolute ridge actually used
  double condition = 0.0; // squared max/min Cholesky pivot ratio of the solved system
  int probes = 0;
  int attempts = 1;
};

// Min-norm ridge solution of (2/m) sum_{r in block} relu(w0_r^T x) a_r ~ alpha (beta^T x)^q
// over the probe rows. ridge_rel scales trace(Phi^T Phi) / #features.
FitResult fit_feature_coefficients(const Network& net, double alpha, const Vector& beta, int q,
                                   const Matrix& probe_x, double ridge_rel = 1e-8, NeuronBlock block = {});

struct FitConfig {
  int probes_per_feature = 4;  // probes = this * block size (0 with probes > 0 to fix the count)
  int probes = 0;
  double ridge_rel = 1e-8;
  std::uint64_t seed = 0;
};

struct QuadConstruction {
  WeightDelta wstar;
  double norm24_4 = 0.0;  // ||W*||_{2,4}^4
  double bound = 0.0;     // expectation-level bound from the construction proof
  std::vector<FitResult> fits;
};
QuadConstruction construct_quadratic_Wstar(const Network& net, const TargetPoly& target, const FitConfig& cfg);

struct KorderConstruction {
  PairedDelta paired;
  double norm22k_2k = 0.0;  // ||W*||_{2,2k}^{2k}
  double bound = 0.0;
  std::vector<FitResult> fits;
};
KorderConstruction construct_korder_Wstar(const Network& net, int k, const TargetPoly& target, const FitConfig& cfg);

// 16 pi ((p-2) v 1)^3 alpha^2 B_x^{2(p-2)} ||beta||^{2p}, summed over terms and multiplied by #terms.
double quad_norm_bound(const TargetPoly& target, double bx);
// 2 pi ((p-k) v 1)^3 alpha^2 B_x^{2(p-k)} ||beta||^{2p}, same aggregation.
double korder_norm_bound(const TargetPoly& target, int k, double bx);

nlohmann::json fit_report_json(const std::vector<FitResult>& fits);

}  // namespace taylornet
