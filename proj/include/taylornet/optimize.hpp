#pragma once

#include <string>
#include <vector>

#include "taylornet/risk.hpp"

namespace taylornet {

struct OptConfig {
  double eta = 0.1;
  int T = 1000;
  double perturb_radius = 1e-3;   // 0 disables kicks
  double perturb_trigger = 1e-4;  // gradient-norm threshold
  int perturb_cooldown = 100;
  int perturb_window = 10;        // steps averaged for the trigger
  double lambda = 0.0;            // overrides the spec's lambda during training
  int batch = 0;                  // 0 = full batch
  std::uint64_t seed = 0;
  int record_every = 10;
  double ridge = 0.0;             // Frobenius ridge, linear NTK only

  void validate() const;
};

struct TrajRecord {
  int step = 0;
  double randomized_risk = 0.0;  // running mean of L~(W sigma) over the steps since the last record
  double clean_risk = 0.0;
  double norm24 = 0.0;
  double grad_norm = 0.0;
  double objective = 0.0;  // value of the optimized objective (with regularizer)
};

struct Trajectory {
  std::vector<TrajRecord> records;
  WeightDelta w;
  double lambda = 0.0;
  std::vector<int> kicks;  // steps at which a perturbation was added
};

Trajectory noisy_sgd(const RiskSpec& spec, const OptConfig& cfg);
Trajectory train_clean(const RiskSpec& spec, const OptConfig& cfg);
Trajectory train_linear_ntk(const RiskSpec& spec, const OptConfig& cfg);

// Gram matrix of the f_lin features on the spec's data:
// K_ij = (1/m) sum_r sigma'(w0_r^T x_i) sigma'(w0_r^T x_j) x_i^T x_j.
Matrix ntk_gram(const RiskSpec& spec);
Matrix ntk_cross_gram(const RiskSpec& spec, const Matrix& x_other);
// Materialize W = sum_i c_i phi(x_i) from dual coefficients.
WeightDelta ntk_primal(const RiskSpec& spec, const Vector& c);
// Step size 1/L for the linear-NTK objective (L from the Gram spectrum and sup ell'').
double ntk_safe_eta(const RiskSpec& spec, double ridge);

std::string trajectory_csv_header();
std::string trajectory_csv(const Trajectory& traj);

}  // namespace taylornet
