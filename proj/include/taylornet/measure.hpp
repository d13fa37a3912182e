#pragma once

#include <map>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "taylornet/optimize.hpp"
#include "taylornet/stats.hpp"

namespace taylornet {

// ---- generators ----

Matrix gen_sphere(int n, int d, double bx, Rng& rng);
Matrix gen_hypercube(int n, int d, double bx, Rng& rng);
// x uniform on {+-1}^d (B_x = sqrt d), y = x1 x2 with labels flipped at rate `noise`.
Dataset gen_xor2(int n, int d, Rng& rng, double noise = 0.0);

struct SpectrumTerm {
  double alpha = 0.0;
  Vector v;  // unit
};
// x uniform on the sphere of radius sqrt d, y = sum_j alpha_j (v_j^T x)^2.
Dataset gen_matrix_sensing(int n, int d, const std::vector<SpectrumTerm>& spectrum, Rng& rng);
// Random orthonormal directions with alternating signs (+1, -1, +1, ...).
std::vector<SpectrumTerm> random_spectrum(int d, int rank, Rng& rng);

// ---- scans ----

struct ScanRow {
  int m = 0;
  std::string statistic;
  double mean = 0.0;
  double std = 0.0;
  int trials = 0;
};

struct ScanReport {
  std::vector<ScanRow> rows;
  std::map<std::string, SlopeFit> slopes;
  std::vector<std::string> statistics;  // in column order

  std::vector<double> means(const std::string& statistic) const;
};

struct ColNormRule {
  double c = 1.0;  // ||w_r|| = c m^{-1/4}
};

// Statistics: abs_flin, flin_sq, abs_quad_remainder, abs_fquad, flin_signed, and
// abs_quad_remainder_worst (signs chosen per probe so the cubic terms align).
// W's first half shares one random direction and the second half uses
// independent directions, so that f^Q does not cancel between the signed halves.
ScanReport coupling_scan(int d, double bx, const std::vector<int>& widths, ColNormRule rule, int trials,
                         std::uint64_t seed, int threads = 1);

// Statistics abs_f1 .. abs_f{k+1}; base columns share one direction with norm (m/2)^{-1/(2k)}.
ScanReport korder_scan(int k, int d, const std::vector<int>& widths, int trials, std::uint64_t seed,
                       int threads = 1);

std::string scan_csv(const ScanReport& r);
nlohmann::json scan_slopes_json(const ScanReport& r);

// ---- operator norms ----

// sqrt(||(1/n) sum x_i x_i^T||_op) / B_x via power iteration.
double mxop(const Matrix& x, double bx);
// Largest |eigenvalue| of a symmetric matrix by power iteration on A^2.
double sym_opnorm(const Matrix& a, Rng& rng, int restarts = 3, double tol = 1e-10);

struct OpnormEstimate {
  double value = 0.0;
  int neurons_used = 0;
  bool converged = true;
};
OpnormEstimate feature_opnorm(const Network& net, const Matrix& x, int n_rademacher, Rng& rng,
                              int max_neurons = 256);
OpnormEstimate tensor_opnorm_estimate(const Network& net, const Matrix& x, int k, int n_rademacher, int restarts,
                                      Rng& rng, int max_neurons = 64);

// ---- experiments ----

struct ExperimentParams {
  std::string task = "xor";  // poly | xor | sensing
  int n = 500;
  int n_test = 2000;
  int d = 20;
  int m = 1 << 14;
  LossKind loss = LossKind::Logistic;
  OptConfig quad;
  OptConfig ntk;  // eta <= 0 selects ntk_safe_eta
  int poly_p = 4;
  double poly_alpha = 1.0;
  int rank = 2;
  double label_noise = 0.0;
  bool mc_forward = false;  // predict with a sign-averaged forward instead of f_quad
  int mc_draws = 32;
  int threads = 1;

  void validate() const;
};
ExperimentParams default_experiment_params(const std::string& task);

struct TaskSplit {
  Dataset train;
  Dataset test;
};
// Train/test data of one experiment seed (train rows first, then test rows, from one stream).
TaskSplit make_task_data(const ExperimentParams& p, std::uint64_t seed);

struct SeedResult {
  std::uint64_t seed = 0;
  bool ok = true;
  std::string error;
  double quad_test_loss = 0.0;
  double ntk_test_loss = 0.0;
  double quad_test_err = 0.0;  // 0-1 error (classification tasks)
  double ntk_test_err = 0.0;
  double quad_train_loss = 0.0;
  double ntk_train_loss = 0.0;
  double quad_norm24 = 0.0;
};

struct ExperimentResult {
  std::string task;
  int n = 0;
  int d = 0;
  std::string prediction;  // "f_quad" or "mc_forward"
  std::vector<SeedResult> seeds;
  MeanStd quad_loss, ntk_loss, quad_err, ntk_err;
  int wins = 0;            // seeds where quadratic beats NTK (0-1 error for xor, test loss otherwise)
  int quad_err_below_02 = 0;
};

ExperimentResult run_experiment(const ExperimentParams& params, const std::vector<std::uint64_t>& seeds);
std::string experiment_csv(const ExperimentResult& r);
nlohmann::json experiment_json(const ExperimentResult& r);

}  // namespace taylornet
