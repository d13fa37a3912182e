#pragma once

#include <string>
#include <vector>

#include "taylornet/risk.hpp"

namespace taylornet {

struct Trajectory;

enum class LandscapeMode { Exact, MonteCarlo };
enum class Verdict { Satisfied, Violated, Inconclusive };
std::string verdict_name(Verdict v);

struct LandscapeReport {
  int m = 0;
  int d = 0;
  double bx = 0.0;
  double lambda = 0.0;
  double norm_w = 0.0;      // ||W||_{2,4}
  double norm_wstar = 0.0;  // ||W*||_{2,4}
  double lhs = 0.0;
  double grad_term = 0.0;
  double loss_gap = 0.0;
  double reg_terms = 0.0;  // -lambda ||W||^8 + C lambda ||W*||^8 (randomized check only)
  double slack = 0.0;
  double mc_stderr = 0.0;
  // Smallest C for which the randomized slack is nonnegative (0 when no C is needed).
  double fitted_c = 0.0;
  Verdict verdict = Verdict::Inconclusive;
};

LandscapeReport clean_landscape_check(const RiskSpec& spec, const WeightDelta& w, const Matrix& wstar,
                                      LandscapeMode mode, int n_draws, Rng& rng);

// C in front of lambda ||W*||^8 in the regularized landscape bound, with alpha = 5/14.
double regularized_bound_constant();

LandscapeReport randomized_landscape_check(const RiskSpec& spec, const WeightDelta& w, const Matrix& wstar,
                                           int n_sigma_outer, int n_sigma_inner, Rng& rng,
                                           double c_reg = regularized_bound_constant());

enum class LocalizeStatus { Ok, Exceeded, Skipped };
struct LocalizeReport {
  LocalizeStatus status = LocalizeStatus::Skipped;
  bool norm_bound_ok = false;
  double final_norm = 0.0;
  double bound = 0.0;  // envelope * lambda^{-1/8}
};
LocalizeReport sosp_localize(const RiskSpec& spec, const Trajectory& traj, double envelope = 1.0);

std::string landscape_csv_header();
std::string landscape_csv_row(const LandscapeReport& r);

}  // namespace taylornet
