#include "taylornet/landscape.hpp"

#include <cmath>
#include <sstream>

#include "taylornet/optimize.hpp"

namespace taylornet {

std::string verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Satisfied: return "satisfied";
    case Verdict::Violated: return "violated";
    case Verdict::Inconclusive: return "inconclusive";
  }
  return "?";
}

namespace {

Verdict classify(double slack, double stderr) {
  if (slack - 3.0 * stderr >= 0.0) return Verdict::Satisfied;
  if (slack + 3.0 * stderr < 0.0) return Verdict::Violated;
  return Verdict::Inconclusive;
}

void fill_echo(LandscapeReport& rep, const RiskSpec& spec, const WeightDelta& w, const Matrix& wstar) {
  rep.m = spec.net().m;
  rep.d = spec.net().d;
  rep.bx = spec.net().bx;
  rep.lambda = spec.lambda();
  rep.norm_w = norm_2p(w, 4.0);
  rep.norm_wstar = norm_2p(wstar, 4.0);
}

void require_opt(const RiskSpec& spec, double lstar) {
  if (lstar > spec.opt_reference() + 1e-12 * std::max(1.0, std::abs(lstar))) {
    std::ostringstream os;
    os << "landscape check: clean_risk(W*) = " << lstar << " exceeds OPT = " << spec.opt_reference();
    throw std::invalid_argument(os.str());
  }
}

double mean_sd_err(const std::vector<double>& v, double* mean_out) {
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= v.size();
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  *mean_out = mean;
  return v.size() > 1 ? std::sqrt(ss / (v.size() - 1) / v.size()) : 0.0;
}

}  // namespace

LandscapeReport clean_landscape_check(const RiskSpec& spec, const WeightDelta& w, const Matrix& wstar,
                                      LandscapeMode mode, int n_draws, Rng& rng) {
  require_opt(spec, clean_risk(spec, wstar));
  LandscapeReport rep;
  fill_echo(rep, spec, w, wstar);
  if (mode == LandscapeMode::Exact) {
    rep.lhs = hessq_clean_sigma_expect(spec, w, wstar);
  } else {
    if (n_draws < 2) throw std::invalid_argument("clean_landscape_check: n_draws must be >= 2 in MC mode");
    std::vector<double> vals(n_draws);
    for (int t = 0; t < n_draws; ++t)
      vals[t] = hessq_clean(spec, w, apply_signs(wstar, sample_signs(spec.net().m, rng)));
    rep.mc_stderr = mean_sd_err(vals, &rep.lhs);
  }
  rep.grad_term = (grad_clean(spec, w).array() * w.array()).sum();
  rep.loss_gap = 2.0 * (clean_risk(spec, w) - spec.opt_reference());
  rep.slack = rep.grad_term - rep.loss_gap - rep.lhs;
  rep.verdict = classify(rep.slack, rep.mc_stderr);
  return rep;
}

double regularized_bound_constant() {
  const double alpha = 5.0 / 14.0;
  return 378.0 / (alpha * alpha * alpha);
}

LandscapeReport randomized_landscape_check(const RiskSpec& spec, const WeightDelta& w, const Matrix& wstar,
                                           int n_sigma_outer, int n_sigma_inner, Rng& rng, double c_reg) {
  if (n_sigma_outer < 2 || n_sigma_inner < 1)
    throw std::invalid_argument("randomized_landscape_check: need >= 2 outer and >= 1 inner draws");
  require_opt(spec, clean_risk(spec, wstar));
  const int m = spec.net().m;
  const double lambda = spec.lambda();
  LandscapeReport rep;
  fill_echo(rep, spec, w, wstar);

  std::vector<SignDiagonal> inner;
  inner.reserve(n_sigma_inner);
  for (int i = 0; i < n_sigma_inner; ++i) inner.push_back(sample_signs(m, rng));

  // L_lambda estimate at V with the shared inner sign draws
  auto l_est = [&](const WeightDelta& v) {
    double acc = 0.0;
    for (const auto& s : inner) acc += empirical_risk(spec, apply_signs(v, s));
    return acc / n_sigma_inner + reg_value(v, lambda);
  };

  std::vector<double> loss_draws(n_sigma_inner), grad_draws(n_sigma_inner);
  for (int i = 0; i < n_sigma_inner; ++i) {
    const WeightDelta v = apply_signs(w, inner[i]);
    const ValueGrad vg = empirical_value_grad(spec, v);
    loss_draws[i] = vg.value;
    const Matrix g = vg.grad * inner[i].s.asDiagonal() + reg_grad(w, lambda);
    grad_draws[i] = (g.array() * w.array()).sum();
  }
  double loss_mean = 0.0;
  const double loss_se = mean_sd_err(loss_draws, &loss_mean);
  const double grad_se = mean_sd_err(grad_draws, &rep.grad_term);
  const double l_w = loss_mean + reg_value(w, lambda);

  const double scale = std::max(1.0, w.norm());
  std::vector<double> lhs_draws(n_sigma_outer);
  for (int o = 0; o < n_sigma_outer; ++o) {
    const Matrix u = apply_signs(wstar, sample_signs(m, rng));
    const double un = u.norm();
    if (un == 0.0) {
      lhs_draws[o] = 0.0;
      continue;
    }
    const double t = 1e-3 * scale / un;
    lhs_draws[o] = (l_est(w + t * u) - 2.0 * l_w + l_est(w - t * u)) / (t * t);
  }
  const double lhs_se = mean_sd_err(lhs_draws, &rep.lhs);

  rep.loss_gap = 2.0 * (l_w - spec.opt_reference());
  const double wn8 = reg_value(w, 1.0);
  const double sn8 = reg_value(wstar, 1.0);
  rep.reg_terms = -lambda * wn8 + c_reg * lambda * sn8;
  const double base = rep.grad_term - rep.loss_gap - rep.lhs - lambda * wn8;
  rep.slack = base + c_reg * lambda * sn8;
  rep.fitted_c = base >= 0.0 ? 0.0 : (lambda * sn8 > 0.0 ? -base / (lambda * sn8) : INFINITY);
  rep.mc_stderr = std::sqrt(lhs_se * lhs_se + grad_se * grad_se + 4.0 * loss_se * loss_se);
  rep.verdict = classify(rep.slack, rep.mc_stderr);
  return rep;
}

LocalizeReport sosp_localize(const RiskSpec& spec, const Trajectory& traj, double envelope) {
  LocalizeReport rep;
  if (traj.w.rows() != spec.net().d || traj.w.cols() != spec.net().m)
    throw std::invalid_argument("sosp_localize: trajectory does not match the spec's network");
  rep.final_norm = norm_2p(traj.w, 4.0);
  // the optimizer's lambda is the one the iterate was trained with
  const double lambda = traj.lambda;
  if (lambda <= 0.0) {
    rep.status = LocalizeStatus::Skipped;
    return rep;
  }
  rep.bound = envelope * std::pow(lambda, -0.125);
  rep.norm_bound_ok = rep.final_norm <= rep.bound;
  rep.status = rep.norm_bound_ok ? LocalizeStatus::Ok : LocalizeStatus::Exceeded;
  return rep;
}

std::string landscape_csv_header() { return "m,d,Bx,lambda,normW,normWstar,lhs,grad_term,loss_gap,slack,stderr"; }

std::string landscape_csv_row(const LandscapeReport& r) {
  std::ostringstream os;
  os.precision(17);
  os << r.m << ',' << r.d << ',' << r.bx << ',' << r.lambda << ',' << r.norm_w << ',' << r.norm_wstar << ','
     << r.lhs << ',' << r.grad_term << ',' << r.loss_gap << ',' << r.slack << ',' << r.mc_stderr;
  return os.str();
}

}  // namespace taylornet
