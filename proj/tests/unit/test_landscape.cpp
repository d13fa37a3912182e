#include <gtest/gtest.h>

#include <cmath>

#include "taylornet/landscape.hpp"
#include "taylornet/optimize.hpp"

using namespace taylornet;

namespace {

RiskSpec make_spec(std::uint64_t seed, LossKind loss, int d = 4, int m = 16, int n = 10) {
  Rng rng(seed);
  Dataset data;
  data.bx = 1.0;
  data.x.resize(n, d);
  data.y.resize(n);
  for (int i = 0; i < n; ++i) {
    data.x.row(i) = sphere_point(d, 1.0, rng).transpose();
    data.y(i) = (rng() & 1) ? 1.0 : -1.0;
  }
  return RiskSpec(init_symmetric(d, m, 1.0, seed), data, loss);
}

// (4/n) sum_i ell''_i E_sigma[(cross term)^2], by explicit loops
double variance_term(const RiskSpec& spec, const Matrix& w, const Matrix& ws) {
  const Network& net = spec.net();
  const Dataset& data = spec.data();
  const Vector f = fquad_values(spec, w);
  double acc = 0.0;
  for (int i = 0; i < data.n(); ++i) {
    const Vector x = data.x.row(i).transpose();
    double e = 0.0;
    for (int r = 0; r < net.m; ++r) {
      const double dr = net.a(r) * std::max(0.0, net.w0.col(r).dot(x));
      e += dr * dr * std::pow(w.col(r).dot(x), 2) * std::pow(ws.col(r).dot(x), 2);
    }
    acc += loss_d2(spec.loss(), data.y(i), f(i)) * e / (4.0 * net.m);
  }
  return 4.0 * acc / data.n();
}

}  // namespace

TEST(Landscape, ConvexityLowerBoundsTheCleanSlack) {
  // For convex ell, slack >= -(variance term) whenever OPT = L^Q(W*).
  for (std::uint64_t s = 1; s <= 10; ++s) {
    const RiskSpec base = make_spec(s, s % 2 ? LossKind::Logistic : LossKind::HuberAbs);
    Rng rng(s + 10);
    const Matrix w = gaussian_matrix(4, 16, rng, 0.5), ws = gaussian_matrix(4, 16, rng, 0.5);
    const RiskSpec spec = base.with_opt_reference(clean_risk(base, ws));
    const LandscapeReport r = clean_landscape_check(spec, w, ws, LandscapeMode::Exact, 0, rng);
    EXPECT_GE(r.slack + variance_term(spec, w, ws), -1e-12) << "seed " << s;
    EXPECT_EQ(r.mc_stderr, 0.0);
  }
}

TEST(Landscape, GradTermIsTwiceLossDerivativeTimesOutput) {
  // f^Q is 2-homogeneous in W, so <grad L^Q(W), W> = (2/n) sum ell'(f_i) f_i.
  const RiskSpec spec0 = make_spec(3, LossKind::Logistic);
  Rng rng(1);
  const Matrix w = gaussian_matrix(4, 16, rng, 0.7), ws = gaussian_matrix(4, 16, rng, 0.1);
  const RiskSpec spec = spec0.with_opt_reference(clean_risk(spec0, ws));
  const Vector f = fquad_values(spec, w);
  double expect = 0.0;
  for (int i = 0; i < f.size(); ++i) expect += 2.0 * loss_d1(spec.loss(), spec.data().y(i), f(i)) * f(i);
  expect /= f.size();
  const LandscapeReport r = clean_landscape_check(spec, w, ws, LandscapeMode::Exact, 0, rng);
  EXPECT_NEAR(r.grad_term, expect, 1e-12);
  EXPECT_NEAR(r.loss_gap, 2.0 * (clean_risk(spec, w) - spec.opt_reference()), 1e-14);
  EXPECT_NEAR(r.norm_w, norm_2p(w, 4.0), 1e-14);
}

TEST(Landscape, MonteCarloModeAgreesWithExact) {
  const RiskSpec spec0 = make_spec(5, LossKind::Logistic);
  Rng rng(2);
  const Matrix w = gaussian_matrix(4, 16, rng, 0.5), ws = gaussian_matrix(4, 16, rng, 0.5);
  const RiskSpec spec = spec0.with_opt_reference(clean_risk(spec0, ws));
  const LandscapeReport ex = clean_landscape_check(spec, w, ws, LandscapeMode::Exact, 0, rng);
  const LandscapeReport mc = clean_landscape_check(spec, w, ws, LandscapeMode::MonteCarlo, 4000, rng);
  EXPECT_GT(mc.mc_stderr, 0.0);
  EXPECT_LE(std::abs(mc.lhs - ex.lhs), 4.0 * mc.mc_stderr);
  EXPECT_THROW(clean_landscape_check(spec, w, ws, LandscapeMode::MonteCarlo, 1, rng), std::invalid_argument);
}

TEST(Landscape, RequiresOptAtLeastTheComparatorRisk) {
  const RiskSpec spec = make_spec(7, LossKind::Logistic);
  Rng rng(3);
  const Matrix w = gaussian_matrix(4, 16, rng), ws = gaussian_matrix(4, 16, rng);
  EXPECT_THROW(clean_landscape_check(spec.with_opt_reference(0.0), w, ws, LandscapeMode::Exact, 0, rng),
               std::invalid_argument);
  EXPECT_THROW(randomized_landscape_check(spec.with_opt_reference(0.0), w, ws, 4, 2, rng), std::invalid_argument);
}

TEST(Landscape, VerdictsFollowTheThreeSigmaRule) {
  const RiskSpec spec0 = make_spec(8, LossKind::Logistic);
  Rng rng(4);
  const Matrix w = gaussian_matrix(4, 16, rng, 0.5), ws = gaussian_matrix(4, 16, rng, 0.5);
  const RiskSpec spec = spec0.with_opt_reference(clean_risk(spec0, ws));
  const LandscapeReport r = clean_landscape_check(spec, w, ws, LandscapeMode::Exact, 0, rng);
  EXPECT_EQ(r.verdict, r.slack >= 0 ? Verdict::Satisfied : Verdict::Violated);
  EXPECT_EQ(verdict_name(Verdict::Inconclusive), "inconclusive");
}

TEST(Landscape, RegularizedBoundConstant) {
  EXPECT_NEAR(regularized_bound_constant(), 378.0 * std::pow(14.0 / 5.0, 3), 1e-9);
}

TEST(Landscape, RandomizedCheckReportsConsistentTerms) {
  const RiskSpec spec0 = make_spec(9, LossKind::Logistic, 4, 64, 12).with_lambda(0.05);
  Rng rng(5);
  const Matrix w = gaussian_matrix(4, 64, rng, 0.3), ws = gaussian_matrix(4, 64, rng, 0.3);
  // OPT for the randomized statement: any level at least L^Q(W*)
  const RiskSpec spec = spec0.with_opt_reference(clean_risk(spec0, ws) + 0.01);
  const double c = 2.0;
  const LandscapeReport r = randomized_landscape_check(spec, w, ws, 8, 4, rng, c);
  const double wn8 = std::pow(norm_2p(w, 4.0), 8), sn8 = std::pow(norm_2p(ws, 4.0), 8);
  EXPECT_NEAR(r.reg_terms, -0.05 * wn8 + c * 0.05 * sn8, 1e-12);
  EXPECT_NEAR(r.slack, r.grad_term - r.loss_gap - r.lhs + r.reg_terms, 1e-10);
  EXPECT_TRUE(std::isfinite(r.mc_stderr));
  if (r.fitted_c > 0.0) EXPECT_NEAR(r.slack - c * 0.05 * sn8 + r.fitted_c * 0.05 * sn8, 0.0, 1e-10);
  EXPECT_THROW(randomized_landscape_check(spec, w, ws, 1, 1, rng), std::invalid_argument);
}

TEST(Landscape, LocalizeUsesTrajectoryLambda) {
  const RiskSpec spec = make_spec(10, LossKind::Logistic);
  Trajectory tr;
  tr.w = Matrix::Constant(4, 16, 0.1);
  tr.lambda = 0.0;
  EXPECT_EQ(sosp_localize(spec, tr).status, LocalizeStatus::Skipped);
  tr.lambda = 1e-8;
  LocalizeReport r = sosp_localize(spec, tr);
  EXPECT_EQ(r.status, LocalizeStatus::Ok);
  EXPECT_NEAR(r.bound, std::pow(1e-8, -0.125), 1e-12);
  tr.w *= 1e4;
  EXPECT_EQ(sosp_localize(spec, tr).status, LocalizeStatus::Exceeded);
  tr.w = Matrix::Zero(3, 3);
  EXPECT_THROW(sosp_localize(spec, tr), std::invalid_argument);
}

TEST(Landscape, CsvRowMatchesHeader) {
  EXPECT_EQ(landscape_csv_header(), "m,d,Bx,lambda,normW,normWstar,lhs,grad_term,loss_gap,slack,stderr");
  LandscapeReport r;
  const std::string row = landscape_csv_row(r);
  EXPECT_EQ(std::count(row.begin(), row.end(), ','), 10);
}
