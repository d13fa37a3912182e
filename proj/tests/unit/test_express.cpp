#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "taylornet/express.hpp"

using namespace taylornet;

TEST(Kernel, EndpointValues) {
  EXPECT_NEAR(kernel_value(1.0), 0.5, 1e-15);
  EXPECT_NEAR(kernel_value(0.0), 1.0 / (2 * std::numbers::pi), 1e-15);
  EXPECT_NEAR(kernel_value(-1.0), 0.0, 1e-15);
  EXPECT_NO_THROW(kernel_value(1.0 + 1e-13));
  EXPECT_THROW(kernel_value(1.01), std::invalid_argument);
}

TEST(Kernel, IsTheReluFeatureExpectation) {
  // E_w[relu(w^T x) relu(w^T y)] for w ~ N(0, I) and unit x, y
  Rng rng(3);
  const int d = 4, draws = 400000;
  const Vector x = sphere_point(d, 1.0, rng), y = sphere_point(d, 1.0, rng);
  double s = 0, ss = 0;
  for (int t = 0; t < draws; ++t) {
    const Vector w = gaussian_matrix(d, 1, rng);
    const double v = std::max(0.0, w.dot(x)) * std::max(0.0, w.dot(y));
    s += v;
    ss += v * v;
  }
  const double mean = s / draws, se = std::sqrt((ss / draws - mean * mean) / draws);
  EXPECT_NEAR(mean, kernel_value(x.dot(y)), 4 * se);
}

TEST(Kernel, CoefficientsMatchCauchyIntegralOracle) {
  EXPECT_EQ(kernel_coeff(0), 1.0 / (2 * std::numbers::pi));
  EXPECT_EQ(kernel_coeff(1), 0.25);
  EXPECT_NEAR(kernel_coeff(2), oracle::kernel_taylor_coeff(2), 1e-12);
  for (int p = 0; p <= 40; ++p) EXPECT_NEAR(kernel_coeff(p), oracle::kernel_taylor_coeff(p), 1e-12) << "p=" << p;
  for (int p = 3; p < 200; p += 2) EXPECT_EQ(kernel_coeff(p), 0.0);
  for (int p = 2; p < 200; p += 2) EXPECT_GT(kernel_coeff(p), 0.0);
  EXPECT_THROW(kernel_coeff(-1), std::invalid_argument);
}

TEST(Kernel, SeriesConvergesToClosedForm) {
  KernelSeries s;
  for (double u : {-0.5, 0.0, 0.3, 0.7}) EXPECT_NEAR(s.eval(u), kernel_value(u), 1e-12);
  // the tail decays like p^{-3/2} u^p, so |u| near 1 needs many more terms
  KernelSeries long_series;
  long_series.truncation = 4000;
  for (double u : {-0.99, 0.99}) EXPECT_NEAR(long_series.eval(u), kernel_value(u), 1e-12);
  EXPECT_GT(std::abs(s.eval(0.99) - kernel_value(0.99)), long_series.eval(0.99) - kernel_value(0.99));
}

TEST(Express, AdmissibleDegrees) {
  EXPECT_TRUE(admissible_degree(0));
  EXPECT_TRUE(admissible_degree(1));
  EXPECT_TRUE(admissible_degree(2));
  EXPECT_FALSE(admissible_degree(3));
  EXPECT_TRUE(admissible_degree(8));
  EXPECT_FALSE(admissible_degree(-2));
}

TEST(Express, TargetEvaluationAndJson) {
  TargetPoly t;
  Vector b1(3), b2(3);
  b1 << 1, 0, 0;
  b2 << 0, 0.6, 0.8;
  t.terms = {{2.0, b1, 2}, {-0.5, b2, 4}};
  Vector x(3);
  x << 0.5, 1.0, -1.0;
  EXPECT_NEAR(t.eval(x), 2 * 0.25 - 0.5 * std::pow(0.6 - 0.8, 4), 1e-15);
  const TargetPoly back = target_from_json(target_to_json(t));
  ASSERT_EQ(back.terms.size(), 2u);
  EXPECT_EQ(back.terms[1].beta, b2);
  EXPECT_EQ(back.terms[1].p, 4);
  Matrix xs(2, 3);
  xs << x.transpose(), -x.transpose();
  const Vector ev = t.eval_rows(xs);
  EXPECT_NEAR(ev(0), t.eval(x), 1e-15);
  EXPECT_THROW(target_from_json(nlohmann::json::object()), std::invalid_argument);
}

TEST(Express, DualAndPrimalSolvesAgree) {
  const Network net = init_symmetric(3, 120, 1.0, 5);
  Rng rng(2);
  Vector beta = sphere_point(3, 1.0, rng);
  const int nf = net.half();
  Matrix probes(nf - 5, 3);
  for (int i = 0; i < probes.rows(); ++i) probes.row(i) = sphere_point(3, 1.0, rng).transpose();
  const FitResult dual = fit_feature_coefficients(net, 1.0, beta, 2, probes, 1e-6);
  // primal normal equations with the same absolute ridge, solved directly
  const Matrix phi = ((probes * net.w0.leftCols(nf)).array().max(0.0) * (2.0 / net.m)).matrix();
  const Vector y = (probes * beta).array().square().matrix();
  Matrix g = phi.transpose() * phi;
  g.diagonal().array() += dual.ridge;
  const Vector a = g.ldlt().solve(phi.transpose() * y);
  EXPECT_LE(oracle::rel_err(dual.a, a), 1e-6);
  EXPECT_NEAR(dual.msq, 2.0 / net.m * dual.a.squaredNorm(), 1e-15);
}

TEST(Express, FitRejectsBadInput) {
  const Network net = init_symmetric(3, 20, 1.0, 5);
  const Matrix probes = Matrix::Ones(4, 3) / std::sqrt(3.0);
  const Vector beta = Vector::Ones(3) / std::sqrt(3.0);
  EXPECT_THROW(fit_feature_coefficients(net, 1.0, beta, 3, probes), std::invalid_argument);
  EXPECT_THROW(fit_feature_coefficients(net, 1.0, Vector::Ones(2), 2, probes), std::invalid_argument);
  EXPECT_THROW(fit_feature_coefficients(net, 1.0, beta, 2, probes, 1e-8, {5, 20}), std::invalid_argument);
  EXPECT_EQ(fit_feature_coefficients(net, 0.0, beta, 2, probes).a, Vector::Zero(10));
}

TEST(Express, QuadraticConstructionExpressesTheTarget) {
  const int d = 3;
  const Network net = init_symmetric(d, 1 << 12, 1.0, 8);
  Rng rng(4);
  TargetPoly t;
  t.terms.push_back({1.0, sphere_point(d, 1.0, rng), 4});
  t.terms.push_back({-0.5, sphere_point(d, 1.0, rng), 2});
  FitConfig cfg;
  cfg.seed = 3;
  const QuadConstruction c = construct_quadratic_Wstar(net, t, cfg);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const Vector x = sphere_point(d, 1.0, rng);
    worst = std::max(worst, std::abs(f_quad(net, c.wstar, x) - t.eval(x)));
  }
  EXPECT_LE(worst, 0.05);
  ASSERT_EQ(c.fits.size(), 2u);
  EXPECT_NEAR(c.norm24_4, std::pow(oracle::norm_2p(c.wstar, 4.0), 4), 1e-10 * c.norm24_4);
  EXPECT_LE(c.norm24_4, 10 * c.bound);
  // each neuron is used by exactly one sign half
  for (int r = 0; r < net.half(); ++r)
    EXPECT_TRUE(c.wstar.col(r).norm() == 0.0 || c.wstar.col(r + net.half()).norm() == 0.0);
}

TEST(Express, KorderConstructionExpressesTheTarget) {
  const int d = 3, k = 3;
  const Network net = init_symmetric(d, 1 << 11, 1.0, 9, Activation::relu_power(k));
  Rng rng(5);
  TargetPoly t;
  t.terms.push_back({0.7, sphere_point(d, 1.0, rng), 5});
  FitConfig cfg;
  const KorderConstruction c = construct_korder_Wstar(net, k, t, cfg);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const Vector x = sphere_point(d, 1.0, rng);
    worst = std::max(worst, std::abs(f_korder(net, c.paired, x, k) - t.eval(x)));
  }
  EXPECT_LE(worst, 0.05);
  EXPECT_THROW(construct_korder_Wstar(net, k, TargetPoly{{{1.0, sphere_point(d, 1.0, rng), 6}}}, cfg),
               std::invalid_argument);
  EXPECT_THROW(construct_quadratic_Wstar(net, t, cfg), std::invalid_argument);
}

TEST(Express, BoundFormula) {
  TargetPoly t;
  Vector b = Vector::Zero(3);
  b(0) = 2.0;
  t.terms = {{0.5, b, 4}};
  // 16 pi (4-2)^3 alpha^2 B_x^{4} ||beta||^8
  EXPECT_NEAR(quad_norm_bound(t, 1.5), 16 * std::numbers::pi * 8 * 0.25 * std::pow(1.5, 4) * 256, 1e-8);
  t.terms.push_back({1.0, b / 2, 2});
  const double each = 16 * std::numbers::pi * 8 * 0.25 * 256 + 16 * std::numbers::pi * 1 * 1;
  EXPECT_NEAR(quad_norm_bound(t, 1.0), 2 * each, 1e-8);
  EXPECT_NEAR(korder_norm_bound(TargetPoly{{{1.0, b / 2, 3}}}, 3, 1.0), 2 * std::numbers::pi, 1e-12);
}
