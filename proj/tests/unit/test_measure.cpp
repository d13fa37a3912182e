#include <gtest/gtest.h>

#include <cmath>

#include "taylornet/measure.hpp"

using namespace taylornet;

TEST(Generators, SphereAndHypercubeRowsHaveRadiusBx) {
  Rng rng(1);
  const Matrix s = gen_sphere(50, 7, 2.5, rng);
  const Matrix h = gen_hypercube(50, 7, 2.5, rng);
  for (int i = 0; i < 50; ++i) {
    EXPECT_NEAR(s.row(i).norm(), 2.5, 1e-12);
    EXPECT_NEAR(h.row(i).norm(), 2.5, 1e-12);
  }
  EXPECT_NEAR(std::abs(h(3, 2)), 2.5 / std::sqrt(7.0), 1e-15);
}

TEST(Generators, XorLabelsAndNoise) {
  Rng rng(2);
  const Dataset d = gen_xor2(400, 6, rng);
  EXPECT_NEAR(d.bx, std::sqrt(6.0), 1e-15);
  d.validate();
  for (int i = 0; i < d.n(); ++i) EXPECT_EQ(d.y(i), d.x(i, 0) * d.x(i, 1));
  Rng a(3), b(3);
  const Dataset noisy = gen_xor2(4000, 6, a, 0.2);
  int flipped = 0;
  for (int i = 0; i < noisy.n(); ++i) flipped += noisy.y(i) != noisy.x(i, 0) * noisy.x(i, 1);
  EXPECT_NEAR(flipped / 4000.0, 0.2, 0.03);
  EXPECT_EQ(gen_xor2(4000, 6, b, 0.2).y, noisy.y);
  EXPECT_THROW(gen_xor2(5, 1, rng), std::invalid_argument);
  EXPECT_THROW(gen_xor2(5, 4, rng, 0.7), std::invalid_argument);
}

TEST(Generators, MatrixSensingLabelsAreQuadraticForms) {
  Rng rng(4);
  const auto spec = random_spectrum(8, 3, rng);
  ASSERT_EQ(spec.size(), 3u);
  EXPECT_EQ(spec[0].alpha, 1.0);
  EXPECT_EQ(spec[1].alpha, -1.0);
  for (size_t i = 0; i < 3; ++i)
    for (size_t j = 0; j < 3; ++j) EXPECT_NEAR(spec[i].v.dot(spec[j].v), i == j ? 1.0 : 0.0, 1e-12);
  const Dataset d = gen_matrix_sensing(30, 8, spec, rng);
  d.validate();
  Matrix a = Matrix::Zero(8, 8);
  for (const auto& t : spec) a += t.alpha * t.v * t.v.transpose();
  for (int i = 0; i < 30; ++i) EXPECT_NEAR(d.y(i), d.x.row(i) * a * d.x.row(i).transpose(), 1e-12);
  EXPECT_THROW(random_spectrum(3, 4, rng), std::invalid_argument);
}

TEST(Generators, ExperimentSplitsAreDisjointAndDeterministic) {
  ExperimentParams p = default_experiment_params("sensing");
  p.n = 40;
  p.n_test = 60;
  p.d = 5;
  const TaskSplit a = make_task_data(p, 9), b = make_task_data(p, 9);
  EXPECT_EQ(a.train.x, b.train.x);
  EXPECT_EQ(a.test.y, b.test.y);
  ASSERT_EQ(a.train.n(), 40);
  ASSERT_EQ(a.test.n(), 60);
  // continuous draws: no test row equals a train row
  for (int i = 0; i < 60; ++i)
    for (int j = 0; j < 40; ++j) EXPECT_GT((a.test.x.row(i) - a.train.x.row(j)).norm(), 0.0);
  EXPECT_NE(make_task_data(p, 10).train.x, a.train.x);
}

TEST(Opnorm, SymmetricOpnormMatchesEigensolver) {
  Rng rng(5);
  for (int t = 0; t < 5; ++t) {
    Matrix g = gaussian_matrix(6, 6, rng);
    const Matrix a = g + g.transpose();
    const Eigen::SelfAdjointEigenSolver<Matrix> es(a);
    EXPECT_NEAR(sym_opnorm(a, rng), es.eigenvalues().cwiseAbs().maxCoeff(), 1e-7);
  }
  EXPECT_EQ(sym_opnorm(Matrix::Zero(3, 3), rng), 0.0);
}

TEST(Opnorm, MxopBounds) {
  Rng rng(6);
  for (int t = 0; t < 5; ++t) {
    const Matrix x = gen_sphere(100 + 50 * t, 3 + t, 1.0 + t, rng);
    EXPECT_LE(mxop(x, 1.0 + t), 1.0 + 1e-12);
  }
  const Matrix x = gen_sphere(5000, 50, 1.0, rng);
  EXPECT_LE(mxop(x, 1.0), 1.5 / std::sqrt(50.0));
  const Vector p = sphere_point(7, 3.0, rng);
  const Matrix rep = p.transpose().replicate(20, 1);
  EXPECT_NEAR(mxop(rep, 3.0), 1.0, 1e-9);
}

TEST(Opnorm, FeatureOpnormSinglePoint) {
  // One data point: |sum_i eps_i s_ir x_i x_i^T| / n = relu(w0_r^T x) B_x^2, maximized over r.
  const Network net = init_symmetric(4, 40, 1.0, 3);
  Rng rng(7);
  const Vector x = sphere_point(4, 1.0, rng);
  const OpnormEstimate e = feature_opnorm(net, x.transpose(), 3, rng);
  EXPECT_EQ(e.neurons_used, 20);
  const double expect = (net.w0.leftCols(20).transpose() * x).cwiseMax(0.0).maxCoeff();
  EXPECT_NEAR(e.value, expect, 1e-8);
  EXPECT_EQ(feature_opnorm(net, x.transpose(), 1, rng, 5).neurons_used, 5);
}

TEST(Opnorm, TensorEstimateIsALowerBoundThatGrowsWithRestarts) {
  const Network net = init_symmetric(5, 16, 1.0, 2, Activation::relu_power(3));
  Rng data_rng(8);
  const Matrix x = gen_sphere(30, 5, 1.0, data_rng);
  Rng a(1), b(1);
  const OpnormEstimate one = tensor_opnorm_estimate(net, x, 3, 2, 1, a);
  const OpnormEstimate many = tensor_opnorm_estimate(net, x, 3, 2, 8, b);
  EXPECT_GE(many.value, one.value - 1e-15);
  EXPECT_GT(one.value, 0.0);
  // never exceeds the trivial bound max_r (1/n) sum_i |c_i| B_x^3
  const Matrix s = (x * net.w0.leftCols(8)).cwiseMax(0.0);
  EXPECT_LE(many.value, s.colwise().sum().maxCoeff() / 30.0 + 1e-12);
  EXPECT_THROW(tensor_opnorm_estimate(net, x, 2, 1, 1, a), std::invalid_argument);
}

TEST(Stats, SlopeOfExactPowerLaw) {
  std::vector<double> xs, ys;
  for (int i = 0; i < 6; ++i) {
    xs.push_back(std::pow(2.0, 8 + i));
    ys.push_back(3.0 * std::pow(xs.back(), -0.25));
  }
  const SlopeFit f = fit_loglog_slope(xs, ys);
  EXPECT_NEAR(f.slope, -0.25, 1e-12);
  EXPECT_NEAR(std::exp(f.intercept), 3.0, 1e-10);
  EXPECT_NEAR(f.hi - f.lo, 0.0, 1e-10);
  ys[2] *= 1.1;
  const SlopeFit g = fit_loglog_slope(xs, ys);
  EXPECT_LT(g.lo, g.slope);
  EXPECT_GT(g.hi, g.slope);
  EXPECT_THROW(fit_loglog_slope({1, 2}, {1, 2}), std::invalid_argument);
  EXPECT_THROW(fit_loglog_slope({1, 2, 3}, {1, -2, 3}), std::invalid_argument);
}

TEST(Stats, MeanStd) {
  const MeanStd m = mean_std({1.0, 2.0, 3.0, 4.0});
  EXPECT_DOUBLE_EQ(m.mean, 2.5);
  EXPECT_NEAR(m.std, std::sqrt(5.0 / 3.0), 1e-15);
}

TEST(Scans, CouplingScanSmoke) {
  const ScanReport r = coupling_scan(5, 1.0, {64, 128, 256, 512}, ColNormRule{}, 4, 11);
  const std::string csv = scan_csv(r);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "m,statistic,mean,std,trials");
  EXPECT_EQ(r.rows.size(), 4u * r.statistics.size());
  EXPECT_EQ(r.slopes.count("flin_signed"), 0u);
  const nlohmann::json j = scan_slopes_json(r);
  EXPECT_EQ(j.size(), r.statistics.size());
  EXPECT_TRUE(j.at("flin_signed").is_null());  // signed mean has no log-log slope
  for (const auto& [name, fit] : r.slopes) EXPECT_EQ(j.at(name).at("slope"), fit.slope) << name;
  // same seed, same numbers; more threads, same numbers
  EXPECT_EQ(scan_csv(coupling_scan(5, 1.0, {64, 128, 256, 512}, ColNormRule{}, 4, 11, 3)), csv);
  EXPECT_THROW(coupling_scan(5, 1.0, {64, 128, 256}, ColNormRule{}, 4, 11), std::invalid_argument);
}

TEST(Scans, KorderScanSmoke) {
  const ScanReport r = korder_scan(3, 5, {64, 128, 256, 512}, 3, 2);
  EXPECT_EQ(r.statistics.size(), 4u);
  EXPECT_EQ(r.means("abs_f3").size(), 4u);
  for (double v : r.means("abs_f3")) EXPECT_GT(v, 0.0);
}
