#include "taylornet/model.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace taylornet {

Matrix gaussian_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng, double stddev) {
  std::normal_distribution<double> normal(0.0, stddev);
  Matrix out(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) out(i, j) = normal(rng);
  return out;
}

Vector sphere_point(int d, double radius, Rng& rng) {
  Vector v = gaussian_matrix(d, 1, rng);
  double n = v.norm();
  while (n == 0.0) {
    v = gaussian_matrix(d, 1, rng);
    n = v.norm();
  }
  return v * (radius / n);
}

void Network::validate_shapes() const {
  if (m < 1 || d < 1) throw std::invalid_argument("network: d and m must be positive");
  if (a.size() != m || w0.rows() != d || w0.cols() != m)
    throw std::invalid_argument("network: a / W0 shapes do not match (d, m)");
  if (!(bx > 0.0)) throw std::invalid_argument("network: B_x must be positive");
}

void Network::validate_symmetric() const {
  validate_shapes();
  if (m % 2 != 0) throw std::invalid_argument("network: width must be even");
  const int h = half();
  for (int r = 0; r < h; ++r) {
    if (a(r) != 1.0 || a(r + h) != -1.0) throw std::invalid_argument("network: sign pattern broken");
    for (int i = 0; i < d; ++i)
      if (w0(i, r) != w0(i, r + h)) throw std::invalid_argument("network: W0 halves differ");
  }
}

WeightDelta PairedDelta::flat() const {
  if (plus.rows() != minus.rows() || plus.cols() != minus.cols())
    throw std::invalid_argument("paired delta: plus/minus shapes differ");
  WeightDelta w(plus.rows(), 2 * plus.cols());
  w << plus, minus;
  return w;
}

PairedDelta PairedDelta::from_flat(const WeightDelta& w) {
  if (w.cols() % 2 != 0) throw std::invalid_argument("paired delta: flat width must be even");
  const Eigen::Index h = w.cols() / 2;
  return PairedDelta{w.leftCols(h), w.rightCols(h)};
}

Network init_symmetric(int d, int m, double bx, std::uint64_t seed, Activation activation) {
  if (m < 2 || m % 2 != 0)
    throw std::invalid_argument("init_symmetric: m must be even and >= 2, got " + std::to_string(m));
  if (d < 1) throw std::invalid_argument("init_symmetric: d must be >= 1");
  if (!(bx > 0.0)) throw std::invalid_argument("init_symmetric: B_x must be positive");
  Network net;
  net.d = d;
  net.m = m;
  net.bx = bx;
  net.seed = seed;
  net.activation = activation;
  const int h = m / 2;
  Rng rng(seed);
  const Matrix half_cols = gaussian_matrix(d, h, rng, 1.0 / bx);
  net.w0.resize(d, m);
  net.w0 << half_cols, half_cols;
  net.a.resize(m);
  net.a.head(h).setOnes();
  net.a.tail(h).setConstant(-1.0);
  return net;
}

W0BoundReport check_w0_bound(const Network& net, double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("check_w0_bound: delta must lie in (0, 1)");
  W0BoundReport rep;
  rep.max_norm = net.m > 0 && net.w0.size() > 0 ? net.bx * net.w0.colwise().norm().maxCoeff() : 0.0;
  rep.threshold = std::sqrt(8.0 * (net.d * std::log(5.0) + std::log(net.m / delta)));
  rep.ok = rep.max_norm <= rep.threshold;
  return rep;
}

void check_on_sphere(const Network& net, const Vector& x) {
  if (x.size() != net.d) throw std::invalid_argument("input dimension does not match network");
  const double n = x.norm();
  if (std::abs(n - net.bx) > 1e-9 * std::max(1.0, net.bx)) {
    std::ostringstream os;
    os << "input off the sphere: |x| = " << n << ", B_x = " << net.bx;
    throw std::invalid_argument(os.str());
  }
}

void check_rows_on_sphere(const Matrix& x, double bx, double tol) {
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double n = x.row(i).norm();
    if (std::abs(n - bx) > tol * std::max(1.0, bx)) {
      std::ostringstream os;
      os << "row " << i << " off the sphere: |x| = " << n << ", B_x = " << bx;
      throw std::invalid_argument(os.str());
    }
  }
}

namespace {

void check_delta(const Network& net, const WeightDelta& w) {
  if (w.rows() != net.d || w.cols() != net.m)
    throw std::invalid_argument("weight delta shape does not match network");
}

void prepare(const Network& net, const WeightDelta& w, const Vector& x, InputCheck check) {
  net.validate_shapes();
  check_delta(net, w);
  if (check == InputCheck::Checked)
    check_on_sphere(net, x);
  else if (x.size() != net.d)
    throw std::invalid_argument("input dimension does not match network");
}

}  // namespace

double forward(const Network& net, const WeightDelta& w, const Vector& x, InputCheck check) {
  prepare(net, w, x, check);
  const Eigen::ArrayXXd z = ((net.w0 + w).transpose() * x).array();
  const Eigen::ArrayXXd s = net.activation.derivative(z, 0);
  return (s.matrix().col(0).dot(net.a)) / std::sqrt(static_cast<double>(net.m));
}

double f_lin(const Network& net, const WeightDelta& w, const Vector& x, InputCheck check) {
  prepare(net, w, x, check);
  const Eigen::ArrayXXd p0 = (net.w0.transpose() * x).array();
  const Eigen::ArrayXd s1 = net.activation.derivative(p0, 1).col(0);
  const Eigen::ArrayXd wx = (w.transpose() * x).array();
  return (net.a.array() * s1 * wx).sum() / std::sqrt(static_cast<double>(net.m));
}

double f_quad(const Network& net, const WeightDelta& w, const Vector& x, InputCheck check) {
  prepare(net, w, x, check);
  const Eigen::ArrayXXd p0 = (net.w0.transpose() * x).array();
  const Eigen::ArrayXd s2 = net.activation.derivative(p0, 2).col(0);
  const Eigen::ArrayXd wx = (w.transpose() * x).array();
  return (net.a.array() * s2 * wx.square()).sum() / (2.0 * std::sqrt(static_cast<double>(net.m)));
}

double quad_remainder(const Network& net, const WeightDelta& w, const Vector& x, InputCheck check) {
  const WeightDelta zero = WeightDelta::Zero(w.rows(), w.cols());
  return forward(net, w, x, check) - forward(net, zero, x, check) - f_lin(net, w, x, check) -
         f_quad(net, w, x, check);
}

double f_korder(const Network& net, const PairedDelta& paired, const Vector& x, int k, InputCheck check) {
  if (k < 1) throw std::invalid_argument("f_korder: k must be >= 1");
  if (!net.activation.supports(k))
    throw std::invalid_argument("f_korder: activation " + net.activation.tag() + " does not support order " +
                                std::to_string(k));
  net.validate_shapes();
  const int h = net.half();
  if (paired.plus.rows() != net.d || paired.minus.rows() != net.d || paired.plus.cols() != h ||
      paired.minus.cols() != h)
    throw std::invalid_argument("f_korder: paired delta shape does not match network");
  if (check == InputCheck::Checked) check_on_sphere(net, x);
  double kfact = 1.0;
  for (int i = 2; i <= k; ++i) kfact *= i;
  const Eigen::ArrayXXd p0 = (net.w0.leftCols(h).transpose() * x).array();
  const Eigen::ArrayXd sk = net.activation.derivative(p0, k).col(0) / kfact;
  const Eigen::ArrayXd up = (paired.plus.transpose() * x).array();
  const Eigen::ArrayXd um = (paired.minus.transpose() * x).array();
  const Eigen::ArrayXd diff = up.pow(k) - um.pow(k);
  return (sk * diff).sum() / std::sqrt(static_cast<double>(h));
}

double norm_2p(const Matrix& w, double p) {
  if (w.cols() == 0) return 0.0;
  const Eigen::ArrayXd cn = w.colwise().stableNorm().transpose().array();
  if (std::isinf(p)) return cn.maxCoeff();
  if (!(p >= 1.0)) throw std::invalid_argument("norm_2p: p must be >= 1");
  const double mx = cn.maxCoeff();
  if (mx == 0.0) return 0.0;
  // scale by the largest column to keep large p from overflowing
  return mx * std::pow((cn / mx).pow(p).sum(), 1.0 / p);
}

Vector forward_batch(const Network& net, const WeightDelta& w, const Matrix& x) {
  net.validate_shapes();
  check_delta(net, w);
  check_rows_on_sphere(x, net.bx);
  const Eigen::ArrayXXd z = (x * (net.w0 + w)).array();
  return net.activation.derivative(z, 0).matrix() * net.a / std::sqrt(static_cast<double>(net.m));
}

Vector f_lin_batch(const Network& net, const WeightDelta& w, const Matrix& x) {
  net.validate_shapes();
  check_delta(net, w);
  check_rows_on_sphere(x, net.bx);
  const Eigen::ArrayXXd s1 = net.activation.derivative((x * net.w0).array(), 1);
  const Eigen::ArrayXXd xw = (x * w).array();
  return (s1 * xw).matrix() * net.a / std::sqrt(static_cast<double>(net.m));
}

Vector f_quad_batch(const Network& net, const WeightDelta& w, const Matrix& x) {
  net.validate_shapes();
  check_delta(net, w);
  check_rows_on_sphere(x, net.bx);
  const Eigen::ArrayXXd s2 = net.activation.derivative((x * net.w0).array(), 2);
  const Eigen::ArrayXXd xw = (x * w).array();
  return (s2 * xw.square()).matrix() * net.a / (2.0 * std::sqrt(static_cast<double>(net.m)));
}

}  // namespace taylornet
