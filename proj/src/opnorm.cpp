#include <cmath>

#include "taylornet/measure.hpp"

namespace taylornet {

double sym_opnorm(const Matrix& a, Rng& rng, int restarts, double tol) {
  const Eigen::Index d = a.rows();
  if (d == 0) return 0.0;
  const Matrix a2 = a * a;
  double best = 0.0;
  for (int s = 0; s < std::max(1, restarts); ++s) {
    Vector v = sphere_point(static_cast<int>(d), 1.0, rng);
    double lam = 0.0;
    for (int it = 0; it < 20000; ++it) {
      Vector u = a2 * v;
      const double nu = u.norm();
      if (nu == 0.0) {
        lam = 0.0;
        break;
      }
      const double next = v.dot(u);
      v = u / nu;
      if (std::abs(next - lam) <= tol * std::max(1.0, std::abs(next))) {
        lam = next;
        break;
      }
      lam = next;
    }
    best = std::max(best, v.dot(a2 * v));
  }
  return std::sqrt(std::max(0.0, best));
}

double mxop(const Matrix& x, double bx) {
  if (x.rows() < 1) throw std::invalid_argument("mxop: need at least one row");
  const Matrix cov = x.transpose() * x / static_cast<double>(x.rows());
  Rng rng(0x5eedULL);
  // cov is PSD, so its opnorm is the square root of the top eigenvalue of cov^2
  return std::sqrt(sym_opnorm(cov, rng)) / bx;
}

namespace {

std::vector<double> rademacher(int n, Rng& rng) {
  std::vector<double> s(n);
  for (int i = 0; i < n; ++i) s[i] = (rng() >> 63) ? 1.0 : -1.0;
  return s;
}

}  // namespace

OpnormEstimate feature_opnorm(const Network& net, const Matrix& x, int n_rademacher, Rng& rng, int max_neurons) {
  if (n_rademacher < 1) throw std::invalid_argument("feature_opnorm: n_rademacher must be >= 1");
  if (x.cols() != net.d) throw std::invalid_argument("feature_opnorm: dimension mismatch");
  const int n = static_cast<int>(x.rows());
  // sigma''(w0_r^T x) is the same for r and r + m/2, so the first half covers every neuron
  const int neurons = std::min(std::max(1, net.m / 2), max_neurons);
  const Matrix s2 = net.activation.derivative((x * net.w0.leftCols(neurons)).array(), 2).matrix();
  OpnormEstimate out;
  out.neurons_used = neurons;
  double acc = 0.0;
  for (int t = 0; t < n_rademacher; ++t) {
    const std::vector<double> sig = rademacher(n, rng);
    double best = 0.0;
    for (int r = 0; r < neurons; ++r) {
      Vector c(n);
      for (int i = 0; i < n; ++i) c(i) = sig[i] * s2(i, r) / n;
      const Matrix mr = x.transpose() * c.asDiagonal() * x;
      best = std::max(best, sym_opnorm(mr, rng));
    }
    acc += best;
  }
  out.value = acc / n_rademacher;
  return out;
}

namespace {

// max over the unit sphere of |sum_i c_i (v^T x_i)^k| by projected gradient ascent with backtracking
double tensor_form_max(const Matrix& x, const Vector& c, int k, int restarts, std::uint64_t seed, bool* converged) {
  const int d = static_cast<int>(x.cols());
  auto value = [&](const Vector& v) { return c.dot((x * v).array().pow(k).matrix()); };
  auto grad = [&](const Vector& v) -> Vector {
    const Vector proj = (x * v).array().pow(k - 1).matrix();
    return k * (x.transpose() * c.cwiseProduct(proj));
  };
  Rng rng(seed);
  Eigen::Index top;
  c.cwiseAbs().maxCoeff(&top);
  double best = 0.0;
  for (int s = 0; s < std::max(1, restarts); ++s) {
    Vector v = s == 0 ? Vector(x.row(top).transpose()) : sphere_point(d, 1.0, rng);
    if (v.norm() == 0.0) v = sphere_point(d, 1.0, rng);
    v.normalize();
    const double sign = value(v) >= 0.0 ? 1.0 : -1.0;
    double f = sign * value(v);
    double step = 1.0;
    bool done = false;
    for (int it = 0; it < 500 && !done; ++it) {
      const Vector g = sign * grad(v);
      bool moved = false;
      for (int bt = 0; bt < 40; ++bt) {
        Vector cand = v + step * g;
        const double cn = cand.norm();
        if (cn == 0.0) {
          step *= 0.5;
          continue;
        }
        cand /= cn;
        const double fc = sign * value(cand);
        if (fc > f) {
          done = (fc - f) <= 1e-12 * std::max(1.0, std::abs(fc));
          v = cand;
          f = fc;
          step *= 2.0;
          moved = true;
          break;
        }
        step *= 0.5;
      }
      if (!moved) done = true;
    }
    if (!done) *converged = false;
    best = std::max(best, f);
  }
  return best;
}

}  // namespace

OpnormEstimate tensor_opnorm_estimate(const Network& net, const Matrix& x, int k, int n_rademacher, int restarts,
                                      Rng& rng, int max_neurons) {
  if (k < 3) throw std::invalid_argument("tensor_opnorm_estimate: k must be >= 3");
  if (n_rademacher < 1) throw std::invalid_argument("tensor_opnorm_estimate: n_rademacher must be >= 1");
  if (!net.activation.supports(k)) throw std::invalid_argument("tensor_opnorm_estimate: activation lacks order k");
  if (x.cols() != net.d) throw std::invalid_argument("tensor_opnorm_estimate: dimension mismatch");
  const int n = static_cast<int>(x.rows());
  const int neurons = std::min(std::max(1, net.m / 2), max_neurons);
  double kfact = 1.0;
  for (int i = 2; i <= k; ++i) kfact *= i;
  const Matrix sk = net.activation.derivative((x * net.w0.leftCols(neurons)).array(), k).matrix() / kfact;
  OpnormEstimate out;
  out.neurons_used = neurons;
  const std::uint64_t base = rng();
  double acc = 0.0;
  for (int t = 0; t < n_rademacher; ++t) {
    const std::vector<double> sig = rademacher(n, rng);
    double best = 0.0;
    for (int r = 0; r < neurons; ++r) {
      Vector c(n);
      for (int i = 0; i < n; ++i) c(i) = sig[i] * sk(i, r) / n;
      if (c.cwiseAbs().maxCoeff() == 0.0) continue;
      const std::uint64_t s = child_seed(base, static_cast<std::uint64_t>(t) * 1000003ULL + r);
      best = std::max(best, tensor_form_max(x, c, k, restarts, s, &out.converged));
    }
    acc += best;
  }
  out.value = acc / n_rademacher;
  return out;
}

}  // namespace taylornet
