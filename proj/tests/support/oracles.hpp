#pragma once

// Reference implementations written independently of the library code paths:
// plain loops, std::pow and finite differences.

#include <cmath>
#include <complex>
#include <functional>
#include <numbers>

#include "taylornet/common.hpp"
#include "taylornet/model.hpp"

namespace oracle {

using taylornet::Matrix;
using taylornet::Vector;

inline double relu(double t) { return t > 0.0 ? t : 0.0; }

// relu^{deg} * c with the degree and constant read off the tag.
inline double act(const taylornet::Network& net, double t) {
  if (net.activation.tag() == "relu3_6") return std::pow(relu(t), 3) / 6.0;
  const int k = net.activation.order();
  return std::pow(relu(t), k + 1) / (k + 1);
}

inline double forward(const taylornet::Network& net, const Matrix& w, const Vector& x) {
  double acc = 0.0;
  for (int r = 0; r < net.m; ++r) acc += net.a(r) * act(net, (net.w0.col(r) + w.col(r)).dot(x));
  return acc / std::sqrt(static_cast<double>(net.m));
}

// d/dt f(W0 + tW) at t = 0 by a 4-point stencil.
inline double taylor1(const taylornet::Network& net, const Matrix& w, const Vector& x, double h = 1e-4) {
  auto f = [&](double t) { return oracle::forward(net, Matrix(t * w), x); };
  return (-f(2 * h) + 8 * f(h) - 8 * f(-h) + f(-2 * h)) / (12 * h);
}

// (1/2) d^2/dt^2 f(W0 + tW) at t = 0.
inline double taylor2(const taylornet::Network& net, const Matrix& w, const Vector& x, double h = 1e-3) {
  auto f = [&](double t) { return oracle::forward(net, Matrix(t * w), x); };
  return 0.5 * (-f(2 * h) + 16 * f(h) - 30 * f(0) + 16 * f(-h) - f(-2 * h)) / (12 * h * h);
}

// Central-difference gradient of a scalar function of a matrix.
inline Matrix fd_grad(const std::function<double(const Matrix&)>& fn, const Matrix& w, double h) {
  Matrix g(w.rows(), w.cols());
  Matrix p = w;
  for (Eigen::Index j = 0; j < w.cols(); ++j)
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
      const double orig = p(i, j);
      p(i, j) = orig + h;
      const double up = fn(p);
      p(i, j) = orig - h;
      const double dn = fn(p);
      p(i, j) = orig;
      g(i, j) = (up - dn) / (2 * h);
    }
  return g;
}

// Second directional derivative d^2/dt^2 fn(W + tU) at t = 0.
inline double fd_second(const std::function<double(const Matrix&)>& fn, const Matrix& w, const Matrix& u, double h) {
  return (-fn(w + 2 * h * u) + 16 * fn(w + h * u) - 30 * fn(w) + 16 * fn(w - h * u) - fn(w - 2 * h * u)) /
         (12 * h * h);
}

// Arc-cosine kernel extended to the complex disk; analytic for |u| < 1.
inline std::complex<double> kernel_complex(std::complex<double> u) {
  const double pi = std::numbers::pi;
  return (u * (pi - std::acos(u)) + std::sqrt(1.0 - u * u)) / (2 * pi);
}

// Taylor coefficient c_p of the kernel by the Cauchy integral on |u| = r (trapezoid rule).
inline double kernel_taylor_coeff(int p, double r = 0.9, int nodes = 2048) {
  std::complex<double> acc = 0.0;
  for (int j = 0; j < nodes; ++j) {
    const double th = 2 * std::numbers::pi * j / nodes;
    const std::complex<double> u = std::polar(r, th);
    acc += kernel_complex(u) * std::polar(1.0, -p * th);
  }
  return acc.real() / nodes / std::pow(r, p);
}

// (sum_r ||w_r||^p)^{1/p} computed directly.
inline double norm_2p(const Matrix& w, double p) {
  double acc = 0.0;
  for (Eigen::Index r = 0; r < w.cols(); ++r) acc += std::pow(w.col(r).norm(), p);
  return std::pow(acc, 1.0 / p);
}

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300}); }

inline double rel_err(const Matrix& a, const Matrix& b) {
  return (a - b).norm() / std::max({a.norm(), b.norm(), 1e-300});
}

}  // namespace oracle
