#pragma once

#include <filesystem>

#include "taylornet/activation.hpp"
#include "taylornet/common.hpp"

namespace taylornet {

// f(x) = (1/sqrt(m)) sum_r a_r sigma((w0_r + w_r)^T x), x on the sphere of radius bx.
struct Network {
  int d = 0;
  int m = 0;
  double bx = 1.0;
  Vector a;   // length m
  Matrix w0;  // d x m
  Activation activation;
  std::uint64_t seed = 0;

  int half() const { return m / 2; }
  // Throws unless shapes agree and the symmetric pairing holds bitwise.
  void validate_symmetric() const;
  void validate_shapes() const;
};

// Neuron r in the first half is perturbed by plus.col(r), neuron r + m/2 by minus.col(r).
struct PairedDelta {
  Matrix plus;   // d x m/2
  Matrix minus;  // d x m/2

  WeightDelta flat() const;
  static PairedDelta from_flat(const WeightDelta& w);
};

enum class InputCheck { Checked, Unchecked };

Network init_symmetric(int d, int m, double bx, std::uint64_t seed,
                       Activation activation = Activation::relu_cubed_sixth());

struct W0BoundReport {
  double max_norm = 0.0;
  double threshold = 0.0;
  bool ok = false;
};
W0BoundReport check_w0_bound(const Network& net, double delta);

double forward(const Network& net, const WeightDelta& w, const Vector& x,
               InputCheck check = InputCheck::Checked);
double f_lin(const Network& net, const WeightDelta& w, const Vector& x,
             InputCheck check = InputCheck::Checked);
double f_quad(const Network& net, const WeightDelta& w, const Vector& x,
              InputCheck check = InputCheck::Checked);
double quad_remainder(const Network& net, const WeightDelta& w, const Vector& x,
                      InputCheck check = InputCheck::Checked);
double f_korder(const Network& net, const PairedDelta& paired, const Vector& x, int k,
                InputCheck check = InputCheck::Checked);

// (sum_r ||w_r||^p)^{1/p}; p = infinity gives the largest column norm.
double norm_2p(const Matrix& w, double p);

// Batched evaluation over rows of x (n x d). Rows are checked against the sphere.
Vector forward_batch(const Network& net, const WeightDelta& w, const Matrix& x);
Vector f_lin_batch(const Network& net, const WeightDelta& w, const Matrix& x);
Vector f_quad_batch(const Network& net, const WeightDelta& w, const Matrix& x);

void check_on_sphere(const Network& net, const Vector& x);
void check_rows_on_sphere(const Matrix& x, double bx, double tol = 1e-9);

// Little-endian float64 container plus a JSON sidecar next to it (same stem, .json).
void save_network(const Network& net, const std::filesystem::path& path);
Network load_network(const std::filesystem::path& path);
void save_weight_delta(const Network& net, const WeightDelta& w, const std::filesystem::path& path);
WeightDelta load_weight_delta(const std::filesystem::path& path);

}  // namespace taylornet
