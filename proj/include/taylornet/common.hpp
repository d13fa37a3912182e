#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace taylornet {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Rng = std::mt19937_64;

// Movement of the first layer away from W0, d x m, column r belongs to neuron r.
using WeightDelta = Matrix;

// Iterate or objective became NaN/Inf during optimization.
class NumericalAbort : public std::runtime_error {
 public:
  NumericalAbort(const std::string& what, int step, double norm, double eta)
      : std::runtime_error(what), step(step), norm(norm), eta(eta) {}
  int step;
  double norm;
  double eta;
};

// splitmix64 finalizer; used to derive independent child seeds.
inline std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t child_seed(std::uint64_t seed, std::uint64_t stream) {
  return mix_seed(seed ^ mix_seed(stream + 0x632be59bd9b4e019ULL));
}

// Standard normal vector / matrix from rng, filled in column-major order.
Matrix gaussian_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng, double stddev = 1.0);
// Uniform point on the sphere of the given radius.
Vector sphere_point(int d, double radius, Rng& rng);

}  // namespace taylornet
