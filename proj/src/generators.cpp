#include <cmath>

#include "taylornet/measure.hpp"

namespace taylornet {

Matrix gen_sphere(int n, int d, double bx, Rng& rng) {
  if (n < 1 || d < 1) throw std::invalid_argument("gen_sphere: n and d must be >= 1");
  Matrix x(n, d);
  for (int i = 0; i < n; ++i) x.row(i) = sphere_point(d, bx, rng).transpose();
  return x;
}

Matrix gen_hypercube(int n, int d, double bx, Rng& rng) {
  if (n < 1 || d < 1) throw std::invalid_argument("gen_hypercube: n and d must be >= 1");
  const double v = bx / std::sqrt(static_cast<double>(d));
  Matrix x(n, d);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j) x(i, j) = (rng() >> 63) ? v : -v;
  return x;
}

Dataset gen_xor2(int n, int d, Rng& rng, double noise) {
  if (d < 2) throw std::invalid_argument("gen_xor2: d must be >= 2");
  if (!(noise >= 0.0 && noise <= 0.5)) throw std::invalid_argument("gen_xor2: noise must lie in [0, 0.5]");
  Dataset data;
  data.bx = std::sqrt(static_cast<double>(d));
  data.x = gen_hypercube(n, d, data.bx, rng);
  data.y.resize(n);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int i = 0; i < n; ++i) {
    data.y(i) = data.x(i, 0) * data.x(i, 1);
    if (noise > 0.0 && unif(rng) < noise) data.y(i) = -data.y(i);
  }
  return data;
}

Dataset gen_matrix_sensing(int n, int d, const std::vector<SpectrumTerm>& spectrum, Rng& rng) {
  for (const auto& t : spectrum) {
    if (t.v.size() != d) throw std::invalid_argument("gen_matrix_sensing: direction dimension mismatch");
    if (std::abs(t.v.norm() - 1.0) > 1e-9) throw std::invalid_argument("gen_matrix_sensing: directions must be unit");
    if (std::abs(t.alpha) > 1.0) throw std::invalid_argument("gen_matrix_sensing: |alpha| must be <= 1");
  }
  Dataset data;
  data.bx = std::sqrt(static_cast<double>(d));
  data.x = gen_sphere(n, d, data.bx, rng);
  data.y = Vector::Zero(n);
  for (const auto& t : spectrum) data.y.array() += t.alpha * (data.x * t.v).array().square();
  return data;
}

std::vector<SpectrumTerm> random_spectrum(int d, int rank, Rng& rng) {
  if (rank < 0 || rank > d) throw std::invalid_argument("random_spectrum: rank must lie in [0, d]");
  std::vector<SpectrumTerm> out;
  if (rank == 0) return out;
  const Matrix g = gaussian_matrix(d, rank, rng);
  const Eigen::HouseholderQR<Matrix> qr(g);
  const Matrix q = qr.householderQ() * Matrix::Identity(d, rank);
  for (int j = 0; j < rank; ++j) out.push_back({j % 2 == 0 ? 1.0 : -1.0, q.col(j)});
  return out;
}

}  // namespace taylornet
