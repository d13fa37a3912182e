#include "taylornet/express.hpp"

#include <cmath>
#include <numbers>

namespace taylornet {

double kernel_value(double u) {
  if (std::abs(u) > 1.0 + 1e-12) throw std::invalid_argument("kernel_value: |u| must be <= 1");
  u = std::clamp(u, -1.0, 1.0);
  return (u * (std::numbers::pi - std::acos(u)) + std::sqrt(1.0 - u * u)) / (2.0 * std::numbers::pi);
}

double kernel_coeff(int p) {
  if (p < 0) throw std::invalid_argument("kernel_coeff: p must be >= 0");
  if (p == 0) return 1.0 / (2.0 * std::numbers::pi);
  if (p == 1) return 0.25;
  if (p % 2 == 1) return 0.0;
  const int l = p / 2;
  // (2l-3)!! / (2l-2)!! by the ratio recurrence, starting from l = 1 where it is 1
  double ratio = 1.0;
  for (int i = 1; i < l; ++i) ratio *= static_cast<double>(2 * i - 1) / static_cast<double>(2 * i);
  return ratio / (static_cast<double>(2 * l - 1) * (2 * l) * 2.0 * std::numbers::pi);
}

double KernelSeries::eval(double u) const {
  // Horner from the top power down
  double acc = 0.0;
  for (int p = truncation - 1; p >= 0; --p) acc = acc * u + kernel_coeff(p);
  return acc;
}

double TargetPoly::eval(const Vector& x) const {
  double acc = 0.0;
  for (const auto& t : terms) acc += t.alpha * std::pow(t.beta.dot(x), t.p);
  return acc;
}

Vector TargetPoly::eval_rows(const Matrix& x) const {
  Vector out = Vector::Zero(x.rows());
  for (const auto& t : terms) out.array() += t.alpha * (x * t.beta).array().pow(t.p);
  return out;
}

TargetPoly target_from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw std::invalid_argument("target polynomial JSON must be an array of terms");
  TargetPoly t;
  for (const auto& e : j) {
    PolyTerm term;
    term.alpha = e.at("alpha").get<double>();
    const auto beta = e.at("beta").get<std::vector<double>>();
    term.beta = Eigen::Map<const Vector>(beta.data(), static_cast<Eigen::Index>(beta.size()));
    term.p = e.at("p").get<int>();
    if (term.p < 0) throw std::invalid_argument("target polynomial: p must be >= 0");
    t.terms.push_back(term);
  }
  return t;
}

nlohmann::json target_to_json(const TargetPoly& t) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& term : t.terms) {
    nlohmann::json e;
    e["alpha"] = term.alpha;
    e["beta"] = std::vector<double>(term.beta.data(), term.beta.data() + term.beta.size());
    e["p"] = term.p;
    arr.push_back(e);
  }
  return arr;
}

bool admissible_degree(int q) { return q == 0 || q == 1 || (q >= 2 && q % 2 == 0); }

namespace {

struct Solve {
  Vector a;
  double ridge = 0.0;
  double condition = 0.0;
  int attempts = 0;
};

double cholesky_condition(const Eigen::LLT<Matrix>& llt) {
  const Vector diag = llt.matrixLLT().diagonal();
  const double r = diag.maxCoeff() / diag.minCoeff();
  return r * r;
}

// Solves (G + lambda I) z = rhs, growing lambda tenfold until the factorization is clean.
Solve ridge_solve(const Matrix& gram, const Vector& rhs, double lambda) {
  Solve out;
  for (int attempt = 1; attempt <= 8; ++attempt) {
    Matrix g = gram;
    g.diagonal().array() += lambda;
    const Eigen::LLT<Matrix> llt(g);
    if (llt.info() == Eigen::Success) {
      Vector z = llt.solve(rhs);
      if (z.allFinite()) {
        out.a = std::move(z);
        out.ridge = lambda;
        out.condition = cholesky_condition(llt);
        out.attempts = attempt;
        return out;
      }
    }
    lambda = lambda > 0.0 ? lambda * 10.0 : 1e-12;
  }
  throw std::runtime_error("fit_feature_coefficients: system stayed singular after ridge escalation");
}

}  // namespace

FitResult fit_feature_coefficients(const Network& net, double alpha, const Vector& beta, int q,
                                   const Matrix& probe_x, double ridge_rel, NeuronBlock block) {
  if (!admissible_degree(q))
    throw std::invalid_argument("fit_feature_coefficients: degree " + std::to_string(q) +
                                " is not representable (need 0, 1 or even)");
  if (beta.size() != net.d || probe_x.cols() != net.d)
    throw std::invalid_argument("fit_feature_coefficients: dimension mismatch");
  if (probe_x.rows() < 1) throw std::invalid_argument("fit_feature_coefficients: no probes");
  const int h = net.half();
  if (block.count < 0) block = {0, h};
  if (block.begin < 0 || block.count < 1 || block.begin + block.count > h)
    throw std::invalid_argument("fit_feature_coefficients: neuron block out of range");

  const int np = static_cast<int>(probe_x.rows());
  const int nf = block.count;
  const double scale = 2.0 / net.m;
  const Matrix w0b = net.w0.middleCols(block.begin, nf);
  const Vector target = alpha * (probe_x * beta).array().pow(q).matrix();

  FitResult res;
  res.probes = np;
  if (alpha == 0.0) {
    res.a = Vector::Zero(nf);
    return res;
  }

  auto features = [&](int row0, int rows) -> Matrix {
    return ((probe_x.middleRows(row0, rows) * w0b).array().max(0.0) * scale).matrix();
  };

  const int chunk = 2048;
  if (np >= nf) {
    // primal: (Phi^T Phi + lambda I) a = Phi^T y, Gram accumulated in probe chunks
    Matrix gram = Matrix::Zero(nf, nf);
    Vector rhs = Vector::Zero(nf);
    for (int r0 = 0; r0 < np; r0 += chunk) {
      const int rows = std::min(chunk, np - r0);
      const Matrix phi = features(r0, rows);
      gram.selfadjointView<Eigen::Lower>().rankUpdate(phi.transpose());
      rhs.noalias() += phi.transpose() * target.segment(r0, rows);
    }
    gram = gram.selfadjointView<Eigen::Lower>();
    const double lambda = ridge_rel * gram.trace() / nf;
    Solve s = ridge_solve(gram, rhs, lambda);
    res.a = std::move(s.a);
    res.ridge = s.ridge;
    res.condition = s.condition;
    res.attempts = s.attempts;
  } else {
    // dual: a = Phi^T (Phi Phi^T + lambda I)^{-1} y, the same minimizer
    const Matrix phi = features(0, np);
    Matrix gram = phi * phi.transpose();
    const double lambda = ridge_rel * gram.trace() / nf;
    Solve s = ridge_solve(gram, target, lambda);
    res.a = phi.transpose() * s.a;
    res.ridge = s.ridge;
    res.condition = s.condition;
    res.attempts = s.attempts;
  }

  double worst = 0.0;
  for (int r0 = 0; r0 < np; r0 += chunk) {
    const int rows = std::min(chunk, np - r0);
    const Vector err = features(r0, rows) * res.a - target.segment(r0, rows);
    worst = std::max(worst, err.cwiseAbs().maxCoeff());
  }
  res.residual = worst;
  res.msq = scale * res.a.squaredNorm();
  return res;
}

namespace {

std::vector<NeuronBlock> partition(int half, int terms) {
  if (terms < 1) return {};
  if (half < terms) throw std::invalid_argument("construction: m/2 = " + std::to_string(half) +
                                                " is smaller than the number of target terms");
  std::vector<NeuronBlock> blocks;
  const int base = half / terms;
  for (int j = 0; j < terms; ++j) blocks.push_back({j * base, j + 1 == terms ? half - j * base : base});
  return blocks;
}

Matrix probes_for(const Network& net, const FitConfig& cfg, int block_size, int term) {
  const int np = cfg.probes > 0 ? cfg.probes : std::max(1, cfg.probes_per_feature * block_size);
  Rng rng(child_seed(cfg.seed, static_cast<std::uint64_t>(term)));
  Matrix x(np, net.d);
  for (int i = 0; i < np; ++i) x.row(i) = sphere_point(net.d, net.bx, rng).transpose();
  return x;
}

double ipow(double x, int e) {
  double out = 1.0;
  for (int i = 0; i < e; ++i) out *= x;
  return out;
}

double aggregate_bound(const TargetPoly& target, int k, double bx, double lead) {
  double sum = 0.0;
  for (const auto& t : target.terms) {
    const int q = t.p - k;
    const double q3 = ipow(std::max(q, 1), 3);
    sum += lead * q3 * t.alpha * t.alpha * ipow(bx, 2 * q) * ipow(t.beta.norm(), 2 * t.p);
  }
  return static_cast<double>(target.terms.size()) * sum;
}

void check_target(const Network& net, const TargetPoly& target, int k) {
  for (const auto& t : target.terms) {
    if (t.beta.size() != net.d) throw std::invalid_argument("construction: beta dimension does not match network");
    if (t.p < k || !admissible_degree(t.p - k))
      throw std::invalid_argument("construction: degree p=" + std::to_string(t.p) + " is inadmissible for order " +
                                  std::to_string(k) + " (need p-k in {0, 1} or even)");
  }
}

}  // namespace

double quad_norm_bound(const TargetPoly& target, double bx) {
  return aggregate_bound(target, 2, bx, 16.0 * std::numbers::pi);
}

double korder_norm_bound(const TargetPoly& target, int k, double bx) {
  return aggregate_bound(target, k, bx, 2.0 * std::numbers::pi);
}

QuadConstruction construct_quadratic_Wstar(const Network& net, const TargetPoly& target, const FitConfig& cfg) {
  if (net.activation.kind() != ActivationKind::ReluCubedSixth)
    throw std::invalid_argument("construct_quadratic_Wstar: needs the ReluCubedSixth activation");
  net.validate_symmetric();
  check_target(net, target, 2);
  const int h = net.half();
  QuadConstruction out;
  out.wstar = WeightDelta::Zero(net.d, net.m);
  const auto blocks = partition(h, static_cast<int>(target.terms.size()));
  const double c = 2.0 * std::pow(static_cast<double>(net.m), -0.25);
  for (size_t j = 0; j < blocks.size(); ++j) {
    const PolyTerm& t = target.terms[j];
    const NeuronBlock& b = blocks[j];
    const Matrix probes = probes_for(net, cfg, b.count, static_cast<int>(j));
    FitResult fit = fit_feature_coefficients(net, t.alpha, t.beta, t.p - 2, probes, cfg.ridge_rel, b);
    for (int i = 0; i < b.count; ++i) {
      const double a = fit.a(i);
      const int r = b.begin + i;
      if (a > 0.0) out.wstar.col(r) = c * std::sqrt(a) * t.beta;
      if (a < 0.0) out.wstar.col(r + h) = c * std::sqrt(-a) * t.beta;
    }
    out.fits.push_back(std::move(fit));
  }
  const double n4 = norm_2p(out.wstar, 4.0);
  out.norm24_4 = n4 * n4 * n4 * n4;
  out.bound = quad_norm_bound(target, net.bx);
  return out;
}

KorderConstruction construct_korder_Wstar(const Network& net, int k, const TargetPoly& target, const FitConfig& cfg) {
  if (net.activation.kind() != ActivationKind::ReluPower || net.activation.order() != k)
    throw std::invalid_argument("construct_korder_Wstar: needs the ReluPower(" + std::to_string(k) + ") activation");
  net.validate_symmetric();
  check_target(net, target, k);
  const int h = net.half();
  KorderConstruction out;
  out.paired.plus = Matrix::Zero(net.d, h);
  out.paired.minus = Matrix::Zero(net.d, h);
  const auto blocks = partition(h, static_cast<int>(target.terms.size()));
  // the half-count plays the role of the width in the k-th order normalization
  const double c = std::pow(static_cast<double>(h), -1.0 / (2.0 * k));
  for (size_t j = 0; j < blocks.size(); ++j) {
    const PolyTerm& t = target.terms[j];
    const NeuronBlock& b = blocks[j];
    const Matrix probes = probes_for(net, cfg, b.count, static_cast<int>(j));
    FitResult fit = fit_feature_coefficients(net, t.alpha, t.beta, t.p - k, probes, cfg.ridge_rel, b);
    for (int i = 0; i < b.count; ++i) {
      const double a = fit.a(i);
      const int r = b.begin + i;
      if (a > 0.0) out.paired.plus.col(r) = c * std::pow(a, 1.0 / k) * t.beta;
      if (a < 0.0) out.paired.minus.col(r) = c * std::pow(-a, 1.0 / k) * t.beta;
    }
    out.fits.push_back(std::move(fit));
  }
  const double nk = norm_2p(out.paired.flat(), 2.0 * k);
  out.norm22k_2k = std::pow(nk, 2.0 * k);
  out.bound = korder_norm_bound(target, k, net.bx);
  return out;
}

nlohmann::json fit_report_json(const std::vector<FitResult>& fits) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& f : fits) {
    nlohmann::json e;
    e["residual"] = f.residual;
    e["msq"] = f.msq;
    e["ridge"] = f.ridge;
    e["condition"] = f.condition;
    e["probes"] = f.probes;
    e["attempts"] = f.attempts;
    arr.push_back(e);
  }
  return arr;
}

}  // namespace taylornet
