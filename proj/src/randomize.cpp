#include "taylornet/randomize.hpp"

#include <cmath>
#include <sstream>

namespace taylornet {

SignDiagonal sample_signs(int m, Rng& rng) {
  if (m < 1) throw std::invalid_argument("sample_signs: m must be >= 1");
  SignDiagonal out;
  out.s.resize(m);
  for (int r = 0; r < m; ++r) out.s(r) = (rng() >> 63) ? 1.0 : -1.0;
  return out;
}

WeightDelta apply_signs(const WeightDelta& w, const SignDiagonal& sigma) {
  if (sigma.size() != w.cols())
    throw std::invalid_argument("apply_signs: sign length " + std::to_string(sigma.size()) +
                                " does not match width " + std::to_string(w.cols()));
  return w * sigma.s.asDiagonal();
}

namespace {

double moment(const std::vector<Atom>& atoms, int j) {
  double acc = 0.0;
  for (const Atom& a : atoms) acc += a.prob * std::pow(a.value, j);
  return acc;
}

// Minimum-norm nonnegative probabilities on a fixed support, or empty on infeasibility.
std::vector<double> solve_support(int k, const std::vector<double>& support) {
  const int s = static_cast<int>(support.size());
  const int nv = 2 * s;
  const int nc = 2 + k;
  Matrix A = Matrix::Zero(nc, nv);
  Vector b = Vector::Zero(nc);
  A.row(0).head(s).setOnes();
  A.row(1).tail(s).setOnes();
  b(0) = b(1) = 1.0;
  for (int j = 1; j <= k; ++j) {
    for (int i = 0; i < s; ++i) {
      const double v = std::pow(support[i], j);
      A(1 + j, i) = v;
      A(1 + j, s + i) = -v;
    }
    b(1 + j) = j == k ? 1.0 : 0.0;
  }

  const Eigen::CompleteOrthogonalDecomposition<Matrix> cod(A);
  const Vector ls = cod.solve(b);
  if ((A * ls - b).norm() > 1e-9) return {};

  // Dykstra alternation between the affine set and the orthant converges to
  // the projection of 0 onto their intersection, i.e. the min-norm point.
  const Matrix pinv = cod.pseudoInverse();
  auto project_affine = [&](const Vector& x) -> Vector { return x - pinv * (A * x - b); };
  Vector x = Vector::Zero(nv), p = Vector::Zero(nv), q = Vector::Zero(nv);
  for (int it = 0; it < 200000; ++it) {
    const Vector y = project_affine(x + p);
    p = x + p - y;
    const Vector xn = (y + q).cwiseMax(0.0);
    q = y + q - xn;
    const double step = (xn - x).norm();
    x = xn;
    if (step < 1e-15 && it > 10) break;
  }
  if ((A * x - b).norm() > 1e-6) return {};

  // Polish: exact min-norm solve restricted to the identified support.
  std::vector<int> active;
  for (int i = 0; i < nv; ++i)
    if (x(i) > 1e-9) active.push_back(i);
  for (int pass = 0; pass < nv && !active.empty(); ++pass) {
    Matrix As(nc, static_cast<Eigen::Index>(active.size()));
    for (size_t c = 0; c < active.size(); ++c) As.col(c) = A.col(active[c]);
    const Eigen::CompleteOrthogonalDecomposition<Matrix> cods(As);
    const Vector ps = cods.solve(b);
    if ((As * ps - b).norm() > 1e-12) break;
    Eigen::Index worst;
    if (ps.minCoeff(&worst) < 0.0) {
      active.erase(active.begin() + worst);
      continue;
    }
    std::vector<double> out(nv, 0.0);
    for (size_t c = 0; c < active.size(); ++c) out[active[c]] = ps(c);
    return out;
  }
  std::vector<double> out(nv);
  for (int i = 0; i < nv; ++i) out[i] = x(i);
  return out;
}

MomentPair solve_pair(int k) {
  std::vector<std::string> tried;
  for (int radius : {2, 3}) {
    std::vector<double> support;
    for (int v = -radius; v <= radius; ++v) support.push_back(v);
    const std::vector<double> probs = solve_support(k, support);
    std::ostringstream name;
    name << "{" << -radius << ".." << radius << "}";
    tried.push_back(name.str());
    if (probs.empty()) continue;
    MomentPair pair;
    pair.k = k;
    const size_t s = support.size();
    for (size_t i = 0; i < s; ++i) {
      if (probs[i] > 0.0) pair.plus.push_back({support[i], probs[i]});
      if (probs[s + i] > 0.0) pair.minus.push_back({support[i], probs[s + i]});
    }
    if (verify_moments(pair).ok) return pair;
  }
  std::string msg = "moment_pair(" + std::to_string(k) + "): infeasible on supports";
  for (const auto& t : tried) msg += " " + t;
  throw std::runtime_error(msg);
}

}  // namespace

MomentPair moment_pair(int k) {
  if (k < 2 || k > 6) throw std::invalid_argument("moment_pair: k must lie in [2, 6], got " + std::to_string(k));
  MomentPair pair;
  pair.k = k;
  if (k == 2) {
    pair.plus = {{1.0, 0.5}, {-1.0, 0.5}};
    pair.minus = {{0.0, 1.0}};
  } else if (k == 3) {
    const double a = (1.0 + std::sqrt(3.0)) / 2.0;
    const double pa = 1.0 / (1.0 + a);
    pair.plus = {{a, pa}, {-1.0, 1.0 - pa}};
    pair.minus = {{-a, pa}, {1.0, 1.0 - pa}};
  } else {
    pair = solve_pair(k);
  }
  const MomentReport rep = verify_moments(pair);
  if (!rep.ok) throw std::runtime_error("moment_pair: certification failed for k=" + std::to_string(k));
  return pair;
}

MomentReport verify_moments(const MomentPair& pair) {
  double worst = 0.0;
  for (const auto* atoms : {&pair.plus, &pair.minus})
    for (const Atom& a : *atoms) worst = std::max(worst, -a.prob);
  worst = std::max(worst, std::abs(moment(pair.plus, 0) - 1.0));
  worst = std::max(worst, std::abs(moment(pair.minus, 0) - 1.0));
  for (int j = 1; j <= pair.k; ++j) {
    const double gap = moment(pair.plus, j) - moment(pair.minus, j);
    worst = std::max(worst, std::abs(gap - (j == pair.k ? 1.0 : 0.0)));
  }
  return {worst, worst <= 1e-10};
}

namespace {

double draw(const std::vector<Atom>& atoms, Rng& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double u = unif(rng);
  double acc = 0.0;
  for (const Atom& a : atoms) {
    acc += a.prob;
    if (u < acc) return a.value;
  }
  return atoms.back().value;
}

}  // namespace

PairScales sample_pair_scales(const MomentPair& pair, int half_m, Rng& rng) {
  if (half_m < 1) throw std::invalid_argument("sample_pair_scales: half_m must be >= 1");
  PairScales out;
  out.zplus.resize(half_m);
  out.zminus.resize(half_m);
  for (int r = 0; r < half_m; ++r) out.zplus(r) = draw(pair.plus, rng);
  for (int r = 0; r < half_m; ++r) out.zminus(r) = draw(pair.minus, rng);
  return out;
}

nlohmann::json moment_pair_to_json(const MomentPair& pair) {
  nlohmann::ordered_json j;
  j["k"] = pair.k;
  auto atoms = [](const std::vector<Atom>& v) {
    nlohmann::json arr = nlohmann::json::array();
    for (const Atom& a : v) arr.push_back({a.value, a.prob});
    return arr;
  };
  j["plus"] = atoms(pair.plus);
  j["minus"] = atoms(pair.minus);
  return j;
}

MomentPair moment_pair_from_json(const nlohmann::json& j) {
  MomentPair pair;
  pair.k = j.at("k").get<int>();
  auto atoms = [](const nlohmann::json& arr) {
    std::vector<Atom> v;
    for (const auto& e : arr) v.push_back({e.at(0).get<double>(), e.at(1).get<double>()});
    return v;
  };
  pair.plus = atoms(j.at("plus"));
  pair.minus = atoms(j.at("minus"));
  return pair;
}

}  // namespace taylornet
