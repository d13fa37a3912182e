#include "taylornet/optimize.hpp"

#include <cmath>
#include <deque>
#include <limits>
#include <numeric>
#include <sstream>

namespace taylornet {

void OptConfig::validate() const {
  if (!(eta >= 0.0) || !std::isfinite(eta)) throw std::invalid_argument("opt config: eta must be finite and >= 0");
  if (T < 1) throw std::invalid_argument("opt config: T must be >= 1");
  if (!(perturb_radius >= 0.0)) throw std::invalid_argument("opt config: perturb_radius must be >= 0");
  if (perturb_cooldown < 0 || perturb_window < 1) throw std::invalid_argument("opt config: bad perturbation schedule");
  if (!(lambda >= 0.0)) throw std::invalid_argument("opt config: lambda must be >= 0");
  if (batch < 0) throw std::invalid_argument("opt config: batch must be >= 0");
  if (record_every < 1) throw std::invalid_argument("opt config: record_every must be >= 1");
  if (!(ridge >= 0.0)) throw std::invalid_argument("opt config: ridge must be >= 0");
}

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Uniform sample from the ball of radius rho in R^{rows x cols}.
Matrix ball_sample(Eigen::Index rows, Eigen::Index cols, double rho, Rng& rng) {
  Matrix g = gaussian_matrix(rows, cols, rng);
  const double n = g.norm();
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double radius = rho * std::pow(unif(rng), 1.0 / static_cast<double>(rows * cols));
  return n > 0.0 ? Matrix(g * (radius / n)) : g;
}

class Kicker {
 public:
  explicit Kicker(const OptConfig& cfg) : cfg_(cfg) {}

  // Records the gradient norm; returns true when a kick is due.
  bool observe(int step, double grad_norm) {
    window_.push_back(grad_norm);
    if (static_cast<int>(window_.size()) > cfg_.perturb_window) window_.pop_front();
    if (cfg_.perturb_radius <= 0.0) return false;
    const double avg = std::accumulate(window_.begin(), window_.end(), 0.0) / window_.size();
    if (avg >= cfg_.perturb_trigger) return false;
    if (last_ >= 0 && step - last_ < cfg_.perturb_cooldown) return false;
    last_ = step;
    window_.clear();
    return true;
  }

 private:
  const OptConfig& cfg_;
  std::deque<double> window_;
  int last_ = -1;
};

void check_finite(const WeightDelta& w, double value, int step, double eta) {
  if (!w.allFinite() || !std::isfinite(value)) {
    const double norm = w.allFinite() ? w.norm() : std::numeric_limits<double>::infinity();
    std::ostringstream os;
    os << "numerical abort at step " << step << ": non-finite iterate or objective (|W|_F = " << norm
       << ", eta = " << eta << ")";
    throw NumericalAbort(os.str(), step, norm, eta);
  }
}

std::vector<int> sample_batch(int n, int b, Rng& rng) {
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  for (int i = 0; i < b; ++i) {
    std::uniform_int_distribution<int> pick(i, n - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  idx.resize(b);
  return idx;
}

bool record_due(int step, const OptConfig& cfg) { return step % cfg.record_every == 0 || step == cfg.T; }

}  // namespace

Trajectory noisy_sgd(const RiskSpec& spec, const OptConfig& cfg) {
  cfg.validate();
  const Network& net = spec.net();
  const int n = spec.data().n();
  const bool minibatch = cfg.batch > 0 && cfg.batch < n;
  Rng rng(cfg.seed);
  Trajectory traj;
  traj.lambda = cfg.lambda;
  traj.w = WeightDelta::Zero(net.d, net.m);
  WeightDelta& w = traj.w;
  Kicker kicker(cfg);

  {
    TrajRecord rec;
    rec.step = 0;
    rec.randomized_risk = empirical_risk(spec, w);
    rec.clean_risk = clean_risk(spec, w);
    rec.norm24 = 0.0;
    rec.grad_norm = kNaN;
    rec.objective = rec.randomized_risk;
    traj.records.push_back(rec);
  }

  double loss_acc = 0.0;
  int loss_count = 0;
  for (int t = 1; t <= cfg.T; ++t) {
    const SignDiagonal sigma = sample_signs(net.m, rng);
    std::vector<int> rows;
    if (minibatch) rows = sample_batch(n, cfg.batch, rng);
    const ValueGrad vg = empirical_value_grad(spec, apply_signs(w, sigma), minibatch ? &rows : nullptr);
    Matrix g = vg.grad * sigma.s.asDiagonal();
    if (cfg.lambda > 0.0) g += reg_grad(w, cfg.lambda);
    const double gn = g.norm();
    w.noalias() -= cfg.eta * g;
    check_finite(w, vg.value, t, cfg.eta);
    if (kicker.observe(t, gn)) {
      w += ball_sample(net.d, net.m, cfg.perturb_radius, rng);
      traj.kicks.push_back(t);
    }
    loss_acc += vg.value;
    ++loss_count;
    if (record_due(t, cfg)) {
      TrajRecord rec;
      rec.step = t;
      rec.randomized_risk = loss_acc / loss_count;
      rec.clean_risk = clean_risk(spec, w);
      rec.norm24 = norm_2p(w, 4.0);
      rec.grad_norm = gn;
      rec.objective = rec.randomized_risk + reg_value(w, cfg.lambda);
      traj.records.push_back(rec);
      loss_acc = 0.0;
      loss_count = 0;
    }
  }
  return traj;
}

Trajectory train_clean(const RiskSpec& spec, const OptConfig& cfg) {
  cfg.validate();
  const Network& net = spec.net();
  Rng rng(cfg.seed);
  Trajectory traj;
  traj.lambda = cfg.lambda;
  traj.w = WeightDelta::Zero(net.d, net.m);
  WeightDelta& w = traj.w;
  Kicker kicker(cfg);

  ValueGrad vg = clean_value_grad(spec, w);
  for (int t = 0; t <= cfg.T; ++t) {
    if (t > 0) {
      Matrix g = vg.grad;
      if (cfg.lambda > 0.0) g += reg_grad(w, cfg.lambda);
      const double gn = g.norm();
      w.noalias() -= cfg.eta * g;
      if (kicker.observe(t, gn)) {
        w += ball_sample(net.d, net.m, cfg.perturb_radius, rng);
        traj.kicks.push_back(t);
      }
      vg = clean_value_grad(spec, w);
      check_finite(w, vg.value, t, cfg.eta);
    } else if (kicker.observe(0, vg.grad.norm())) {
      // W = 0 is stationary for L^Q; the escape kick is what gets training going
      w += ball_sample(net.d, net.m, cfg.perturb_radius, rng);
      traj.kicks.push_back(0);
      vg = clean_value_grad(spec, w);
    }
    if (record_due(t, cfg)) {
      TrajRecord rec;
      rec.step = t;
      rec.randomized_risk = kNaN;
      rec.clean_risk = vg.value;
      rec.norm24 = norm_2p(w, 4.0);
      Matrix g = vg.grad;
      if (cfg.lambda > 0.0) g += reg_grad(w, cfg.lambda);
      rec.grad_norm = g.norm();
      rec.objective = vg.value + reg_value(w, cfg.lambda);
      traj.records.push_back(rec);
    }
  }
  return traj;
}

Matrix ntk_cross_gram(const RiskSpec& spec, const Matrix& x_other) {
  const Network& net = spec.net();
  const Eigen::ArrayXXd s_train = net.activation.derivative(spec.preact0().array(), 1);
  const Eigen::ArrayXXd s_other = net.activation.derivative((x_other * net.w0).array(), 1);
  const Matrix ss = s_other.matrix() * s_train.matrix().transpose();
  const Matrix xx = x_other * spec.data().x.transpose();
  return ss.cwiseProduct(xx) / static_cast<double>(net.m);
}

Matrix ntk_gram(const RiskSpec& spec) {
  const Network& net = spec.net();
  const Matrix s = net.activation.derivative(spec.preact0().array(), 1).matrix();
  Matrix ss = Matrix::Zero(s.rows(), s.rows());
  ss.selfadjointView<Eigen::Lower>().rankUpdate(s);
  ss = ss.selfadjointView<Eigen::Lower>();
  const Matrix xx = spec.data().x * spec.data().x.transpose();
  return ss.cwiseProduct(xx) / static_cast<double>(net.m);
}

WeightDelta ntk_primal(const RiskSpec& spec, const Vector& c) {
  const Network& net = spec.net();
  Eigen::ArrayXXd s = net.activation.derivative(spec.preact0().array(), 1);
  s.colwise() *= c.array();
  s.rowwise() *= net.a.transpose().array();
  return spec.data().x.transpose() * s.matrix() / std::sqrt(static_cast<double>(net.m));
}

double ntk_safe_eta(const RiskSpec& spec, double ridge) {
  const Matrix k = ntk_gram(spec);
  const Eigen::SelfAdjointEigenSolver<Matrix> es(k, Eigen::EigenvaluesOnly);
  const double lmax = es.eigenvalues().maxCoeff() / spec.data().n();
  const double ymax = spec.data().y.cwiseAbs().maxCoeff();
  const double smooth = lmax * loss_d2_sup(spec.loss(), ymax) + 2.0 * ridge;
  return smooth > 0.0 ? 1.0 / smooth : 1.0;
}

// Gradient descent on W -> (1/n) sum ell(y_i, f_lin(W, x_i)) + ridge ||W||_F^2 from W = 0.
// Every iterate stays in span{phi(x_i)}, so it is run on the dual coefficients:
// W = sum_i c_i phi(x_i), f_lin(W, x_j) = (K c)_j, grad = sum_i (ell'_i / n + 2 ridge c_i) phi(x_i).
Trajectory train_linear_ntk(const RiskSpec& spec, const OptConfig& cfg) {
  cfg.validate();
  const Dataset& data = spec.data();
  const int n = data.n();
  const Matrix k = ntk_gram(spec);
  Vector c = Vector::Zero(n);
  Trajectory traj;
  traj.lambda = 0.0;
  for (int t = 0; t <= cfg.T; ++t) {
    const Vector f = k * c;
    Vector g(n);
    double loss = 0.0;
    for (int i = 0; i < n; ++i) {
      g(i) = loss_d1(spec.loss(), data.y(i), f(i)) / n + 2.0 * cfg.ridge * c(i);
      loss += loss_value(spec.loss(), data.y(i), f(i));
    }
    loss = loss / n + cfg.ridge * c.dot(f);
    check_finite(WeightDelta(c), loss, t, cfg.eta);
    if (record_due(t, cfg)) {
      const WeightDelta w = ntk_primal(spec, c);
      TrajRecord rec;
      rec.step = t;
      rec.randomized_risk = kNaN;
      rec.clean_risk = clean_risk(spec, w);
      rec.norm24 = norm_2p(w, 4.0);
      rec.grad_norm = std::sqrt(std::max(0.0, g.dot(k * g)));
      rec.objective = loss;
      traj.records.push_back(rec);
    }
    if (t < cfg.T) c -= cfg.eta * g;
  }
  traj.w = ntk_primal(spec, c);
  return traj;
}

std::string trajectory_csv_header() { return "step,randomized_risk,clean_risk,norm24,gradnorm,objective"; }

std::string trajectory_csv(const Trajectory& traj) {
  std::ostringstream os;
  os.precision(17);
  os << trajectory_csv_header() << '\n';
  for (const auto& r : traj.records)
    os << r.step << ',' << r.randomized_risk << ',' << r.clean_risk << ',' << r.norm24 << ',' << r.grad_norm << ','
       << r.objective << '\n';
  return os.str();
}

}  // namespace taylornet
