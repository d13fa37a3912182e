#include "taylornet/risk.hpp"

#include <algorithm>
#include <cmath>

namespace taylornet {

void Dataset::validate() const {
  if (x.rows() == 0) throw std::invalid_argument("dataset is empty");
  if (y.size() != x.rows()) throw std::invalid_argument("dataset: label count does not match rows");
  if (!(bx > 0.0)) throw std::invalid_argument("dataset: B_x must be positive");
  check_rows_on_sphere(x, bx);
}

Dataset Dataset::rows(const std::vector<int>& idx) const {
  Dataset out;
  out.bx = bx;
  out.x = x(idx, Eigen::all);
  out.y = y(idx);
  return out;
}

DCache build_dcache(const Network& net, const Dataset& data) {
  const Eigen::ArrayXXd s2 = net.activation.derivative((data.x * net.w0).array(), 2);
  return DCache{(s2.rowwise() * net.a.transpose().array()).matrix()};
}

RiskSpec::RiskSpec(Network net, Dataset data, LossKind loss, double lambda, double opt_reference)
    : loss_(loss), lambda_(lambda), opt_reference_(opt_reference) {
  net.validate_shapes();
  data.validate();
  if (data.d() != net.d) throw std::invalid_argument("risk spec: data dimension does not match network");
  if (std::abs(data.bx - net.bx) > 1e-12 * net.bx) throw std::invalid_argument("risk spec: data B_x differs from network B_x");
  if (!(lambda >= 0.0)) throw std::invalid_argument("risk spec: lambda must be >= 0");
  auto p0 = std::make_shared<Matrix>(data.x * net.w0);
  const Eigen::ArrayXXd s2 = net.activation.derivative(p0->array(), 2);
  dcache_ = std::make_shared<const DCache>(DCache{(s2.rowwise() * net.a.transpose().array()).matrix()});
  preact0_ = std::move(p0);
  net_ = std::make_shared<const Network>(std::move(net));
  data_ = std::make_shared<const Dataset>(std::move(data));
}

RiskSpec RiskSpec::with_lambda(double lambda) const {
  if (!(lambda >= 0.0)) throw std::invalid_argument("risk spec: lambda must be >= 0");
  RiskSpec out = *this;
  out.lambda_ = lambda;
  return out;
}

RiskSpec RiskSpec::with_opt_reference(double opt) const {
  RiskSpec out = *this;
  out.opt_reference_ = opt;
  return out;
}

RiskSpec RiskSpec::with_loss(LossKind loss) const {
  RiskSpec out = *this;
  out.loss_ = loss;
  return out;
}

namespace {

void check_shape(const RiskSpec& spec, const Matrix& w) {
  if (w.rows() != spec.net().d || w.cols() != spec.net().m)
    throw std::invalid_argument("weight matrix shape does not match network");
}

double inv_sqrt_m(const RiskSpec& spec) { return 1.0 / std::sqrt(static_cast<double>(spec.net().m)); }

Vector loss_d1_vec(LossKind loss, const Vector& y, const Vector& f) {
  Vector out(y.size());
  for (Eigen::Index i = 0; i < y.size(); ++i) out(i) = loss_d1(loss, y(i), f(i));
  return out;
}

Vector loss_d2_vec(LossKind loss, const Vector& y, const Vector& f) {
  Vector out(y.size());
  for (Eigen::Index i = 0; i < y.size(); ++i) out(i) = loss_d2(loss, y(i), f(i));
  return out;
}

}  // namespace

double mean_loss(LossKind loss, const Vector& y, const Vector& f) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) acc += loss_value(loss, y(i), f(i));
  return acc / static_cast<double>(y.size());
}

Vector forward_values(const RiskSpec& spec, const WeightDelta& w) {
  check_shape(spec, w);
  const Network& net = spec.net();
  const Eigen::ArrayXXd z = (spec.preact0() + spec.data().x * w).array();
  return net.activation.derivative(z, 0).matrix() * net.a * inv_sqrt_m(spec);
}

Vector fquad_values(const RiskSpec& spec, const WeightDelta& w) {
  check_shape(spec, w);
  const Eigen::ArrayXXd xw = (spec.data().x * w).array();
  return (spec.dcache().d.array() * xw.square()).rowwise().sum().matrix() * (0.5 * inv_sqrt_m(spec));
}

double empirical_risk(const RiskSpec& spec, const WeightDelta& w) {
  return mean_loss(spec.loss(), spec.data().y, forward_values(spec, w));
}

McEstimate randomized_risk_mc(const RiskSpec& spec, const WeightDelta& w, int n_draws, Rng& rng) {
  if (n_draws < 2) throw std::invalid_argument("randomized_risk_mc: n_draws must be >= 2");
  check_shape(spec, w);
  double sum = 0.0, sumsq = 0.0;
  std::vector<double> vals(n_draws);
  for (int t = 0; t < n_draws; ++t) {
    const SignDiagonal s = sample_signs(spec.net().m, rng);
    vals[t] = empirical_risk(spec, apply_signs(w, s));
    sum += vals[t];
  }
  const double mean = sum / n_draws;
  for (double v : vals) sumsq += (v - mean) * (v - mean);
  const double sd = std::sqrt(sumsq / (n_draws - 1));
  return {mean, sd / std::sqrt(static_cast<double>(n_draws))};
}

double clean_risk(const RiskSpec& spec, const WeightDelta& w) {
  return mean_loss(spec.loss(), spec.data().y, fquad_values(spec, w));
}

double clean_risk_matrix_form(const RiskSpec& spec, const WeightDelta& w) {
  check_shape(spec, w);
  const Dataset& data = spec.data();
  const Matrix& dc = spec.dcache().d;
  Vector f(data.n());
  for (int i = 0; i < data.n(); ++i) {
    const Matrix wdw = w * dc.row(i).transpose().asDiagonal() * w.transpose();
    const Vector xi = data.x.row(i).transpose();
    f(i) = xi.dot(wdw * xi) * 0.5 * inv_sqrt_m(spec);
  }
  return mean_loss(spec.loss(), data.y, f);
}

double reg_value(const WeightDelta& w, double lambda) {
  if (!(lambda >= 0.0)) throw std::invalid_argument("reg_value: lambda must be >= 0");
  if (lambda == 0.0) return 0.0;
  const double n4 = norm_2p(w, 4.0);
  const double n4sq = n4 * n4;
  return lambda * n4sq * n4sq * n4sq * n4sq;
}

Matrix reg_grad(const WeightDelta& w, double lambda) {
  if (!(lambda >= 0.0)) throw std::invalid_argument("reg_grad: lambda must be >= 0");
  if (lambda == 0.0) return Matrix::Zero(w.rows(), w.cols());
  const double n4 = norm_2p(w, 4.0);
  const Eigen::RowVectorXd colsq = w.colwise().squaredNorm();
  return (8.0 * lambda * n4 * n4 * n4 * n4) * (w * colsq.asDiagonal());
}

ValueGrad clean_value_grad(const RiskSpec& spec, const WeightDelta& w) {
  check_shape(spec, w);
  const Dataset& data = spec.data();
  const Matrix xw = data.x * w;
  const Vector f = (spec.dcache().d.array() * xw.array().square()).rowwise().sum().matrix() * (0.5 * inv_sqrt_m(spec));
  ValueGrad out;
  out.value = mean_loss(spec.loss(), data.y, f);
  const Vector g = loss_d1_vec(spec.loss(), data.y, f) / static_cast<double>(data.n());
  // column r: (1/sqrt m) sum_i g_i d_ir (x_i^T w_r) x_i
  const Matrix inner = g.asDiagonal() * (spec.dcache().d.array() * xw.array()).matrix();
  out.grad.noalias() = data.x.transpose() * inner * inv_sqrt_m(spec);
  return out;
}

Matrix grad_clean(const RiskSpec& spec, const WeightDelta& w) { return clean_value_grad(spec, w).grad; }

namespace {

// f += sum_r a_r c0 t_r^P and s_r = a_r c0 P t_r^(P-1) over one block of columns, t = relu(z).
template <int P>
void sweep_block(const Matrix& zb, const Vector& a, Eigen::Index c_begin, double c0, int p_rt, Vector& f,
                 Matrix& sprime) {
  const int p = P > 0 ? P : p_rt;
  const double c1 = c0 * p;
  const Eigen::Index nr = zb.rows();
  double* __restrict fp = f.data();
  for (Eigen::Index r = 0; r < zb.cols(); ++r) {
    const double ar = a(c_begin + r);
    const double* __restrict col = zb.col(r).data();
    double* __restrict out = sprime.col(c_begin + r).data();
    for (Eigen::Index i = 0; i < nr; ++i) {
      const double t = col[i] > 0.0 ? col[i] : 0.0;
      double q = 1.0;
      for (int e = 1; e < p; ++e) q *= t;
      fp[i] += ar * c0 * q * t;
      out[i] = ar * c1 * q;
    }
  }
}

}  // namespace

ValueGrad empirical_value_grad(const RiskSpec& spec, const WeightDelta& v, const std::vector<int>* rows) {
  check_shape(spec, v);
  const Network& net = spec.net();
  const Dataset& data = spec.data();
  Matrix xb;
  Vector yb;
  if (rows) {
    xb = data.x(*rows, Eigen::all);
    yb = data.y(*rows);
  }
  const Matrix& xr = rows ? xb : data.x;
  const Vector& yr = rows ? yb : data.y;
  const Eigen::Index nr = xr.rows(), m = v.cols();
  // Preactivations are formed a column block at a time so they stay in cache; only
  // a_r sigma'(z) is kept at full n x m size (reused across calls by training loops).
  thread_local Matrix sprime;
  sprime.resize(nr, m);
  Matrix zb;
  Vector f = Vector::Zero(nr);
  const int p = net.activation.degree();
  const double c0 = net.activation.scale();
  constexpr Eigen::Index kBlock = 128;
  for (Eigen::Index cb = 0; cb < m; cb += kBlock) {
    const Eigen::Index w = std::min(kBlock, m - cb);
    if (rows) {
      zb = spec.preact0()(*rows, Eigen::seqN(cb, w));
    } else {
      zb = spec.preact0().middleCols(cb, w);
    }
    zb.noalias() += xr * v.middleCols(cb, w);
    switch (p) {
      case 2: sweep_block<2>(zb, net.a, cb, c0, p, f, sprime); break;
      case 3: sweep_block<3>(zb, net.a, cb, c0, p, f, sprime); break;
      case 4: sweep_block<4>(zb, net.a, cb, c0, p, f, sprime); break;
      default: sweep_block<0>(zb, net.a, cb, c0, p, f, sprime);
    }
  }
  const double s = inv_sqrt_m(spec);
  f *= s;
  ValueGrad out;
  out.value = mean_loss(spec.loss(), yr, f);
  const Vector g = loss_d1_vec(spec.loss(), yr, f) * (s / static_cast<double>(nr));
  const Matrix xg = g.asDiagonal() * xr;
  out.grad.noalias() = xg.transpose() * sprime;
  return out;
}

Matrix grad_empirical(const RiskSpec& spec, const WeightDelta& w) { return empirical_value_grad(spec, w).grad; }

Matrix grad_randomized_sample(const RiskSpec& spec, const WeightDelta& w, const SignDiagonal& sigma) {
  const WeightDelta v = apply_signs(w, sigma);
  Matrix g = empirical_value_grad(spec, v).grad * sigma.s.asDiagonal();
  g += reg_grad(w, spec.lambda());
  return g;
}

double hessq_clean(const RiskSpec& spec, const WeightDelta& w, const Matrix& u) {
  check_shape(spec, w);
  check_shape(spec, u);
  const Dataset& data = spec.data();
  const Eigen::ArrayXXd& dc = spec.dcache().d.array();
  const Eigen::ArrayXXd xw = (data.x * w).array();
  const Eigen::ArrayXXd xu = (data.x * u).array();
  const double s = 0.5 * inv_sqrt_m(spec);
  const Vector f = (dc * xw.square()).rowwise().sum().matrix() * s;
  const Vector fu = (dc * xu.square()).rowwise().sum().matrix() * s;
  const Vector cross = (dc * xw * xu).rowwise().sum().matrix() * s;
  const Vector l1 = loss_d1_vec(spec.loss(), data.y, f);
  const Vector l2 = loss_d2_vec(spec.loss(), data.y, f);
  const double n = data.n();
  return 2.0 / n * l1.dot(fu) + 4.0 / n * l2.dot(cross.cwiseAbs2());
}

double hessq_clean_sigma_expect(const RiskSpec& spec, const WeightDelta& w, const Matrix& wstar) {
  check_shape(spec, w);
  check_shape(spec, wstar);
  const Dataset& data = spec.data();
  const Eigen::ArrayXXd& dc = spec.dcache().d.array();
  const Eigen::ArrayXXd xw = (data.x * w).array();
  const Eigen::ArrayXXd xs = (data.x * wstar).array();
  const double s = 0.5 * inv_sqrt_m(spec);
  const Vector f = (dc * xw.square()).rowwise().sum().matrix() * s;
  const Vector fstar = (dc * xs.square()).rowwise().sum().matrix() * s;
  const Vector ey2 = (dc.square() * xw.square() * xs.square()).rowwise().sum().matrix() / (4.0 * spec.net().m);
  const Vector l1 = loss_d1_vec(spec.loss(), data.y, f);
  const Vector l2 = loss_d2_vec(spec.loss(), data.y, f);
  const double n = data.n();
  return 2.0 / n * l1.dot(fstar) + 4.0 / n * l2.dot(ey2);
}

}  // namespace taylornet
