#include "tw/slice_problem.hpp"

#include <cmath>

#include "tw/energy.hpp"
#include "tw/errors.hpp"
#include "tw/heteroclinic.hpp"

namespace tw {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

SliceProblem::SliceProblem(const PotentialSpec& pot, SliceFamily minus, SliceFamily plus)
    : pot_(&pot), minus_(std::move(minus)), plus_(std::move(plus)) {
  if (minus_.is_curve || plus_.is_curve)
    fail(ErrorKind::invalid_argument, "SliceProblem: use SliceProblem::curves for curve families");
  k_ = pot.k;
  m_ = k_;
  mass_ = 1.0;
  if (minus_.point.size() != k_ || plus_.point.size() != k_)
    fail(ErrorKind::invalid_argument, "SliceProblem: well dimension mismatch");
}

SliceProblem SliceProblem::curves(const PotentialSpec& pot, SliceFamily minus, SliceFamily plus) {
  if (!minus.is_curve || !plus.is_curve)
    fail(ErrorKind::invalid_argument, "SliceProblem::curves: families must be curves");
  if (minus.rep.n() != plus.rep.n() || minus.rep.grid.L != plus.rep.grid.L || minus.rep.k() != pot.k)
    fail(ErrorKind::invalid_argument, "SliceProblem::curves: representatives live on different grids");
  SliceProblem sp;
  sp.pot_ = &pot;
  sp.minus_ = std::move(minus);
  sp.plus_ = std::move(plus);
  sp.k_ = pot.k;
  sp.m_ = sp.minus_.rep.n() * sp.k_;
  sp.mass_ = sp.minus_.rep.grid.h;
  return sp;
}

double SliceProblem::energy(const double* v) const {
  if (!is_curve()) return pot_->value(v);
  return energy_1d_raw(v, x2().n, k_, x2().h, *pot_);
}

void SliceProblem::gradient(const double* v, double* g) const {
  if (!is_curve()) {
    pot_->gradient(v, g);
    return;
  }
  energy_1d_gradient_raw(v, x2().n, k_, x2().h, *pot_, g);
  for (int i = 0; i < m_; ++i) g[i] *= mass_;
}

bool SliceProblem::pinned(int idx) const {
  if (!is_curve()) return false;
  return idx < k_ || idx >= m_ - k_;
}

Curve1D SliceProblem::as_curve(const double* v) const {
  Curve1D c(x2(), k_, minus_.rep.left, minus_.rep.right);
  std::copy(v, v + m_, c.values.data());
  return c;
}

void SliceProblem::from_curve(const Curve1D& c, double* v) const {
  std::copy(c.values.data(), c.values.data() + m_, v);
}

Vec SliceProblem::representative(Side s) const {
  const SliceFamily& f = family(s);
  if (!is_curve()) return f.point;
  return Eigen::Map<const Vec>(f.rep.values.data(), m_);
}

double SliceProblem::distance(Side s, const double* v, double* tau_hint) const {
  const SliceFamily& f = family(s);
  if (!is_curve()) return (Eigen::Map<const Vec>(v, k_) - f.point).norm();
  const Curve1D c = as_curve(v);
  TranslateProjection p;
  if (tau_hint)
    p = project_nearest_translate_near(c, f.rep, NormKind::L2, *tau_hint,
                                       std::max(2.0, 8.0 * x2().h));
  else
    p = project_nearest_translate(c, f.rep, NormKind::L2);
  if (tau_hint) *tau_hint = p.tau;
  return p.distance;
}

void SliceProblem::nearest(Side s, const double* v, double* out, double* tau_hint) const {
  const SliceFamily& f = family(s);
  if (!is_curve()) {
    Eigen::Map<Vec>(out, k_) = f.point;
    return;
  }
  double tau = tau_hint ? *tau_hint : 0.0;
  distance(s, v, &tau);
  if (tau_hint) *tau_hint = tau;
  from_curve(translate_curve(f.rep, tau), out);
}

bool SliceProblem::retract(Side s, double* v, double radius, double* tau_hint) const {
  const SliceFamily& f = family(s);
  Eigen::Map<Vec> x(v, m_);
  if (!is_curve()) {
    const Vec d = x - f.point;
    const double nd = d.norm();
    if (nd <= radius) return false;
    x = f.point + (radius / nd) * d;
    return true;
  }
  double tau = tau_hint ? *tau_hint : 0.0;
  const Curve1D c = as_curve(v);
  Curve1D center = translate_curve(f.rep, tau);
  double d = l2_distance(c, center);
  if (d <= radius) return false;
  d = distance(s, v, &tau);
  if (tau_hint) *tau_hint = tau;
  if (d <= radius) return false;
  center = translate_curve(f.rep, tau);
  const Eigen::Map<const Vec> cv(center.values.data(), m_);
  x = cv + (radius / d) * (x - cv);
  x.head(k_) = f.rep.left;
  x.tail(k_) = f.rep.right;
  return true;
}

bool SliceProblem::clip(double* v, double r_max) const {
  bool moved = false;
  const int nodes = m_ / k_;
  for (int j = 0; j < nodes; ++j) {
    Eigen::Map<Vec> u(v + j * k_, k_);
    const double nu = u.norm();
    if (nu > r_max) {
      u *= r_max / nu;
      moved = true;
    }
  }
  return moved;
}

double profile_weighted_energy(const SliceProblem& sp, const SliceProfile& P, double c, double t_ref,
                               RMat* grad) {
  const Grid1D& g = P.x1;
  const int n1 = g.n, m = sp.size();
  const double h1 = g.h;
  if (P.U.rows() != n1 || P.U.cols() != m) fail(ErrorKind::invalid_argument, "profile shape mismatch");
  check_weight_range(c, g.L, t_ref);
  const double tail = left_tail_factor(c, h1);
  const double mp = sp.m_plus();
  if (grad) grad->setZero(n1, m);

  double kin = 0.0;
  for (int i = 0; i + 1 < n1; ++i) {
    const double a = sp.mass() * cell_weight(c, g.node(i), h1, t_ref) / h1;
    const auto d = P.U.row(i + 1) - P.U.row(i);
    kin += 0.5 * a * d.squaredNorm();
    if (grad) {
      grad->row(i) -= a * d;
      grad->row(i + 1) += a * d;
    }
  }
  double pot = 0.0;
  std::vector<double> gs(m);
  for (int i = 0; i < n1; ++i) {
    const double w = node_weight(c, g.node(i), t_ref) * (i == 0 ? 1.0 + tail : 1.0);
    const double* v = P.U.row(i).data();
    pot += h1 * w * (sp.energy(v) - mp);
    if (grad) {
      sp.gradient(v, gs.data());
      for (int j = 0; j < m; ++j) (*grad)(i, j) += h1 * w * gs[j];
    }
  }
  if (grad && sp.is_curve()) {
    for (int j = 0; j < m; ++j)
      if (sp.pinned(j)) grad->col(j).setZero();
  }
  return kin + pot;
}

std::vector<double> slice_energies(const SliceProblem& sp, const SliceProfile& P) {
  std::vector<double> e(P.x1.n);
  for (int i = 0; i < P.x1.n; ++i) e[i] = sp.energy(P.U.row(i).data());
  return e;
}

std::vector<double> kinetic_density(const SliceProblem& sp, const SliceProfile& P) {
  const int n = P.x1.n;
  const double h = P.x1.h;
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) {
    Vec d;
    if (i == 0)
      d = (-3.0 * P.U.row(0) + 4.0 * P.U.row(1) - P.U.row(2)).transpose() / (2.0 * h);
    else if (i == n - 1)
      d = (3.0 * P.U.row(n - 1) - 4.0 * P.U.row(n - 2) + P.U.row(n - 3)).transpose() / (2.0 * h);
    else
      d = (P.U.row(i + 1) - P.U.row(i - 1)).transpose() / (2.0 * h);
    out[i] = sp.mass() * d.squaredNorm();
  }
  return out;
}

double kinetic_integral(const SliceProblem& sp, const SliceProfile& P) {
  double s = 0.0;
  for (int i = 0; i + 1 < P.x1.n; ++i) s += (P.U.row(i + 1) - P.U.row(i)).squaredNorm();
  return sp.mass() * s / P.x1.h;
}

SeparablePreconditioner::SeparablePreconditioner(const SliceProblem& sp, const Grid1D& x1, double c,
                                                 double t_ref, double alpha)
    : sp_(&sp), n1_(x1.n) {
  const double h1 = x1.h;
  const double tail = left_tail_factor(c, h1);
  std::vector<double> a(n1_ - 1), w(n1_);
  for (int i = 0; i + 1 < n1_; ++i) a[i] = sp.mass() * cell_weight(c, x1.node(i), h1, t_ref) / h1;
  for (int i = 0; i < n1_; ++i) w[i] = h1 * sp.mass() * node_weight(c, x1.node(i), t_ref) * (i == 0 ? 1.0 + tail : 1.0);

  std::vector<double> lambdas;
  if (sp.is_curve()) {
    const int n2 = sp.x2().n;
    const double h2 = sp.x2().h;
    J_ = n2 - 2;
    Q_.resize(J_, J_);
    const double s = std::sqrt(2.0 / (n2 - 1));
    for (int p = 0; p < J_; ++p)
      for (int j = 0; j < J_; ++j) Q_(p, j) = s * std::sin(kPi * (p + 1) * (j + 1) / (n2 - 1));
    lambdas.resize(J_);
    for (int j = 0; j < J_; ++j)
      lambdas[j] = (2.0 - 2.0 * std::cos(kPi * (j + 1) / (n2 - 1))) / (h2 * h2);
  } else {
    J_ = 1;
    lambdas = {0.0};
  }
  modes_.reserve(J_);
  for (int j = 0; j < J_; ++j) {
    std::vector<double> lo(n1_, 0.0), di(n1_, 0.0), up(n1_, 0.0);
    for (int i = 0; i < n1_; ++i) {
      di[i] = w[i] * (lambdas[j] + alpha);
      if (i > 0) {
        di[i] += a[i - 1];
        lo[i] = -a[i - 1];
      }
      if (i + 1 < n1_) {
        di[i] += a[i];
        up[i] = -a[i];
      }
    }
    modes_.emplace_back(lo, di, up);
  }
}

void SeparablePreconditioner::apply(const RMat& g, RMat& out) const {
  const int k = sp_->k();
  out = g;
  if (!sp_->is_curve()) {
    for (int a = 0; a < k; ++a) modes_[0].solve(out.data() + a, k);
    return;
  }
  Mat X(n1_, J_);
  for (int a = 0; a < k; ++a) {
    for (int i = 0; i < n1_; ++i)
      for (int p = 0; p < J_; ++p) X(i, p) = g(i, (p + 1) * k + a);
    Mat Y = X * Q_;
    for (int j = 0; j < J_; ++j) modes_[j].solve(Y.col(j).data(), 1);
    X.noalias() = Y * Q_;
    for (int i = 0; i < n1_; ++i)
      for (int p = 0; p < J_; ++p) out(i, (p + 1) * k + a) = X(i, p);
  }
  for (int i = 0; i < n1_; ++i) {
    for (int a = 0; a < k; ++a) {
      out(i, a) = 0.0;
      out(i, sp_->size() - k + a) = 0.0;
    }
  }
}

}  // namespace tw
