#include "tw/heteroclinic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tw/energy.hpp"
#include "tw/errors.hpp"
#include "tw/linalg.hpp"
#include "tw/optim.hpp"

namespace tw {

const char* to_string(HeteroclinicKind kind) {
  return kind == HeteroclinicKind::global ? "global" : "local";
}

namespace {

constexpr double kPi = 3.14159265358979323846;

Vec flatten(const Curve1D& c) { return Eigen::Map<const Vec>(c.values.data(), c.values.size()); }

void unflatten(const Vec& x, Curve1D& c) {
  Eigen::Map<Vec>(c.values.data(), c.values.size()) = x;
}

// Preconditioner (1/h)(-D2) + h*shift on interior nodes, identity on the ends.
TridiagonalSolver curve_preconditioner(int n, double h, double shift) {
  std::vector<double> lo(n, 0.0), di(n, 1.0), up(n, 0.0);
  for (int i = 1; i + 1 < n; ++i) {
    di[i] = 2.0 / h + h * shift;
    lo[i] = (i > 1) ? -1.0 / h : 0.0;
    up[i] = (i + 2 < n) ? -1.0 / h : 0.0;
  }
  return TridiagonalSolver(lo, di, up);
}

Objective curve_objective(const PotentialSpec& pot, int n, int k, double h,
                          const TridiagonalSolver& pre) {
  Objective obj;
  obj.value = [&pot, n, k, h](const Vec& x) { return energy_1d_raw(x.data(), n, k, h, pot); };
  obj.value_and_gradient = [&pot, n, k, h](const Vec& x, Vec& g) {
    g.resize(x.size());
    energy_1d_gradient_raw(x.data(), n, k, h, pot, g.data());
    g *= h;
    return energy_1d_raw(x.data(), n, k, h, pot);
  };
  obj.precondition = [&pre, k](const Vec& g, Vec& out) {
    out = g;
    for (int a = 0; a < k; ++a) pre.solve(out.data() + a, k);
  };
  return obj;
}

double interior_grad_norm(const Curve1D& q, const PotentialSpec& pot) {
  const RMat g = energy_1d_gradient(q, pot);
  return g.size() ? g.cwiseAbs().maxCoeff() : 0.0;
}

void check_ends(const Curve1D& c, const WellPair& w) {
  const double tol = 1e-6;
  if ((c.values.row(0).transpose() - w.sigma_minus).norm() > tol ||
      (c.values.row(c.n() - 1).transpose() - w.sigma_plus).norm() > tol)
    fail(ErrorKind::invalid_argument, "heteroclinic init does not connect the requested wells");
}

}  // namespace

double midpoint_crossing(const Curve1D& q) {
  const Vec mid = 0.5 * (q.left + q.right);
  const Vec dir = q.right - q.left;
  if (dir.norm() == 0.0) fail(ErrorKind::invalid_argument, "no crossing: identical wells");
  auto f = [&](int i) { return (q.values.row(i).transpose() - mid).dot(dir); };
  double prev = f(0);
  for (int i = 1; i < q.n(); ++i) {
    const double cur = f(i);
    if (prev < 0.0 && cur >= 0.0) {
      const double s = prev / (prev - cur);
      return q.grid.node(i - 1) + s * q.grid.h;
    }
    prev = cur;
  }
  fail(ErrorKind::convergence, "no crossing");
}

Curve1D fix_phase(const Curve1D& q) {
  const double t0 = midpoint_crossing(q);
  if (std::abs(t0) >= q.grid.L) fail(ErrorKind::convergence, "no crossing");
  return translate_curve(q, t0);
}

HeteroclinicResult minimize_heteroclinic(const PotentialSpec& pot, const WellPair& wells,
                                         const Curve1D& init, double tol,
                                         const HeteroclinicOptions& opts) {
  check_ends(init, wells);
  const int n = init.n(), k = init.k();
  const double h = init.grid.h;
  Curve1D q = init;
  q.left = wells.sigma_minus;
  q.right = wells.sigma_plus;
  q.values.row(0) = wells.sigma_minus.transpose();
  q.values.row(n - 1) = wells.sigma_plus.transpose();

  const TridiagonalSolver pre = curve_preconditioner(n, h, opts.precond_shift);
  Objective obj = curve_objective(pot, n, k, h, pre);
  MinimizeOptions mo;
  mo.max_iter = opts.max_iter;
  mo.grad_tol = tol;
  mo.max_step = opts.max_step;
  mo.grad_scale = Vec::Constant(n * k, 1.0 / h);

  int total = 0;
  for (int pass = 0; pass < 2; ++pass) {
    Vec x = flatten(q);
    const MinimizeReport rep = minimize_lbfgs(obj, x, mo);
    total += rep.iterations;
    unflatten(x, q);
    if (!rep.converged)
      fail(ErrorKind::convergence, "max iterations (heteroclinic, gradient " +
                                       std::to_string(rep.grad_norm) + ")");
    const double t0 = midpoint_crossing(q);
    if (std::abs(t0) > 0.9 * q.grid.L) fail(ErrorKind::convergence, "escaped to well");
    if (pass == 0) {
      q = fix_phase(q);
      q.values.row(0) = wells.sigma_minus.transpose();
      q.values.row(n - 1) = wells.sigma_plus.transpose();
    }
  }

  HeteroclinicResult r;
  r.curve = q;
  r.energy = energy_1d(q, pot);
  r.kind = HeteroclinicKind::global;
  r.gradient_norm = interior_grad_norm(q, pot);
  r.iterations = total;
  return r;
}

HeteroclinicResult minimize_local_heteroclinic(const PotentialSpec& pot,
                                               const HeteroclinicResult& anchor, double radius,
                                               double tol, const HeteroclinicOptions& opts) {
  if (!(radius > 0.0)) fail(ErrorKind::invalid_argument, "local heteroclinic: radius must be positive");
  const Curve1D& rep = anchor.curve;
  const int n = rep.n(), k = rep.k();
  const double h = rep.grid.h;
  const TridiagonalSolver pre = curve_preconditioner(n, h, opts.precond_shift);
  Objective obj = curve_objective(pot, n, k, h, pre);

  double tau_hint = 0.0;
  Curve1D work = rep;
  auto distance_at = [&](const Vec& x, TranslateProjection& pr) {
    unflatten(x, work);
    pr = project_nearest_translate_near(work, rep, NormKind::H1, tau_hint, 4.0 * h + 1.0);
    tau_hint = pr.tau;
  };
  obj.project = [&](Vec& x) {
    TranslateProjection pr;
    distance_at(x, pr);
    if (pr.distance <= radius) return false;
    const Curve1D qt = translate_curve(rep, pr.tau);
    const Vec center = flatten(qt);
    x = center + (radius / pr.distance) * (x - center);
    x.head(k) = rep.left;
    x.tail(k) = rep.right;
    return true;
  };

  MinimizeOptions mo;
  mo.max_iter = opts.max_iter;
  mo.grad_tol = tol;
  mo.step_tol = tol;
  mo.max_step = opts.max_step;
  mo.grad_scale = Vec::Constant(n * k, 1.0 / h);

  Vec x = flatten(rep);
  const MinimizeReport mr = minimize_lbfgs(obj, x, mo);
  Curve1D q = rep;
  unflatten(x, q);
  if (!mr.converged) fail(ErrorKind::convergence, "max iterations (local heteroclinic)");

  const TranslateProjection fin =
      project_nearest_translate_near(q, rep, NormKind::H1, tau_hint, 4.0 * h + 1.0);
  HeteroclinicResult r;
  r.kind = HeteroclinicKind::local;
  r.constraint_distance = fin.distance;
  r.constraint_active = fin.distance >= 0.98 * radius;
  if (r.constraint_active) fail(ErrorKind::convergence, "constraint saturated");
  r.curve = std::abs(midpoint_crossing(q)) > 0.5 * h ? fix_phase(q) : q;
  r.curve.values.row(0) = rep.left.transpose();
  r.curve.values.row(n - 1) = rep.right.transpose();
  r.energy = energy_1d(r.curve, pot);
  r.gradient_norm = interior_grad_norm(r.curve, pot);
  r.iterations = mr.iterations;
  return r;
}

namespace {

double translate_distance(const Curve1D& q, const Curve1D& rep, NormKind norm, double tau) {
  const Curve1D t = translate_curve(rep, tau);
  return norm == NormKind::L2 ? l2_distance(q, t) : h1_distance(q, t);
}

TranslateProjection scan_and_refine(const Curve1D& q, const Curve1D& rep, NormKind norm, double lo,
                                    double hi, double step, bool* at_edge) {
  const int m = std::max(3, static_cast<int>(std::ceil((hi - lo) / step)) + 1);
  const double ds = (hi - lo) / (m - 1);
  std::vector<double> d(m);
  for (int i = 0; i < m; ++i) d[i] = translate_distance(q, rep, norm, lo + i * ds);
  const int best = static_cast<int>(std::min_element(d.begin(), d.end()) - d.begin());
  *at_edge = (best == 0 || best == m - 1) && d[best] > 0.0;

  TranslateProjection out;
  for (int i = 1; i + 1 < m; ++i) {
    if (std::abs(i - best) <= 2) continue;
    if (d[i] <= d[i - 1] && d[i] <= d[i + 1] && d[i] <= 1.01 * d[best] + 1e-14) out.ambiguous = true;
  }
  double a = lo + std::max(best - 1, 0) * ds;
  double b = lo + std::min(best + 1, m - 1) * ds;
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
  double f1 = translate_distance(q, rep, norm, x1), f2 = translate_distance(q, rep, norm, x2);
  for (int it = 0; it < 80 && (b - a) > 1e-9 * std::max(1.0, std::abs(a)); ++it) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - gr * (b - a);
      f1 = translate_distance(q, rep, norm, x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + gr * (b - a);
      f2 = translate_distance(q, rep, norm, x2);
    }
  }
  out.tau = f1 < f2 ? x1 : x2;
  out.distance = std::min(f1, f2);
  if (d[best] < out.distance) {
    out.tau = lo + best * ds;
    out.distance = d[best];
  }
  return out;
}

}  // namespace

TranslateProjection project_nearest_translate(const Curve1D& q, const Curve1D& rep, NormKind norm) {
  if (q.n() != rep.n() || q.k() != rep.k())
    fail(ErrorKind::invalid_argument, "project_nearest_translate: grid mismatch");
  const double L = q.grid.L;
  const double step = std::max(q.grid.h, L / 256.0);
  bool edge = false;
  TranslateProjection p = scan_and_refine(q, rep, norm, -0.5 * L, 0.5 * L, step, &edge);
  if (edge) fail(ErrorKind::convergence, "bracket failure");
  return p;
}

TranslateProjection project_nearest_translate_near(const Curve1D& q, const Curve1D& rep,
                                                   NormKind norm, double hint, double half_width) {
  const double L = q.grid.L;
  double hw = half_width;
  for (int attempt = 0; attempt < 4; ++attempt) {
    const double lo = std::max(hint - hw, -0.9 * L), hi = std::min(hint + hw, 0.9 * L);
    bool edge = false;
    TranslateProjection p =
        scan_and_refine(q, rep, norm, lo, hi, std::max(q.grid.h, (hi - lo) / 64.0), &edge);
    if (!edge) return p;
    hint = p.tau;
    hw *= 4.0;
  }
  fail(ErrorKind::convergence, "bracket failure");
}

Curve1D clip_to_ball(const Curve1D& q, double r_max) {
  if (!(r_max > 0.0)) fail(ErrorKind::invalid_argument, "clip_to_ball: radius must be positive");
  Curve1D out = q;
  for (int i = 0; i < q.n(); ++i) {
    const double nrm = out.values.row(i).norm();
    if (nrm > r_max) out.values.row(i) *= r_max / nrm;
  }
  return out;
}

Curve1D tanh_init(const Grid1D& g, const Vec& sm, const Vec& sp, double width) {
  Curve1D c(g, static_cast<int>(sm.size()), sm, sp);
  for (int i = 0; i < g.n; ++i) {
    const double s = 0.5 * (1.0 + std::tanh(g.node(i) / width));
    c.values.row(i) = ((1.0 - s) * sm + s * sp).transpose();
  }
  c.values.row(0) = sm.transpose();
  c.values.row(g.n - 1) = sp.transpose();
  return c;
}

Curve1D gl_arc_init(const Grid1D& g, int sign, double radius, double width) {
  Vec sm(2), sp(2);
  sm << -1.0, 0.0;
  sp << 1.0, 0.0;
  Curve1D c(g, 2, sm, sp);
  for (int i = 0; i < g.n; ++i) {
    const double th = std::tanh(g.node(i) / width);
    const double theta = 0.5 * kPi * (1.0 + th);
    const double r = radius + (1.0 - radius) * th * th;
    c.values(i, 0) = -r * std::cos(theta);
    c.values(i, 1) = sign * r * std::sin(theta);
  }
  c.values.row(0) = sm.transpose();
  c.values.row(g.n - 1) = sp.transpose();
  return c;
}

Curve1D zs_init(const Grid1D& g, int s2, int s3, double amplitude, double width) {
  Vec sm = Vec::Zero(3), sp = Vec::Zero(3);
  sm[0] = -1.0;
  sp[0] = 1.0;
  Curve1D c(g, 3, sm, sp);
  for (int i = 0; i < g.n; ++i) {
    const double t = g.node(i) / width;
    const double sech = 1.0 / std::cosh(t);
    c.values(i, 0) = std::tanh(t);
    c.values(i, 1) = s2 * amplitude * sech * sech;
    c.values(i, 2) = s3 * amplitude * sech * sech;
  }
  c.values.row(0) = sm.transpose();
  c.values.row(g.n - 1) = sp.transpose();
  return c;
}

Curve1D gl_competitor(const Grid1D& g, double T) {
  if (!(T > 0.0)) fail(ErrorKind::invalid_argument, "gl_competitor: T must be positive");
  Vec sm(2), sp(2);
  sm << -1.0, 0.0;
  sp << 1.0, 0.0;
  Curve1D c(g, 2, sm, sp);
  const double rho = std::tanh(T / std::sqrt(2.0));  // |q_AC(T)|
  for (int i = 0; i < g.n; ++i) {
    const double t = g.node(i);
    double u1 = 0.0, u2 = 0.0;
    if (t <= -T - 1.0) {
      u1 = -1.0;
    } else if (t <= -T) {
      u1 = (t + T) - (t + T + 1.0) * rho;
    } else if (t <= T) {
      const double th = kPi * (t + T) / (2.0 * T);
      u1 = -rho * std::cos(th);
      u2 = -rho * std::sin(th);
    } else if (t <= T + 1.0) {
      u1 = (t - T) - (t - T - 1.0) * rho;
    } else {
      u1 = 1.0;
    }
    c.values(i, 0) = u1;
    c.values(i, 1) = u2;
  }
  return c;
}

}  // namespace tw
