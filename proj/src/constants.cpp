#include "tw/constants.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

#include "tw/energy.hpp"
#include "tw/errors.hpp"
#include "tw/linalg.hpp"
#include "tw/optim.hpp"

namespace tw {

namespace {

double l2_norm(const SliceProblem& sp, const Vec& v) { return std::sqrt(sp.mass()) * v.norm(); }

double min_hess_eig(const PotentialSpec& pot, const double* u) {
  const int k = pot.k;
  Mat H(k, k);
  std::vector<double> h(k * k);
  pot.hessian(u, h.data());
  for (int a = 0; a < k; ++a)
    for (int b = 0; b < k; ++b) H(a, b) = h[a * k + b];
  if (k == 1) return H(0, 0);
  Eigen::SelfAdjointEigenSolver<Mat> es(H, Eigen::EigenvaluesOnly);
  return es.eigenvalues()[0];
}

double golden_min(const std::function<double(double)>& f, double a, double b, double* fmin) {
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
  double f1 = f(x1), f2 = f(x2);
  for (int it = 0; it < 80 && b - a > 1e-10; ++it) {
    if (f1 < f2) {
      b = x2, x2 = x1, f2 = f1;
      x1 = b - gr * (b - a);
      f1 = f(x1);
    } else {
      a = x1, x1 = x2, f1 = f2;
      x2 = a + gr * (b - a);
      f2 = f(x2);
    }
  }
  *fmin = std::min(f1, f2);
  return f1 < f2 ? x1 : x2;
}

double curve_separation(const Curve1D& a, const Curve1D& b) {
  const double L = a.grid.L;
  const double step = std::max(a.grid.h, L / 512.0);
  const int m = static_cast<int>(std::ceil(L / step)) + 1;
  const double ds = L / (m - 1);
  auto f = [&](double tau) { return l2_distance(a, translate_curve(b, tau)); };
  int best = 0;
  double fb = std::numeric_limits<double>::infinity();
  for (int i = 0; i < m; ++i) {
    const double v = f(-0.5 * L + i * ds);
    if (v < fb) fb = v, best = i;
  }
  double fr = fb;
  golden_min(f, -0.5 * L + std::max(best - 1, 0) * ds, -0.5 * L + std::min(best + 1, m - 1) * ds, &fr);
  return std::min(fb, fr);
}

// Tridiagonal (1/h)(-D2) + h on interior nodes, identity on the pinned ends.
TridiagonalSolver slice_preconditioner(int n, double h) {
  std::vector<double> lo(n, 0.0), di(n, 1.0), up(n, 0.0);
  for (int i = 1; i + 1 < n; ++i) {
    di[i] = 2.0 / h + h;
    lo[i] = (i > 1) ? -1.0 / h : 0.0;
    up[i] = (i + 2 < n) ? -1.0 / h : 0.0;
  }
  return TridiagonalSolver(lo, di, up);
}

double h1_family_distance(const SliceProblem& sp, Side s, const Vec& v) {
  if (!sp.is_curve()) return (v - sp.family(s).point).norm();
  const Curve1D c = sp.as_curve(v.data());
  try {
    return project_nearest_translate(c, sp.family(s).rep, NormKind::H1).distance;
  } catch (const Error&) {
    return std::numeric_limits<double>::infinity();
  }
}

double l2_family_distance(const SliceProblem& sp, Side s, const Vec& v) {
  try {
    return sp.distance(s, v.data());
  } catch (const Error&) {
    return std::numeric_limits<double>::infinity();
  }
}

unsigned sub_seed(unsigned seed, int tag, double r) {
  return seed ^ (static_cast<unsigned>(tag) * 0x9e3779b9u) ^ static_cast<unsigned>(std::llround(r * 1e9));
}

}  // namespace

double family_separation(const SliceProblem& sp) {
  if (!sp.is_curve()) return (sp.family(Side::minus).point - sp.family(Side::plus).point).norm();
  return curve_separation(sp.family(Side::minus).rep, sp.family(Side::plus).rep);
}

double compute_d0(const HeteroclinicResult& q_minus, const HeteroclinicResult& q_plus,
                  double rho0_minus, double rho0_plus) {
  if (q_minus.curve.n() != q_plus.curve.n() || q_minus.curve.k() != q_plus.curve.k())
    fail(ErrorKind::invalid_argument, "compute_d0: grid mismatch");
  const double d = curve_separation(q_minus.curve, q_plus.curve) - 0.5 * (rho0_minus + rho0_plus);
  if (d <= 0.0) fail(ErrorKind::assumption, "families overlap");
  return d;
}

double compute_d0(const SliceProblem& sp, double rho0_minus, double rho0_plus) {
  const double d = family_separation(sp) - 0.5 * (rho0_minus + rho0_plus);
  if (d <= 0.0) fail(ErrorKind::assumption, "families overlap");
  return d;
}

Vec random_slice_perturbation(const SliceProblem& sp, Side s, std::mt19937_64& rng, double norm) {
  std::normal_distribution<double> gauss;
  const int k = sp.k();
  if (!sp.is_curve()) {
    Vec d(k);
    for (int a = 0; a < k; ++a) d[a] = gauss(rng);
    return norm * d / d.norm();
  }
  const Curve1D& rep = sp.family(s).rep;
  const Grid1D& g = rep.grid;
  const int n = g.n;
  const double sep = (rep.right - rep.left).norm();
  int first = -1, last = -1;
  for (int i = 0; i < n; ++i) {
    const Vec u = rep.values.row(i).transpose();
    if (std::min((u - rep.left).norm(), (u - rep.right).norm()) > 0.05 * sep) {
      if (first < 0) first = i;
      last = i;
    }
  }
  double ta = -0.25 * g.L, tb = 0.25 * g.L;
  if (first >= 0 && last > first) ta = g.node(first), tb = g.node(last);
  std::uniform_real_distribution<double> uc(ta, tb), uw(0.05, 0.3);

  RMat phi = RMat::Zero(n, k);
  for (int b = 0; b < 3; ++b) {
    const double c = uc(rng);
    const double w = (tb - ta) * uw(rng) + 2.0 * g.h;
    Vec coef(k);
    for (int a = 0; a < k; ++a) coef[a] = gauss(rng);
    for (int i = 1; i + 1 < n; ++i) {
      const double z = (g.node(i) - c) / w;
      phi.row(i) += std::exp(-0.5 * z * z) * coef.transpose();
    }
  }
  const RMat dq = central_difference(rep);
  double pd = 0.0, dd = 0.0;
  for (int i = 1; i + 1 < n; ++i) {
    pd += phi.row(i).dot(dq.row(i));
    dd += dq.row(i).squaredNorm();
  }
  if (dd > 0.0)
    for (int i = 1; i + 1 < n; ++i) phi.row(i) -= (pd / dd) * dq.row(i);
  phi.row(0).setZero();
  phi.row(n - 1).setZero();
  Vec v = Eigen::Map<const Vec>(phi.data(), phi.size());
  const double nv = l2_norm(sp, v);
  return nv > 0.0 ? Vec(norm * v / nv) : v;
}

double estimate_rho0(const SliceProblem& sp, Side s, const LedgerOptions& opts) {
  const double sep = family_separation(sp);
  const double cap = 0.45 * sep;
  if (!sp.is_curve()) {
    const PotentialSpec& pot = sp.potential();
    const Vec& sigma = sp.family(s).point;
    const int k = sp.k();
    std::mt19937_64 rng(sub_seed(opts.seed, 1, s == Side::minus ? 0.0 : 1.0));
    std::normal_distribution<double> gauss;
    std::vector<Vec> dirs;
    if (k == 1) {
      dirs = {Vec::Ones(1), -Vec::Ones(1)};
    } else {
      for (int j = 0; j < 64; ++j) {
        Vec d(k);
        for (int a = 0; a < k; ++a) d[a] = gauss(rng);
        dirs.push_back(d / d.norm());
      }
    }
    const int steps = 4000;
    double radius = cap;
    for (const Vec& d : dirs) {
      for (int j = 1; j <= steps; ++j) {
        const double r = cap * j / steps;
        const Vec u = sigma + r * d;
        if (min_hess_eig(pot, u.data()) <= 0.0) {
          radius = std::min(radius, cap * (j - 1) / steps);
          break;
        }
      }
    }
    if (radius <= 0.0) fail(ErrorKind::assumption, "capture radius: D^2V not positive definite at the well");
    return radius;
  }

  const Curve1D& rep = sp.family(s).rep;
  std::mt19937_64 rng(sub_seed(opts.seed, 2, s == Side::minus ? 0.0 : 1.0));
  for (int j = 0; j < 16; ++j) {
    const double r = cap * std::ldexp(1.0, -j);
    bool ok = true;
    for (int t = 0; t < opts.rho_trials && ok; ++t) {
      const Vec v = sp.representative(s) + random_slice_perturbation(sp, s, rng, r);
      try {
        const TranslateProjection p = project_nearest_translate(sp.as_curve(v.data()), rep, NormKind::L2);
        if (p.ambiguous) ok = false;
      } catch (const Error&) {
        ok = false;
      }
    }
    if (ok) return r;
  }
  fail(ErrorKind::assumption, "capture radius: nearest translate ambiguous at every sampled radius");
}

void spectral_inputs(const SliceProblem& sp, Side s, double* lambda, double* hess_neg) {
  const PotentialSpec& pot = sp.potential();
  if (!sp.is_curve()) {
    *lambda = min_hess_eig(pot, sp.family(s).point.data());
    *hess_neg = 0.0;
    return;
  }
  const Curve1D& rep = sp.family(s).rep;
  const SpectralReport r = spectral_report(rep, pot, 3);
  *lambda = r.gap;
  double m = 0.0;
  for (int i = 0; i < rep.n(); ++i) m = std::max(m, -min_hess_eig(pot, rep.row(i)));
  *hess_neg = m;
}

double estimate_beta(bool is_curve, double lambda, double hess_neg) {
  if (lambda <= 0.0) fail(ErrorKind::assumption, "beta: spectral gap not positive");
  if (!is_curve) return 2.0 / lambda;
  return 2.0 * (1.0 + (1.0 + hess_neg) / lambda);
}

namespace {

double e_r_impl(const SliceProblem& sp, Side s, double r, double rho0, const LedgerOptions& opts,
                Vec* argmin) {
  if (!(r > 0.0 && r <= rho0)) fail(ErrorKind::invalid_argument, "e_r: need 0 < r <= rho0");
  const int m = sp.size();
  const int k = sp.k();
  const Vec rep = sp.representative(s);
  TridiagonalSolver pre;
  if (sp.is_curve()) pre = slice_preconditioner(sp.x2().n, sp.x2().h);

  double tau = 0.0;
  Vec center(m);
  auto shell = [&](Vec& v) {
    const double d = sp.distance(s, v.data(), sp.is_curve() ? &tau : nullptr);
    if (d >= r && d <= rho0) return false;
    if (d > rho0) return sp.retract(s, v.data(), rho0, &tau);
    sp.nearest(s, v.data(), center.data(), sp.is_curve() ? &tau : nullptr);
    if (d < 1e-14) return false;
    v = center + (r / d) * (v - center);
    return true;
  };

  Objective obj;
  obj.value = [&](const Vec& x) { return sp.energy(x.data()); };
  obj.value_and_gradient = [&](const Vec& x, Vec& g) {
    g.resize(m);
    sp.gradient(x.data(), g.data());
    return sp.energy(x.data());
  };
  if (sp.is_curve())
    obj.precondition = [&](const Vec& g, Vec& out) {
      out = g;
      for (int a = 0; a < k; ++a) pre.solve(out.data() + a, k);
    };
  obj.project = shell;

  MinimizeOptions mo;
  mo.max_iter = opts.max_iter;
  mo.step_tol = opts.tol;
  mo.f_rel_tol = 1e-11;
  mo.stall_window = 100;

  std::mt19937_64 rng(sub_seed(opts.seed, 3 + (s == Side::plus), r));
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < std::max(1, opts.e_r_starts); ++i) {
    const double amp = (i % 2 == 0) ? r : 0.5 * (r + rho0);
    Vec x = rep + random_slice_perturbation(sp, s, rng, amp);
    tau = 0.0;
    shell(x);
    minimize_lbfgs(obj, x, mo);
    shell(x);
    const double e = sp.energy(x.data());
    if (e < best) {
      best = e;
      if (argmin) *argmin = x;
    }
  }
  if (!std::isfinite(best)) fail(ErrorKind::convergence, "no feasible start");
  return best;
}

NuEstimate nu_impl(const SliceProblem& sp, Side s, double r, double rho0, const LedgerOptions& opts,
                   const std::vector<Vec>& directions) {
  const Vec rep = sp.representative(s);
  const double level = sp.family(s).level;
  std::mt19937_64 rng(sub_seed(opts.seed, 5 + (s == Side::plus), r));
  std::uniform_real_distribution<double> u01(0.0, 1.0);

  std::vector<Vec> samples;
  for (int i = 0; i < opts.nu_samples; ++i) {
    const double amp = 0.5 * rho0 * std::pow(10.0, -3.0 * u01(rng));
    samples.push_back(rep + random_slice_perturbation(sp, s, rng, amp));
  }
  for (const Vec& d : directions) {
    const double nd = l2_norm(sp, d);
    if (nd <= 0.0) continue;
    for (int j = 0; j < 12; ++j) samples.push_back(rep + (0.5 * rho0 * std::pow(10.0, -3.0 * j / 11.0) / nd) * d);
  }

  NuEstimate out;
  double emax = 0.0;
  for (const Vec& v : samples) {
    if (l2_family_distance(sp, s, v) > 0.5 * rho0) continue;
    const double e = sp.energy(v.data()) - level;
    emax = std::max(emax, e);
    if (h1_family_distance(sp, s, v) > r) out.worst_energy = std::min(out.worst_energy, e);
  }
  if (emax <= 0.0) emax = 1.0;
  const int levels = 60;
  for (int j = 0; j <= levels; ++j) {
    const double eps = emax * std::ldexp(1.0, -j);
    if (eps < out.worst_energy) {
      out.value = eps;
      return out;
    }
  }
  out.value = emax * std::ldexp(1.0, -levels);
  out.conservative = true;
  return out;
}

}  // namespace

double estimate_e_r(const SliceProblem& sp, Side s, double r, double rho0, const LedgerOptions& opts) {
  return e_r_impl(sp, s, r, rho0, opts, nullptr);
}

NuEstimate estimate_nu(const SliceProblem& sp, Side s, double r, double rho0, const LedgerOptions& opts) {
  if (!(r > 0.0 && r <= rho0)) fail(ErrorKind::invalid_argument, "nu: need 0 < r <= rho0");
  return nu_impl(sp, s, r, rho0, opts, {});
}

bool check_sublevel(const SliceProblem& sp, double rho0_minus, const LedgerOptions& opts,
                    std::vector<std::string>* notes) {
  const double mplus = sp.m_plus();
  std::mt19937_64 rng(sub_seed(opts.seed, 7, rho0_minus));
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const Vec qm = sp.representative(Side::minus);
  const Vec qp = sp.representative(Side::plus);
  const double sep = family_separation(sp);

  std::vector<Vec> cands;
  for (int j = 1; j < 40; ++j) {
    const double t = j / 40.0;
    cands.push_back((1.0 - t) * qm + t * qp);
  }
  const int tries = 20 * std::max(1, opts.sublevel_samples);
  for (int i = 0; i < tries; ++i) {
    const double amp = 2.0 * rho0_minus * u01(rng);
    if (!sp.is_curve() && sp.k() > 1) {
      // Uniform samples in a ball around the segment between the wells.
      cands.push_back(qm + u01(rng) * (qp - qm) + random_slice_perturbation(sp, Side::minus, rng, sep * u01(rng)));
    } else {
      cands.push_back(qm + random_slice_perturbation(sp, Side::minus, rng, amp));
    }
  }
  if (!sp.is_curve() && sp.k() == 1) {
    for (int j = -200; j <= 400; ++j) {
      Vec u = qm + (j / 200.0) * (qp - qm);
      cands.push_back(u);
    }
  }

  int used = 0, bad = 0;
  double worst = 0.0;
  for (const Vec& v : cands) {
    if (used >= opts.sublevel_samples && sp.is_curve()) break;
    if (!(sp.energy(v.data()) < mplus)) continue;
    ++used;
    const double d = l2_family_distance(sp, Side::minus, v);
    if (d > 0.5 * rho0_minus) {
      ++bad;
      worst = std::max(worst, d);
    }
  }
  if (notes) {
    notes->push_back("sublevel check: " + std::to_string(used) + " samples with E < m+, " +
                     std::to_string(bad) + " outside rho0-/2 (worst distance " + std::to_string(worst) + ")");
  }
  return bad == 0;
}

ConstantsLedger compute_ledger(const SliceProblem& sp, const LedgerOptions& opts) {
  ConstantsLedger L;
  L.protocol = opts;
  L.m_minus = sp.m_minus();
  L.m_plus = sp.m_plus();
  L.gap = L.m_plus - L.m_minus;

  L.rho0_minus = opts.rho0_minus > 0.0 ? opts.rho0_minus : estimate_rho0(sp, Side::minus, opts);
  L.rho0_plus = opts.rho0_plus > 0.0 ? opts.rho0_plus : estimate_rho0(sp, Side::plus, opts);
  L.d0 = compute_d0(sp, L.rho0_minus, L.rho0_plus);

  spectral_inputs(sp, Side::minus, &L.lambda_minus, &L.hess_neg_minus);
  spectral_inputs(sp, Side::plus, &L.lambda_plus, &L.hess_neg_plus);
  L.beta_minus = estimate_beta(sp.is_curve(), L.lambda_minus, L.hess_neg_minus);
  L.beta_plus = estimate_beta(sp.is_curve(), L.lambda_plus, L.hess_neg_plus);
  auto bar = [](double b) { return 0.5 * b * b * (b * b + (b + 1.0) * (b + 1.0)); };
  L.beta_bar_minus = bar(L.beta_minus);
  L.beta_bar_plus = bar(L.beta_plus);
  L.mu_minus = 1.0 / (L.beta_minus + L.beta_bar_minus);

  // Shared recipe for both sides: radius rho0/4, the delta/eta radius, the
  // r-hat radius and the resulting bound before the safety factor.
  auto side_bound = [&](Side s, double rho0, double beta, double level, std::map<double, double>& e_tab,
                        std::map<double, double>& nu_tab, double* small_radius, double* r_hat) {
    const std::string tag = s == Side::minus ? "minus" : "plus";
    std::vector<Vec> dirs;
    Vec arg;
    const Vec rep = sp.representative(s);
    const double r4 = 0.25 * rho0;
    const double e4 = e_r_impl(sp, s, r4, rho0, opts, &arg);
    e_tab[r4] = e4;
    dirs.push_back(arg - rep);
    if (!(e4 > level))
      fail(ErrorKind::assumption, "e_r estimate at rho0/4 (" + tag + ") not above the family level");
    *small_radius = std::min(std::sqrt(std::exp(-1.0) * r4 * std::sqrt(2.0 * (e4 - level))), r4);
    *r_hat = rho0 / (beta + 1.0);
    const double es = e_r_impl(sp, s, *small_radius, rho0, opts, &arg);
    e_tab[*small_radius] = es;
    dirs.push_back(arg - rep);
    const NuEstimate n1 = nu_impl(sp, s, *r_hat, rho0, opts, dirs);
    const NuEstimate n2 = nu_impl(sp, s, *small_radius, rho0, opts, dirs);
    nu_tab[*r_hat] = n1.value;
    nu_tab[*small_radius] = n2.value;
    if (n1.conservative || n2.conservative) {
      L.nu_conservative = true;
      L.notes.push_back("nu sweep (" + tag + ") hit its floor; value is conservative");
    }
    const double terms = std::min({0.25 * (*small_radius) * (*small_radius), es - level, n1.value, n2.value});
    if (!(terms > 0.0)) fail(ErrorKind::assumption, "E_max (" + tag + ") not positive");
    return terms / (beta * beta * (beta + 1.0));
  };

  L.E_max_raw = side_bound(Side::minus, L.rho0_minus, L.beta_minus, L.m_minus, L.e_r_minus, L.nu_minus,
                           &L.delta0_minus, &L.r_frak_minus);
  L.E_max = opts.safety * L.E_max_raw;
  L.E_max_plus = opts.safety * side_bound(Side::plus, L.rho0_plus, L.beta_plus, L.m_plus, L.e_r_plus,
                                          L.nu_plus, &L.eta0_plus, &L.r_hat_plus);
  const double a = L.m_minus - L.m_plus;
  L.alpha_star = std::min(L.E_max_plus, L.E_max + a);

  L.sublevel_ok = check_sublevel(sp, L.rho0_minus, opts, &L.notes);
  L.notes.push_back("e_r values are upper estimates (best feasible slice found)");
  return L;
}

AssumptionReport check_assumptions(const ConstantsLedger& L) {
  AssumptionReport r;
  r.sublevel_ok = L.sublevel_ok;
  r.perturbation_margin = L.E_max > 0.0 ? L.gap / L.E_max : std::numeric_limits<double>::infinity();
  r.perturbation_ok = L.gap > 0.0 && L.gap < L.E_max && L.sublevel_ok;
  const double thr = 0.5 * (L.mu_minus * L.d0) * (L.mu_minus * L.d0);
  r.convergence_margin = thr > 0.0 ? L.gap / thr : std::numeric_limits<double>::infinity();
  r.convergence_ok = r.perturbation_ok && L.gap < thr;
  if (!(L.gap > 0.0)) r.notes.push_back("energy gap not positive");
  if (L.gap >= L.E_max) r.notes.push_back("energy gap not below E_max");
  if (!L.sublevel_ok) r.notes.push_back("sublevel set {E < m+} leaves the rho0-/2 neighbourhood");
  if (L.gap >= thr) r.notes.push_back("energy gap not below (mu- d0)^2/2");
  return r;
}

double transition_time_bound(const ConstantsLedger& L, double c) {
  if (!(c > 0.0)) fail(ErrorKind::invalid_argument, "transition time bound needs c > 0");
  if (L.alpha_star <= 0.0) return std::numeric_limits<double>::infinity();
  const double a = L.m_minus - L.m_plus;
  return std::log(-a / L.alpha_star + 1.0) / c;
}

CompetitorCheck check_gl_competitor(const Grid1D& g, const std::vector<double>& Ts) {
  const PotentialSpec gl = make_ginzburg_landau();
  CompetitorCheck out;
  out.T = Ts;
  for (double T : Ts) {
    out.energy.push_back(energy_1d(gl_competitor(g, T), gl));
    if (T == 10.0) out.energy_at_10 = out.energy.back();
  }
  out.decreasing = true;
  for (std::size_t i = 1; i < out.energy.size(); ++i)
    if (!(out.energy[i] < out.energy[i - 1])) out.decreasing = false;
  if (std::find(Ts.begin(), Ts.end(), 10.0) == Ts.end())
    out.energy_at_10 = energy_1d(gl_competitor(g, 10.0), gl);
  out.below_ac = out.energy_at_10 < 2.0 * std::sqrt(2.0) / 3.0;
  return out;
}

}  // namespace tw
