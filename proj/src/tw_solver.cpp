#include "tw/tw_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tw/energy.hpp"
#include "tw/errors.hpp"
#include "tw/optim.hpp"

namespace tw {

namespace {

double rep_radius(const SliceProblem& sp) {
  double r = 0.0;
  for (Side s : {Side::minus, Side::plus}) {
    const Vec v = sp.representative(s);
    for (int j = 0; j < v.size() / sp.k(); ++j) r = std::max(r, v.segment(j * sp.k(), sp.k()).norm());
  }
  return r;
}

double safe_distance(const SliceProblem& sp, Side s, const double* v, double* hint) {
  try {
    return sp.distance(s, v, hint);
  } catch (const Error&) {
  }
  try {
    return sp.distance(s, v, nullptr);
  } catch (const Error&) {
    return std::numeric_limits<double>::infinity();
  }
}

// Central difference of row i (one-sided second order at the ends).
Vec row_derivative(const RMat& U, int i, double h) {
  const int n = static_cast<int>(U.rows());
  if (i == 0) return (-3.0 * U.row(0) + 4.0 * U.row(1) - U.row(2)).transpose() / (2.0 * h);
  if (i == n - 1) return (3.0 * U.row(n - 1) - 4.0 * U.row(n - 2) + U.row(n - 3)).transpose() / (2.0 * h);
  return (U.row(i + 1) - U.row(i - 1)).transpose() / (2.0 * h);
}

}  // namespace

ConstraintSpec make_constraints(const SliceProblem& sp, const ConstantsLedger& L, double T) {
  ConstraintSpec cs;
  cs.T = T;
  cs.r_minus = 0.5 * L.rho0_minus;
  cs.r_plus = 0.5 * L.rho0_plus;
  cs.r_max = std::max(sp.potential().growth_radius, rep_radius(sp));
  return cs;
}

SliceProfile psi_init(const SliceProblem& sp, const Grid1D& x1, double center) {
  const Vec vm = sp.representative(Side::minus);
  const Vec vp = sp.representative(Side::plus);
  SliceProfile P{x1, RMat(x1.n, sp.size())};
  for (int i = 0; i < x1.n; ++i) {
    const double s = std::clamp(0.5 * (x1.node(i) - center + 1.0), 0.0, 1.0);
    P.U.row(i) = ((1.0 - s) * vm + s * vp).transpose();
  }
  return P;
}

SliceScan scan_slices(const SliceProblem& sp, const SliceProfile& P) {
  SliceScan s;
  const int n = P.x1.n;
  s.x1.resize(n);
  s.energy.resize(n);
  s.dist_minus.resize(n);
  s.dist_plus.resize(n);
  double hm = 0.0, hp = 0.0;
  for (int i = 0; i < n; ++i) {
    const double* v = P.U.row(i).data();
    s.x1[i] = P.x1.node(i);
    s.energy[i] = sp.energy(v) - sp.m_plus();
    s.dist_minus[i] = safe_distance(sp, Side::minus, v, sp.is_curve() ? &hm : nullptr);
    s.dist_plus[i] = safe_distance(sp, Side::plus, v, sp.is_curve() ? &hp : nullptr);
  }
  return s;
}

double front_position(const SliceScan& s) {
  const int n = static_cast<int>(s.x1.size());
  double prev = s.dist_minus[0] - s.dist_plus[0];
  if (prev >= 0.0) return s.x1[0];
  for (int i = 1; i < n; ++i) {
    const double cur = s.dist_minus[i] - s.dist_plus[i];
    if (cur >= 0.0) {
      const double th = prev / (prev - cur);
      return s.x1[i - 1] + th * (s.x1[i] - s.x1[i - 1]);
    }
    prev = cur;
  }
  return s.x1.back();
}

ConstrainedMinimum minimize_constrained(const SliceProblem& sp, const SliceProfile& init, double c,
                                        const ConstraintSpec& cs, const SolverOptions& opts) {
  const Grid1D& g = init.x1;
  const int n1 = g.n, m = sp.size();
  if (!(c > 0.0)) fail(ErrorKind::invalid_argument, "minimize_constrained: c must be positive");
  if (!(cs.T >= 0.0 && cs.T < g.L)) fail(ErrorKind::invalid_argument, "minimize_constrained: need T < L1");
  if (init.U.rows() != n1 || init.U.cols() != m)
    fail(ErrorKind::invalid_argument, "minimize_constrained: profile shape mismatch");

  std::vector<double> tau_m(n1, 0.0), tau_p(n1, 0.0);

  int i0 = -1;
  Vec e_pin, mid_pin;
  if (opts.pin_front) {
    i0 = static_cast<int>(std::lround((opts.pin_at + g.L) / g.h));
    if (i0 < 1 || i0 > n1 - 2 || std::abs(g.node(i0)) >= cs.T)
      fail(ErrorKind::invalid_argument, "minimize_constrained: pin must lie strictly inside (-T, T)");
    const Vec vm = sp.representative(Side::minus);
    const Vec vp = sp.representative(Side::plus);
    e_pin = (vp - vm).normalized();
    mid_pin = 0.5 * (vm + vp);
  }
  auto pin = [&](double* row) {
    Eigen::Map<Vec> v(row, m);
    v -= (v - mid_pin).dot(e_pin) * e_pin;
  };

  auto project = [&](Vec& x) {
    bool moved = false;
    for (int i = 0; i < n1; ++i) {
      double* v = x.data() + static_cast<std::size_t>(i) * m;
      if (cs.r_max > 0.0) moved |= sp.clip(v, cs.r_max);
      const double t = g.node(i);
      if (t <= -cs.T) moved |= sp.retract(Side::minus, v, cs.r_minus, &tau_m[i]);
      if (t >= cs.T) moved |= sp.retract(Side::plus, v, cs.r_plus, &tau_p[i]);
    }
    return moved;
  };

  Vec x = Eigen::Map<const Vec>(init.U.data(), init.U.size());
  if (!x.allFinite()) fail(ErrorKind::invalid_argument, "infeasible init");
  project(x);
  if (i0 >= 0) pin(x.data() + static_cast<std::size_t>(i0) * m);

  SliceProfile work{g, Eigen::Map<const RMat>(x.data(), n1, m)};
  const double t_ref0 = i0 >= 0 ? g.node(i0) : front_position(scan_slices(sp, work));
  const SeparablePreconditioner pre(sp, g, c, t_ref0, opts.precond_alpha);
  RMat grad, out;

  // The pinned slice enters through a linear reparametrization (its component
  // along e_pin is replaced by the hyperplane value), so L-BFGS sees an
  // unconstrained problem there and keeps its memory.
  auto load = [&](const Vec& v) {
    work.U = Eigen::Map<const RMat>(v.data(), n1, m);
    if (i0 >= 0) pin(work.U.row(i0).data());
  };
  Objective obj;
  obj.value = [&](const Vec& v) {
    load(v);
    return profile_weighted_energy(sp, work, c, t_ref0);
  };
  obj.value_and_gradient = [&](const Vec& v, Vec& gv) {
    load(v);
    const double f = profile_weighted_energy(sp, work, c, t_ref0, &grad);
    if (i0 >= 0) {
      Eigen::Map<Vec> gr(grad.row(i0).data(), m);
      gr -= gr.dot(e_pin) * e_pin;
    }
    gv = Eigen::Map<const Vec>(grad.data(), grad.size());
    return f;
  };
  obj.precondition = [&](const Vec& gv, Vec& o) {
    pre.apply(Eigen::Map<const RMat>(gv.data(), n1, m), out);
    o = Eigen::Map<const Vec>(out.data(), out.size());
  };
  obj.project = project;
  // Without the pin the front may sit anywhere left of T, and anchoring at T
  // is the conservative choice for certifying a negative value.
  const double early_scale = i0 >= 0 ? 1.0 : std::exp(c * (t_ref0 - cs.T));
  if (opts.early_exit)
    obj.monitor = [&](const Vec&, double f, int) { return f * early_scale < -opts.classify_tol; };

  MinimizeOptions mo;
  mo.max_iter = opts.max_iter;
  mo.memory = opts.memory;
  mo.step_tol = opts.tol;
  mo.max_step = opts.max_step;
  const MinimizeReport rep = minimize_lbfgs(obj, x, mo);
  if (i0 >= 0) pin(x.data() + static_cast<std::size_t>(i0) * m);

  ConstrainedMinimum res;
  res.c = c;
  res.T = cs.T;
  res.profile = SliceProfile{g, Eigen::Map<const RMat>(x.data(), n1, m)};
  res.iterations = rep.iterations;
  res.step_norm = rep.step_norm;
  res.converged = rep.converged;
  res.stopped_early = rep.stopped_by_monitor;
  res.reason = rep.reason;
  const SliceScan scan = scan_slices(sp, res.profile);
  res.front = front_position(scan);
  res.t_ref = res.front;
  res.energy = profile_weighted_energy(sp, res.profile, c, res.t_ref);
  for (int i = 0; i < n1; ++i) {
    if (g.node(i) <= -cs.T && scan.dist_minus[i] >= (1.0 - 1e-3) * cs.r_minus) res.active_minus = true;
    if (g.node(i) >= cs.T && scan.dist_plus[i] >= (1.0 - 1e-3) * cs.r_plus) res.active_plus = true;
  }
  return res;
}

EntryTimes entry_times(const SliceProblem& sp, const SliceProfile& P, const ConstantsLedger& L) {
  const SliceScan s = scan_slices(sp, P);
  const double a = L.m_minus - L.m_plus;
  EntryTimes et;
  const int n = static_cast<int>(s.x1.size());
  for (int i = 0; i < n; ++i)
    if (s.energy[i] <= a + L.E_max && s.dist_minus[i] <= 0.5 * L.rho0_minus) et.i_minus = i;
  for (int i = 0; i < n; ++i) {
    if (s.energy[i] <= L.E_max_plus && s.dist_plus[i] <= 0.5 * L.rho0_plus) {
      et.i_plus = i;
      break;
    }
  }
  if (et.i_minus < 0 || et.i_plus < 0) fail(ErrorKind::assumption, "undefined entry time");
  et.t_minus = s.x1[et.i_minus];
  et.t_plus = s.x1[et.i_plus];
  return et;
}

OscillationReport no_oscillation_check(const SliceProblem& sp, const SliceProfile& P,
                                       const ConstantsLedger& L) {
  const EntryTimes et = entry_times(sp, P, L);
  const SliceScan s = scan_slices(sp, P);
  const int n = static_cast<int>(s.x1.size());
  OscillationReport r;
  r.minus_ok = r.plus_ok = r.positivity_ok = true;
  for (int i = 0; i <= et.i_minus; ++i) {
    if (!(s.dist_minus[i] < 0.5 * L.rho0_minus)) r.minus_ok = false;
    if (i < et.i_minus && s.dist_minus[i] >= 0.5 * L.rho0_minus && s.dist_minus[i] <= L.rho0_minus)
      r.bad_minus = i;
  }
  for (int i = n - 1; i >= et.i_plus; --i) {
    if (!(s.dist_plus[i] < 0.5 * L.rho0_plus)) r.plus_ok = false;
    if (i > et.i_plus && s.dist_plus[i] >= 0.5 * L.rho0_plus && s.dist_plus[i] <= L.rho0_plus)
      r.bad_plus = i;
  }
  for (int i = et.i_minus + 1; i < n; ++i)
    if (s.energy[i] < -1e-12) r.positivity_ok = false;
  r.ok = r.minus_ok && r.plus_ok && r.positivity_ok;
  return r;
}

Surgery competitor_moves(const SliceProblem& sp, const SliceProfile& P, const ConstantsLedger& L,
                         double c, double t_ref) {
  const OscillationReport osc = no_oscillation_check(sp, P, L);
  const EntryTimes et = entry_times(sp, P, L);
  const SliceScan s = scan_slices(sp, P);
  const Grid1D& g = P.x1;
  const int n = g.n, m = sp.size();
  const int one = std::max(1, static_cast<int>(std::lround(1.0 / g.h)));
  const double a = L.m_minus - L.m_plus;

  Surgery out;
  out.profile = P;
  RMat& U = out.profile.U;
  Vec v(m);
  auto lerp_row = [&](int i, const Vec& from, const Vec& to, double lam) {
    U.row(i) = ((1.0 - lam) * from + lam * to).transpose();
  };

  if (osc.bad_minus >= 0) {
    int tt = -1;
    for (int i = 0; i <= et.i_minus; ++i)
      if (s.dist_minus[i] >= 0.5 * L.rho0_minus) tt = i;
    int i0 = et.i_minus;
    for (int i = tt; i <= et.i_minus; ++i) {
      if (s.energy[i] <= a + L.E_max && s.dist_minus[i] <= L.delta0_minus) {
        i0 = i;
        break;
      }
    }
    double hint = 0.0;
    sp.nearest(Side::minus, P.U.row(i0).data(), v.data(), sp.is_curve() ? &hint : nullptr);
    const Vec u0 = P.U.row(i0).transpose();
    if (i0 <= tt + one) {
      out.kind = "minus-hold-splice";
      for (int i = 0; i < i0; ++i) {
        if (i <= i0 - one)
          U.row(i) = v.transpose();
        else
          lerp_row(i, v, u0, static_cast<double>(i - (i0 - one)) / one);
      }
    } else {
      out.kind = "minus-hold-plateau";
      for (int i = 0; i < i0; ++i) {
        if (i <= tt)
          U.row(i) = v.transpose();
        else if (i <= tt + one)
          lerp_row(i, v, u0, static_cast<double>(i - tt) / one);
        else
          U.row(i) = u0.transpose();
      }
    }
  } else if (osc.bad_plus >= 0) {
    out.kind = "plus-freeze";
    double hint = 0.0;
    const int ip = et.i_plus;
    sp.nearest(Side::plus, P.U.row(ip).data(), v.data(), sp.is_curve() ? &hint : nullptr);
    const Vec u0 = P.U.row(ip).transpose();
    for (int i = ip + 1; i < n; ++i) {
      if (i < ip + one)
        lerp_row(i, u0, v, static_cast<double>(i - ip) / one);
      else
        U.row(i) = v.transpose();
    }
  } else {
    fail(ErrorKind::invalid_argument, "not applicable");
  }
  out.energy_before = profile_weighted_energy(sp, P, c, t_ref);
  out.energy_after = profile_weighted_energy(sp, out.profile, c, t_ref);
  out.margin = out.energy_before - out.energy_after;
  return out;
}

const char* to_string(SpeedClass s) { return s == SpeedClass::below ? "below" : "at_or_above"; }

double schedule_T0(const SpeedProblem& pb, double c) {
  if (pb.T0 > 0.0) return pb.T0;
  const double cap = std::max(1.0, pb.T_cap_fraction * pb.x1.L);
  const double ts = transition_time_bound(pb.ledger, c);
  return std::min(std::max(1.0, 2.0 * ts), cap);
}

Classification classify_speed(const SpeedProblem& pb, double c) {
  const SliceProblem& sp = *pb.sp;
  SolverOptions o = pb.opts;
  o.early_exit = true;
  const ConstraintSpec cs = make_constraints(sp, pb.ledger, schedule_T0(pb, c));
  Classification out;
  out.minimum = minimize_constrained(sp, psi_init(sp, pb.x1), c, cs, o);
  out.cls = out.minimum.energy < -o.classify_tol ? SpeedClass::below : SpeedClass::at_or_above;
  return out;
}

SpeedSearchResult find_speed(const SpeedProblem& pb, double lo, double hi, double tol_c) {
  if (!(lo > 0.0 && hi > lo)) fail(ErrorKind::invalid_argument, "find_speed: need 0 < lo < hi");
  if (!(tol_c > 0.0)) fail(ErrorKind::invalid_argument, "find_speed: tol_c must be positive");
  SpeedSearchResult res;
  auto probe = [&](double c) {
    const Classification cl = classify_speed(pb, c);
    res.probes.push_back({c, cl.cls, cl.minimum.energy, cl.minimum.iterations, cl.minimum.converged});
    if (!cl.minimum.converged && !cl.minimum.stopped_early)
      res.notes.push_back("probe c=" + std::to_string(c) + " stopped without convergence (" +
                          cl.minimum.reason + ")");
    return cl.cls;
  };

  int expand = 0;
  bool hi_known = false;
  while (probe(lo) != SpeedClass::below) {
    if (++expand > 6) fail(ErrorKind::convergence, "bracket not found");
    hi = lo;
    hi_known = true;
    lo *= 0.5;
  }
  expand = 0;
  while (!hi_known && probe(hi) == SpeedClass::below) {
    if (++expand > 6) fail(ErrorKind::convergence, "bracket not found");
    lo = hi;
    hi *= 2.0;
  }
  while (hi - lo > tol_c) {
    const double mid = 0.5 * (lo + hi);
    if (probe(mid) == SpeedClass::below)
      lo = mid;
    else
      hi = mid;
  }
  res.c_lo = lo;
  res.c_hi = hi;
  res.c_star = 0.5 * (lo + hi);

  const SliceProblem& sp = *pb.sp;
  SolverOptions o = pb.opts;
  o.early_exit = false;
  const double T0 = schedule_T0(pb, res.c_star);
  for (int j = 0; j < 3; ++j) {
    const double T = std::min(T0 * std::ldexp(1.0, j), 0.8 * pb.x1.L);
    if (!res.T_tried.empty() && T <= res.T_tried.back()) break;
    res.T_tried.push_back(T);
    res.final_min = minimize_constrained(sp, psi_init(sp, pb.x1), res.c_star,
                                         make_constraints(sp, pb.ledger, T), o);
    if (!res.final_min.active_minus && !res.final_min.active_plus) {
      res.unconstrained = true;
      break;
    }
  }
  if (!res.unconstrained)
    res.notes.push_back("constraints never released (largest T tried " + std::to_string(res.T_tried.back()) + ")");
  if (!res.final_min.converged)
    res.notes.push_back("final solve stopped without convergence (" + res.final_min.reason + ")");
  res.formula_speed = formula_speed(sp, res.final_min.profile);
  res.residual = profile_residual(sp, res.final_min.profile, res.c_star);
  return res;
}

double formula_speed(const SliceProblem& sp, const SliceProfile& P) {
  const double k = kinetic_integral(sp, P);
  if (!(k > 0.0)) fail(ErrorKind::invalid_argument, "formula speed: profile has no x1 variation");
  return (sp.m_plus() - sp.m_minus()) / k;
}

double profile_residual(const SliceProblem& sp, const SliceProfile& P, double c) {
  const int k = sp.k();
  if (!sp.is_curve()) {
    Curve1D u(P.x1, k, sp.family(Side::minus).point, sp.family(Side::plus).point);
    u.values = P.U;
    return profile_residual_1d(u, c, sp.potential());
  }
  const Curve1D& rep = sp.family(Side::minus).rep;
  Profile2D U(P.x1, sp.x2(), k, rep.left, rep.right);
  U.data = P.U;
  return profile_residual(U, c, sp.potential());
}

EquipartitionReport equipartition_check(const SliceProblem& sp, const SliceProfile& P, double c,
                                        const ConstantsLedger* L) {
  EquipartitionReport r;
  const int n = P.x1.n;
  const double h = P.x1.h;
  const std::vector<double> K = kinetic_density(sp, P);
  const std::vector<double> E = slice_energies(sp, P);
  std::vector<double> G(n);
  for (int i = 0; i < n; ++i) G[i] = E[i] - 0.5 * K[i];
  for (int i = 1; i + 1 < n; ++i) {
    const double res = (G[i + 1] - G[i - 1]) / (2.0 * h) - c * K[i];
    r.max_residual = std::max(r.max_residual, std::abs(res));
    r.scale = std::max(r.scale, c * K[i]);
  }
  if (L) {
    try {
      const EntryTimes et = entry_times(sp, P, *L);
      r.entry_times_defined = true;
      r.minus_bound_violation = -std::numeric_limits<double>::infinity();
      r.plus_bound_violation = -std::numeric_limits<double>::infinity();
      for (int i = 0; i < et.i_minus; ++i)
        r.minus_bound_violation = std::max(r.minus_bound_violation, 0.5 * K[i] - (E[i] - sp.m_minus()));
      for (int i = et.i_plus + 1; i < n; ++i)
        r.plus_bound_violation = std::max(r.plus_bound_violation, (E[i] - sp.m_plus()) - 0.5 * K[i]);
      if (et.i_minus <= 0) r.minus_bound_violation = 0.0;
      if (et.i_plus >= n - 1) r.plus_bound_violation = 0.0;
    } catch (const Error&) {
      r.entry_times_defined = false;
    }
  }
  return r;
}

UniquenessReport uniqueness_audit(const SliceProblem& sp, double c1, const SliceProfile& U1, double c2,
                                  const SliceProfile& U2, double t_ref) {
  if (U1.x1.n != U2.x1.n || U1.x1.h != U2.x1.h)
    fail(ErrorKind::invalid_argument, "uniqueness audit: profiles on different grids");
  const int n = U2.x1.n;
  const double h = U2.x1.h;
  const double mp = sp.m_plus();
  auto density = [&](const SliceProfile& P, int i, double* K) {
    const Vec d = row_derivative(P.U, i, h);
    *K = sp.mass() * d.squaredNorm();
    return 0.5 * (*K) + sp.energy(P.U.row(i).data()) - mp;
  };
  UniquenessReport r;
  double kin = 0.0, e12 = 0.0, e21 = 0.0;
  for (int i = 1; i + 1 < n; ++i) {
    const double t = U2.x1.node(i);
    const double wt = (i == 1 || i == n - 2) ? 0.5 * h : h;
    double K2 = 0.0, K1 = 0.0;
    const double d2 = density(U2, i, &K2);
    const double d1 = density(U1, i, &K1);
    const double w1 = std::exp(c1 * (t - t_ref));
    const double w2 = std::exp(c2 * (t - t_ref));
    e12 += wt * d2 * w1;
    e21 += wt * d1 * w2;
    kin += wt * K2 * w1;
  }
  auto bracket = [&](int i) {
    double K = 0.0;
    density(U2, i, &K);
    const double E = sp.energy(U2.U.row(i).data()) - mp;
    return std::exp(c1 * (U2.x1.node(i) - t_ref)) * (E - 0.5 * K);
  };
  r.cross_12 = e12;
  r.cross_21 = e21;
  r.lhs = c1 * e12;
  r.rhs = (c1 - c2) * kin + bracket(n - 2) - bracket(1);
  r.residual = std::abs(r.lhs - r.rhs);
  r.contradiction = (c1 - c2) * kin / c1;
  return r;
}

}  // namespace tw
