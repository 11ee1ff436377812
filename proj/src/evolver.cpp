#include "tw/evolver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

#include "tw/errors.hpp"
#include "tw/linalg.hpp"
#include "tw/tw_solver.hpp"

namespace tw {

namespace {
constexpr double kPi = 3.14159265358979323846;

TridiagonalSolver mode_solver(int n, double diag_shift, double dt, double h1) {
  const double off = -dt / (h1 * h1);
  std::vector<double> lo(n, off), di(n, 1.0 + diag_shift + 2.0 * dt / (h1 * h1)), up(n, off);
  lo[0] = 0.0;
  up[n - 1] = 0.0;
  return TridiagonalSolver(lo, di, up);
}
}  // namespace

Evolver::Evolver(const SliceProblem& sp, const Grid1D& x1, double eps) : sp_(&sp), x1_(x1), eps_(eps) {
  if (!(eps > 0.0)) fail(ErrorKind::invalid_argument, "evolver: eps must be positive");
  if (x1.n < 3) fail(ErrorKind::invalid_argument, "evolver: x1 grid too coarse");
  r_ref_ = make_constraints(sp, ConstantsLedger{}, 0.0).r_max;
  if (sp.is_curve()) {
    n2_ = sp.x2().n;
    J_ = n2_ - 2;
    const double s = std::sqrt(2.0 / (n2_ - 1));
    Q_.resize(J_, J_);
    for (int p = 0; p < J_; ++p)
      for (int j = 0; j < J_; ++j) Q_(p, j) = s * std::sin(kPi * (p + 1) * (j + 1) / (n2_ - 1));
    const double h2 = sp.x2().h;
    lambda_.resize(J_);
    for (int j = 0; j < J_; ++j) lambda_[j] = (2.0 - 2.0 * std::cos(kPi * (j + 1) / (n2_ - 1))) / (h2 * h2);
  } else {
    lambda_ = {0.0};
  }
}

void Evolver::step(RMat& w, double dt) const {
  const SliceProblem& sp = *sp_;
  const int n1 = x1_.n, k = sp.k(), m = sp.size();
  if (w.rows() != n1 || w.cols() != m) fail(ErrorKind::invalid_argument, "evolver: state shape mismatch");
  if (!(dt > 0.0)) fail(ErrorKind::invalid_argument, "evolver: dt must be positive");
  const double h1 = x1_.h;
  const double s = 1.0 / (eps_ * eps_);
  const int j_lo = sp.is_curve() ? 1 : 0;
  const int j_hi = sp.is_curve() ? n2_ - 2 : 0;

  RMat r = w;
  std::vector<double> gv(k);
  for (int i = 1; i + 1 < n1; ++i) {
    for (int j = j_lo; j <= j_hi; ++j) {
      double* u = r.row(i).data() + j * k;
      sp.potential().gradient(w.row(i).data() + j * k, gv.data());
      for (int a = 0; a < k; ++a) u[a] -= dt * s * gv[a];
    }
  }
  const double cx = dt / (h1 * h1);
  r.row(1) += cx * w.row(0);
  r.row(n1 - 2) += cx * w.row(n1 - 1);
  if (sp.is_curve()) {
    const double cy = dt / (sp.x2().h * sp.x2().h);
    for (int i = 1; i + 1 < n1; ++i)
      for (int a = 0; a < k; ++a) {
        r(i, k + a) += cy * w(i, a);
        r(i, (n2_ - 2) * k + a) += cy * w(i, (n2_ - 1) * k + a);
      }
  }

  const int ni = n1 - 2;
  if (!sp.is_curve()) {
    const TridiagonalSolver solver = mode_solver(ni, 0.0, dt, h1);
    for (int a = 0; a < k; ++a) solver.solve(r.row(1).data() + a, k);
    w.middleRows(1, ni) = r.middleRows(1, ni);
  } else {
    Mat X(ni, J_), Y(ni, J_);
    for (int a = 0; a < k; ++a) {
      for (int i = 0; i < ni; ++i)
        for (int p = 0; p < J_; ++p) X(i, p) = r(i + 1, (p + 1) * k + a);
      Y.noalias() = X * Q_;
#pragma omp parallel for schedule(static)
      for (int p = 0; p < J_; ++p) {
        const TridiagonalSolver solver = mode_solver(ni, dt * lambda_[p], dt, h1);
        solver.solve(Y.col(p).data(), 1);
      }
      X.noalias() = Y * Q_;
      for (int i = 0; i < ni; ++i)
        for (int p = 0; p < J_; ++p) w(i + 1, (p + 1) * k + a) = X(i, p);
    }
  }

  double mx = 0.0;
  for (int i = 0; i < n1; ++i)
    for (int j = 0; j < m / k; ++j) mx = std::max(mx, w.row(i).segment(j * k, k).norm());
  if (!std::isfinite(mx) || mx > blowup_factor * r_ref_) fail(ErrorKind::convergence, "blow-up");
}

double Evolver::free_energy(const RMat& w) const {
  const SliceProblem& sp = *sp_;
  const int n1 = x1_.n, k = sp.k();
  const double h1 = x1_.h;
  const double h2 = sp.is_curve() ? sp.x2().h : 1.0;
  const double s = 1.0 / (eps_ * eps_);
  double kin = 0.0, pot = 0.0;
  for (int i = 0; i + 1 < n1; ++i) kin += (w.row(i + 1) - w.row(i)).squaredNorm() / (2.0 * h1 * h1);
  if (sp.is_curve()) {
    for (int i = 0; i < n1; ++i)
      for (int j = 0; j + 1 < n2_; ++j)
        kin += (w.row(i).segment((j + 1) * k, k) - w.row(i).segment(j * k, k)).squaredNorm() / (2.0 * h2 * h2);
  }
  const int j_lo = sp.is_curve() ? 1 : 0;
  const int j_hi = sp.is_curve() ? n2_ - 2 : 0;
  for (int i = 1; i + 1 < n1; ++i)
    for (int j = j_lo; j <= j_hi; ++j) pot += s * sp.potential().value(w.row(i).data() + j * k);
  return h1 * h2 * (kin + pot);
}

double Evolver::stable_dt(const RMat& w) const {
  const int k = sp_->k();
  Mat H(k, k);
  RMat Hr(k, k);
  double lmax = 0.0;
  for (int i = 0; i < w.rows(); ++i) {
    for (int j = 0; j < w.cols() / k; ++j) {
      sp_->potential().hessian(w.row(i).data() + j * k, Hr.data());
      H = Hr;
      const Eigen::SelfAdjointEigenSolver<Mat> es(H, Eigen::EigenvaluesOnly);
      lmax = std::max(lmax, es.eigenvalues().maxCoeff());
    }
  }
  lmax /= eps_ * eps_;
  return lmax > 0.0 ? 2.0 / lmax : std::numeric_limits<double>::infinity();
}

double fit_line_slope(const std::vector<double>& t, const std::vector<double>& y, double* residual) {
  const std::size_t n = t.size();
  if (n < 2 || y.size() != n) fail(ErrorKind::invalid_argument, "line fit needs at least two samples");
  double mt = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mt += t[i];
    my += y[i];
  }
  mt /= n;
  my /= n;
  double stt = 0.0, sty = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    stt += (t[i] - mt) * (t[i] - mt);
    sty += (t[i] - mt) * (y[i] - my);
  }
  if (!(stt > 0.0)) fail(ErrorKind::invalid_argument, "line fit needs distinct sample times");
  const double slope = sty / stt;
  if (residual) {
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double e = y[i] - (my + slope * (t[i] - mt));
      ss += e * e;
    }
    *residual = std::sqrt(ss / n);
  }
  return slope;
}

EvolutionResult measure_front_speed(const SliceProblem& sp, const SliceProfile& init, const EvolverOptions& opts) {
  if (!(opts.horizon > 0.0 && opts.sample_dt > 0.0))
    fail(ErrorKind::invalid_argument, "evolve: horizon and sample_dt must be positive");
  const Evolver ev(sp, init.x1, opts.eps);
  EvolutionResult res;
  RMat w = init.U;
  const double dt_stable = ev.stable_dt(w);
  double dt = opts.dt;
  if (dt <= 0.0)
    dt = std::min(0.05, 0.9 * dt_stable);
  else if (dt > dt_stable)
    fail(ErrorKind::invalid_argument, "evolve: dt exceeds 2 / max eigenvalue of the potential Hessian");
  const int per_sample = std::max(1, static_cast<int>(std::lround(opts.sample_dt / dt)));
  dt = opts.sample_dt / per_sample;
  res.dt = dt;
  res.scheme = std::string("IMEX Euler, implicit Laplacian") + (sp.is_curve() ? " (sine transform in x2)" : "") +
               ", explicit reaction";

  const Grid1D& g = init.x1;
  SliceProfile cur{g, w};
  auto record = [&](double t) {
    cur.U = w;
    res.times.push_back(t);
    res.fronts.push_back(front_position(scan_slices(sp, cur)));
    res.free_energy.push_back(ev.free_energy(w));
  };
  record(0.0);
  const int samples = static_cast<int>(std::ceil(opts.horizon / opts.sample_dt - 1e-9));
  for (int s = 1; s <= samples; ++s) {
    for (int q = 0; q < per_sample; ++q) ev.step(w, dt);
    res.steps += per_sample;
    record(s * opts.sample_dt);
    if (opts.snapshot_every > 0 && s % opts.snapshot_every == 0) res.snapshots.push_back(SliceProfile{g, w});
    const double f = res.fronts.back();
    if (f > g.L - opts.edge_margin || f < -g.L + opts.edge_margin) {
      res.left_domain = true;
      break;
    }
  }
  res.final_state = SliceProfile{g, w};

  const double t_half = 0.5 * res.times.back();
  std::vector<double> ft, fx;
  for (std::size_t i = 0; i < res.times.size(); ++i) {
    if (res.times[i] >= t_half) {
      ft.push_back(res.times[i]);
      fx.push_back(res.fronts[i]);
    }
  }
  res.fit_samples = static_cast<int>(ft.size());
  if (ft.size() >= 2) res.fitted_speed = fit_line_slope(ft, fx, &res.fit_residual);
  return res;
}

}  // namespace tw
