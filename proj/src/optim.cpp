#include "tw/optim.hpp"

#include <cmath>
#include <deque>

namespace tw {

namespace {

double max_abs(const Vec& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

void apply_precond(const Objective& obj, const Vec& g, Vec& out) {
  if (obj.precondition)
    obj.precondition(g, out);
  else
    out = g;
}

}  // namespace

MinimizeReport minimize_lbfgs(const Objective& obj, Vec& x, const MinimizeOptions& opts) {
  MinimizeReport rep;
  const Eigen::Index N = x.size();
  if (obj.project && obj.project(x)) rep.projection_active = true;
  Vec g(N), r(N), d(N), xt(N), gt(N), probe(N);
  double f = obj.value_and_gradient(x, g);

  std::deque<Vec> S, Y;
  std::deque<double> RHO;
  std::deque<double> history;
  const double c1 = 1e-4;

  auto scaled_grad_norm = [&](const Vec& gg) {
    if (opts.grad_scale.size() == N) return max_abs(gg.cwiseProduct(opts.grad_scale));
    return max_abs(gg);
  };

  auto stationarity = [&]() {
    apply_precond(obj, g, r);
    if (!obj.project) return max_abs(r);
    probe = x - r;
    obj.project(probe);
    return max_abs(x - probe);
  };

  int iter = 0;
  for (; iter < opts.max_iter; ++iter) {
    rep.grad_norm = scaled_grad_norm(g);
    rep.step_norm = stationarity();
    if ((opts.step_tol > 0.0 && rep.step_norm <= opts.step_tol) ||
        (opts.grad_tol > 0.0 && rep.grad_norm <= opts.grad_tol)) {
      rep.converged = true;
      rep.reason = "tolerance reached";
      break;
    }

    // Two-loop recursion with H0 = gamma P^{-1}.
    Vec q = g;
    std::vector<double> alpha(S.size());
    for (int i = static_cast<int>(S.size()) - 1; i >= 0; --i) {
      alpha[i] = RHO[i] * S[i].dot(q);
      q -= alpha[i] * Y[i];
    }
    apply_precond(obj, q, d);
    if (!S.empty()) {
      Vec py(N);
      apply_precond(obj, Y.back(), py);
      const double yy = Y.back().dot(py);
      if (yy > 0.0) d *= S.back().dot(Y.back()) / yy;
    }
    for (std::size_t i = 0; i < S.size(); ++i) {
      const double beta = RHO[i] * Y[i].dot(d);
      d += S[i] * (alpha[i] - beta);
    }
    d = -d;
    if (g.dot(d) >= 0.0) {
      S.clear();
      Y.clear();
      RHO.clear();
      apply_precond(obj, g, d);
      d = -d;
    }

    if (opts.max_step > 0.0) {
      const double dm = max_abs(d);
      if (dm > opts.max_step) d *= opts.max_step / dm;
    }

    // Backtracking line search along the (projected) ray.
    double t = 1.0;
    bool accepted = false;
    double ft = f;
    for (int ls = 0; ls < 50; ++ls) {
      xt = x + t * d;
      if (obj.project && obj.project(xt)) rep.projection_active = true;
      const double slope = g.dot(xt - x);
      if (slope < 0.0) {
        ft = obj.value(xt);
        // The second clause is an approximate Armijo test: once the expected
        // decrease is below the roundoff of f, accept any step that does not
        // raise f beyond that roundoff.
        const double fscale = 1e-13 * (std::abs(f) + 1.0);
        if (std::isfinite(ft) &&
            (ft <= f + c1 * slope || (-slope <= fscale && ft <= f + fscale))) {
          accepted = true;
          break;
        }
      }
      t *= 0.5;
    }
    if (!accepted) {
      if (!S.empty()) {
        S.clear();
        Y.clear();
        RHO.clear();
        continue;
      }
      rep.reason = "line search failed";
      // A failed search from the plain preconditioned direction means no
      // representable descent remains; treat as converged at roundoff level.
      rep.converged = rep.step_norm <= std::max(opts.step_tol, 0.0) * 1e3 ||
                      (opts.grad_tol > 0.0 && rep.grad_norm <= opts.grad_tol * 1e3);
      break;
    }

    ft = obj.value_and_gradient(xt, gt);
    Vec s = xt - x;
    Vec y = gt - g;
    const double sy = s.dot(y);
    if (sy > 1e-14 * s.norm() * y.norm()) {
      S.push_back(std::move(s));
      Y.push_back(std::move(y));
      RHO.push_back(1.0 / sy);
      if (static_cast<int>(S.size()) > opts.memory) {
        S.pop_front();
        Y.pop_front();
        RHO.pop_front();
      }
    }
    x.swap(xt);
    g.swap(gt);
    f = ft;

    if (obj.monitor && obj.monitor(x, f, iter)) {
      rep.stopped_by_monitor = true;
      rep.reason = "stopped by monitor";
      ++iter;
      break;
    }
    if (opts.f_rel_tol > 0.0) {
      history.push_back(f);
      if (static_cast<int>(history.size()) > opts.stall_window) {
        const double old = history.front();
        history.pop_front();
        if (std::abs(old - f) <= opts.f_rel_tol * std::max(std::abs(f), 1e-300)) {
          rep.converged = true;
          rep.reason = "energy stagnation";
          ++iter;
          break;
        }
      }
    }
  }
  if (iter >= opts.max_iter && rep.reason.empty()) rep.reason = "max iterations";
  rep.iterations = iter;
  rep.f = f;
  rep.grad_norm = scaled_grad_norm(g);
  return rep;
}

}  // namespace tw
