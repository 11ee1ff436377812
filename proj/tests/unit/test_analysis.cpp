#include <doctest.h>

#include <cmath>

#include "gen.hpp"
#include "tw/analysis.hpp"
#include "tw/energy.hpp"
#include "tw/errors.hpp"
#include "tw/heteroclinic.hpp"

using namespace tw;

namespace {

SliceProblem bistable_points(const PotentialSpec& pot) {
  SliceFamily fm, fp;
  fm.point = Vec::Ones(1);
  fm.level = pot.V(fm.point);
  fp.point = Vec::Zero(1);
  return SliceProblem(pot, fm, fp);
}

}  // namespace

TEST_CASE("closed-form bistable wave satisfies its equation") {
  Gen gen(4);
  for (double a : {0.05, 0.15, 0.25, 0.35, 0.45}) {
    for (int i = 0; i < 1000; ++i) CHECK(std::abs(bistable_ansatz_residual(a, gen.uniform(-30.0, 30.0))) <= 1e-12);
    const BistableReference ref = exact_bistable_reference(a, Grid1D(10.0, 101));
    CHECK(ref.speed == doctest::Approx((1.0 - 2.0 * a) / std::sqrt(2.0)));
  }
  CHECK(exact_bistable_reference(0.5 - 1e-12, Grid1D(10.0, 101)).speed == doctest::Approx(0.0).epsilon(1e-10));
}

TEST_CASE("speed formula integral: int u'^2 = sqrt 2 / 12") {
  const BistableReference ref = exact_bistable_reference(0.25, Grid1D(40.0, 16001));
  const Curve1D& u = ref.profile;
  std::vector<double> d2(u.n());
  const RMat du = central_difference(u);
  for (int i = 0; i < u.n(); ++i) d2[i] = du(i, 0) * du(i, 0);
  const double I = trapezoid_integral(d2, u.grid.h);
  CHECK(I == doctest::Approx(std::sqrt(2.0) / 12.0).epsilon(1e-6));
  CHECK((1.0 / 24.0) / I == doctest::Approx(ref.speed).epsilon(1e-6));
}

TEST_CASE("planted exponential decay is recovered") {
  const PotentialSpec w = make_unbalanced_bistable(0.25);
  const SliceProblem sp = bistable_points(w);
  const Grid1D g(20.0, 801);
  SliceProfile P{g, RMat(g.n, 1)};
  for (int i = 0; i < g.n; ++i) {
    const double t = g.node(i);
    P.U(i, 0) = t <= 0.0 ? 1.0 - 0.5 * std::exp(0.9 * t) : 0.5 * std::exp(-0.7 * t);
  }
  const RateFit r = fit_exponential_rate(sp, P, Side::plus, 0.7);
  CHECK(r.fitted == doctest::Approx(0.7).epsilon(0.02 / 0.7));
  CHECK(r.r2 >= 0.95);
  CHECK(r.ok);
  const RateFit m = fit_exponential_rate(sp, P, Side::minus, 0.9);
  CHECK(m.fitted == doctest::Approx(0.9).epsilon(0.02 / 0.9));
}

TEST_CASE("rate fit reports a window that is too short") {
  const PotentialSpec w = make_unbalanced_bistable(0.25);
  const SliceProblem sp = bistable_points(w);
  const Grid1D g(20.0, 801);
  SliceProfile P{g, RMat(g.n, 1)};
  for (int i = 0; i < g.n; ++i) P.U(i, 0) = g.node(i) <= 0.0 ? 1.0 : 0.0;
  CHECK_THROWS_AS(fit_exponential_rate(sp, P, Side::plus, 0.5), Error);
}

TEST_CASE("uniform check on a profile that sits at the families") {
  const PotentialSpec w = make_unbalanced_bistable(0.25);
  const SliceProblem sp = bistable_points(w);
  const Grid1D g(20.0, 401);
  SliceProfile P{g, RMat(g.n, 1)};
  for (int i = 0; i < g.n; ++i) P.U(i, 0) = 1.0 / (1.0 + std::exp(g.node(i) / std::sqrt(2.0)));
  const UniformConvergenceReport r = uniform_convergence_check(sp, P);
  CHECK(r.ok);
  CHECK(r.end_minus <= 1e-5);
  CHECK(r.end_plus <= 1e-5);
}

TEST_CASE("H1 audit: planted sequence converges") {
  const PotentialSpec ac = make_scalar_allen_cahn();
  const Grid1D g(10.0, 401);
  const Vec sm = Vec::Constant(1, -1.0), sp = Vec::Constant(1, 1.0);
  const Curve1D target = tanh_init(g, sm, sp);
  std::vector<Curve1D> seq;
  for (int n = 1; n <= 8; ++n) {
    Curve1D q = target;
    for (int i = 1; i + 1 < g.n; ++i) q.values(i, 0) += std::exp(-g.node(i) * g.node(i)) / n;
    seq.push_back(q);
  }
  const H1AuditReport r = h1_convergence_audit(seq, target, ac);
  CHECK(r.hypothesis_ok);
  CHECK(r.conclusion_ok);
  CHECK(r.verdict == "confirmed");
  // Linear decay: n * distance stays put.
  CHECK(r.h1.back() * 8 == doctest::Approx(r.h1.front()).epsilon(1e-9));
}

TEST_CASE("H1 audit: oscillating bumps break the energy hypothesis, not the conclusion") {
  const PotentialSpec ac = make_scalar_allen_cahn();
  const Grid1D g(10.0, 4001);
  const Vec sm = Vec::Constant(1, -1.0), sp = Vec::Constant(1, 1.0);
  const Curve1D target = tanh_init(g, sm, sp);
  std::vector<Curve1D> seq;
  for (int n = 1; n <= 6; ++n) {
    const double k = 4.0 * n;
    Curve1D q = target;
    for (int i = 1; i + 1 < g.n; ++i) {
      const double t = g.node(i);
      q.values(i, 0) += std::sin(k * t) / k * std::exp(-t * t / 4.0);
    }
    seq.push_back(q);
  }
  const H1AuditReport r = h1_convergence_audit(seq, target, ac);
  CHECK_FALSE(r.hypothesis_ok);
  CHECK(r.verdict == "hypothesis failed");
}
