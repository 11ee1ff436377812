#include <doctest.h>

#include <cmath>

#include "gen.hpp"
#include "tw/energy.hpp"
#include "tw/errors.hpp"
#include "tw/constants.hpp"
#include "tw/heteroclinic.hpp"

using namespace tw;

namespace {

const Vec& m1() {
  static const Vec v = Vec::Constant(1, -1.0);
  return v;
}
const Vec& p1() {
  static const Vec v = Vec::Constant(1, 1.0);
  return v;
}

Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

}  // namespace

TEST_CASE("Allen-Cahn heteroclinic: energy, profile and phase") {
  const PotentialSpec ac = make_scalar_allen_cahn();
  const Grid1D g(20.0, 2001);
  const HeteroclinicResult r = minimize_heteroclinic(ac, {m1(), p1()}, tanh_init(g, m1(), p1(), 4.0), 1e-9);
  CHECK(r.energy == doctest::Approx(2.0 * std::sqrt(2.0) / 3.0).epsilon(1e-4));
  double err = 0.0;
  for (int i = 0; i < g.n; ++i) err = std::max(err, std::abs(r.curve.values(i, 0) - std::tanh(g.node(i) / std::sqrt(2.0))));
  CHECK(err <= 1e-3);
  CHECK(std::abs(midpoint_crossing(r.curve)) <= 1e-9);
  CHECK(r.kind == HeteroclinicKind::global);
}

TEST_CASE("spectral report: kernel along q' and a positive gap") {
  const PotentialSpec ac = make_scalar_allen_cahn();
  const Grid1D g(20.0, 801);
  const HeteroclinicResult r = minimize_heteroclinic(ac, {m1(), p1()}, tanh_init(g, m1(), p1()), 1e-9);
  const SpectralReport s = spectral_report(r.curve, ac);
  REQUIRE(s.eigenvalues.size() >= 2);
  CHECK(std::abs(s.eigenvalues[0]) <= 5e-3);
  CHECK(s.kernel_alignment >= 0.999);
  CHECK(s.gap > 0.0);
  CHECK(s.eigenvalues[0] <= s.eigenvalues[1]);
}

TEST_CASE("nearest translate recovers a planted shift") {
  const Grid1D g(20.0, 801);
  const Curve1D rep = tanh_init(g, m1(), p1());
  Gen gen(2);
  for (int trial = 0; trial < 20; ++trial) {
    const double tau = gen.uniform(-4.0, 4.0);
    const Curve1D q = translate_curve(rep, tau);
    const TranslateProjection p = project_nearest_translate(q, rep);
    CHECK(p.tau == doctest::Approx(tau).epsilon(1e-3));
    CHECK(p.distance <= 1e-3);
    CHECK_FALSE(p.ambiguous);
  }
}

TEST_CASE("clipping is nonexpansive and does not raise the energy") {
  const PotentialSpec gl = make_perturbed_gl(1.0);
  const Grid1D g(8.0, 161);
  const Vec sm = v2(-1, 0), sp = v2(1, 0);
  Gen gen(77);
  const double R = 1.2;
  for (int trial = 0; trial < 100; ++trial) {
    const Curve1D a = gen.curve(g, sm, sp, 1.5);
    const Curve1D b = gen.curve(g, sm, sp, 1.5);
    const Curve1D ca = clip_to_ball(a, R), cb = clip_to_ball(b, R);
    CHECK(l2_distance(ca, cb) <= l2_distance(a, b) + 1e-12);
    CHECK(h1_distance(ca, cb) <= h1_distance(a, b) + 1e-12);
    CHECK(energy_1d(ca, gl) <= energy_1d(a, gl) + 1e-12);
    for (int i = 0; i < g.n; ++i) CHECK(ca.values.row(i).norm() <= R + 1e-12);
  }
}

TEST_CASE("clipping fixes curves inside the ball") {
  const Grid1D g(8.0, 81);
  const Curve1D q = gl_arc_init(g, 1, 0.9, 4.0);
  CHECK(sup_distance(clip_to_ball(q, 1.1), q) == 0.0);
}

TEST_CASE("GL competitor energies decrease and beat the axis heteroclinic") {
  const CompetitorCheck c = check_gl_competitor(Grid1D(40.0, 8001));
  CHECK(c.decreasing);
  CHECK(c.below_ac);
  CHECK(c.energy_at_10 < 2.0 * std::sqrt(2.0) / 3.0);
}

TEST_CASE("perturbed GL global minimizer leaves the axis") {
  const PotentialSpec gl = make_perturbed_gl(1.0);
  const Grid1D g(16.0, 257);
  const HeteroclinicResult up = minimize_heteroclinic(gl, {v2(-1, 0), v2(1, 0)}, gl_arc_init(g, 1, 0.9, 4), 1e-9);
  CHECK(up.energy < 2.0 * std::sqrt(2.0) / 3.0);
  CHECK(std::abs(up.curve.values(g.n / 2, 1)) > 0.1);
  const SpectralReport s = spectral_report(up.curve, gl);
  CHECK(std::abs(s.eigenvalues[0]) <= 5e-3);
  CHECK(s.kernel_alignment >= 0.999);
  CHECK(s.gap > 0.0);
}

TEST_CASE("init that misses the wells is rejected") {
  const PotentialSpec ac = make_scalar_allen_cahn();
  const Grid1D g(5.0, 51);
  const Curve1D bad = tanh_init(g, m1(), Vec::Constant(1, 0.5));
  CHECK_THROWS_AS(minimize_heteroclinic(ac, {m1(), p1()}, bad, 1e-8), Error);
}
