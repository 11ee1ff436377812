#include <doctest.h>

#include <cmath>
#include <cstdio>

#include "gen.hpp"
#include "tw/energy.hpp"
#include "tw/errors.hpp"
#include "tw/grid.hpp"

using namespace tw;

TEST_CASE("grid needs an odd node count so t = 0 is a node") {
  CHECK_THROWS_AS(Grid1D(1.0, 4), Error);
  const Grid1D g(5.0, 11);
  CHECK(g.node(5) == 0.0);
  CHECK(g.h == doctest::Approx(1.0));
}

TEST_CASE("trapezoid rule is exact for linear samples") {
  std::vector<double> y;
  for (int i = 0; i <= 10; ++i) y.push_back(3.0 + 0.5 * i);
  CHECK(trapezoid_integral(y, 0.1) == doctest::Approx(1.0 * 3.0 + 0.5 * 10 * 0.5));
}

TEST_CASE("grid-aligned translation shifts rows exactly") {
  Gen gen(5);
  const Grid1D g(10.0, 201);
  const Vec sm = Vec::Constant(1, -1.0), sp = Vec::Constant(1, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const Curve1D c = gen.curve(g, sm, sp, 0.2);
    const int s = gen.integer(-20, 20);
    const Curve1D t = translate_curve(c, s * g.h);
    for (int i = 0; i < g.n; ++i) {
      const int j = i + s;
      if (j >= 0 && j < g.n) CHECK(t.values(i, 0) == doctest::Approx(c.values(j, 0)).epsilon(1e-12));
    }
  }
}

TEST_CASE("curve CSV round trip keeps every digit") {
  Gen gen(9);
  const Grid1D g(4.0, 41);
  Vec sm(2), sp(2);
  sm << -1, 0;
  sp << 1, 0;
  const Curve1D c = gen.curve(g, sm, sp, 0.3);
  const std::string path = "grid_roundtrip.csv";
  write_curve_csv(path, c);
  const Curve1D r = read_curve_csv(path, sm, sp);
  std::remove(path.c_str());
  CHECK(r.n() == c.n());
  CHECK((r.values - c.values).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("Allen-Cahn energy of the tanh profile is 2 sqrt 2 / 3") {
  const PotentialSpec ac = make_scalar_allen_cahn();
  const Grid1D g(20.0, 4001);
  Curve1D q(g, 1, Vec::Constant(1, -1.0), Vec::Constant(1, 1.0));
  for (int i = 0; i < g.n; ++i) q.values(i, 0) = std::tanh(g.node(i) / std::sqrt(2.0));
  CHECK(energy_1d(q, ac) == doctest::Approx(2.0 * std::sqrt(2.0) / 3.0).epsilon(1e-5));
}

TEST_CASE("energy gradient is the directional derivative") {
  Gen gen(21);
  const PotentialSpec gl = make_perturbed_gl(1.0);
  const Grid1D g(8.0, 161);
  Vec sm(2), sp(2);
  sm << -1, 0;
  sp << 1, 0;
  for (int trial = 0; trial < 10; ++trial) {
    const Curve1D q = gen.curve(g, sm, sp, 0.3);
    const RMat G = energy_1d_gradient(q, gl);
    Curve1D dir = gen.curve(g, Vec::Zero(2), Vec::Zero(2), 0.5);
    const double eps = 1e-6;
    Curve1D qp = q, qm = q;
    qp.values += eps * dir.values;
    qm.values -= eps * dir.values;
    const double fd = (energy_1d(qp, gl) - energy_1d(qm, gl)) / (2 * eps);
    const double an = g.h * (G.array() * dir.values.array()).sum();
    CHECK(fd == doctest::Approx(an).epsilon(1e-5));
  }
}

TEST_CASE("weighted energy scales by exp(c tau) under grid-aligned translations") {
  Gen gen(33);
  const PotentialSpec w = make_unbalanced_bistable(0.25);
  const Grid1D g(10.0, 401);
  const Vec sm = Vec::Constant(1, 1.0), sp = Vec::Constant(1, 0.0);
  for (int trial = 0; trial < 10; ++trial) {
    // Exactly at the wells outside [-3, 3], so a shift by up to 4 units
    // keeps the right end at the zero level.
    Curve1D q(g, 1, sm, sp);
    const double amp = gen.uniform(-0.2, 0.2);
    for (int i = 0; i < g.n; ++i) {
      const double t = g.node(i);
      const double s = smoothstep5((3.0 - t) / 6.0);
      q.values(i, 0) = s + amp * s * (1.0 - s);
    }
    WeightedEnergyParams p;
    p.c = gen.uniform(0.1, 0.8);
    p.potential = &w;
    const int shift = gen.integer(1, 80);
    Curve1D moved = q;
    for (int i = 0; i < g.n; ++i) moved.values(i, 0) = q.values(std::max(i - shift, 0), 0);
    const double e0 = weighted_energy_1d(q, p);
    const double e1 = weighted_energy_1d(moved, p);
    CHECK(e1 == doctest::Approx(std::exp(p.c * shift * g.h) * e0).epsilon(1e-12));
  }
}

TEST_CASE("weight range guard") {
  CHECK_THROWS_AS(check_weight_range(100.0, 100.0, -100.0), Error);
  CHECK_NOTHROW(check_weight_range(0.5, 20.0, 0.0));
}
