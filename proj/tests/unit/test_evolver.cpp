#include <doctest.h>

#include <cmath>

#include "tw/errors.hpp"
#include "tw/evolver.hpp"
#include "tw/tw_solver.hpp"

using namespace tw;

namespace {

// V = 0 on the line; the wells are bookkeeping points for the slice problem.
class ZeroModel : public PotentialModel {
 public:
  int dim() const override { return 1; }
  double value(const double*) const override { return 0.0; }
  void gradient(const double*, double* g) const override { g[0] = 0.0; }
  void hessian(const double*, double* h) const override { h[0] = 0.0; }
};

PotentialSpec zero_potential() {
  PotentialSpec p;
  p.name = "zero";
  p.k = 1;
  p.wells = {Vec::Constant(1, -1.0), Vec::Constant(1, 1.0)};
  p.well_levels = {0.0, 0.0};
  p.model = std::make_shared<ZeroModel>();
  return p;
}

SliceProblem points(const PotentialSpec& pot, double a, double b) {
  SliceFamily fm, fp;
  fm.point = Vec::Constant(1, a);
  fm.level = pot.V(fm.point);
  fp.point = Vec::Constant(1, b);
  fp.level = pot.V(fp.point);
  return SliceProblem(pot, fm, fp);
}

}  // namespace

TEST_CASE("a constant state at a well is a fixed point") {
  const PotentialSpec w = make_unbalanced_bistable(0.25);
  const SliceProblem sp = points(w, 1.0, 0.0);
  const Grid1D g(5.0, 101);
  const Evolver ev(sp, g);
  RMat s = RMat::Constant(g.n, 1, 1.0);
  for (int i = 0; i < 10; ++i) ev.step(s, 0.05);
  CHECK((s.array() - 1.0).abs().maxCoeff() <= 1e-14);  // tridiagonal roundoff only
}

TEST_CASE("heat step damps a sine mode by 1 / (1 + dt lambda)") {
  const PotentialSpec z = zero_potential();
  const SliceProblem sp = points(z, 0.0, 0.0);
  const Grid1D g(1.0, 101);
  const Evolver ev(sp, g);
  for (int m : {1, 3, 7}) {
    RMat s(g.n, 1);
    const double kk = m * M_PI / 2.0;  // sin(kk (x + 1)) vanishes at both ends
    for (int i = 0; i < g.n; ++i) s(i, 0) = std::sin(kk * (g.node(i) + 1.0));
    const double lambda = (2.0 - 2.0 * std::cos(kk * g.h)) / (g.h * g.h);
    const double dt = 0.01;
    RMat expect = s / (1.0 + dt * lambda);
    ev.step(s, dt);
    CHECK((s - expect).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("free energy never increases") {
  const PotentialSpec w = make_unbalanced_bistable(0.25);
  const SliceProblem sp = points(w, 1.0, 0.0);
  const Grid1D g(20.0, 801);
  const Evolver ev(sp, g);
  RMat s = psi_init(sp, g, -3.0).U;
  double f = ev.free_energy(s);
  for (int i = 0; i < 100; ++i) {
    ev.step(s, 0.05);
    const double f1 = ev.free_energy(s);
    CHECK(f1 <= f + 1e-10);
    f = f1;
  }
}

TEST_CASE("grid-aligned shifts commute with the flow") {
  const PotentialSpec w = make_unbalanced_bistable(0.25);
  const SliceProblem sp = points(w, 1.0, 0.0);
  const Grid1D g(20.0, 801);
  const Evolver ev(sp, g);
  const int shift = 40;
  RMat a = psi_init(sp, g, -4.0).U;
  RMat b = a;
  for (int i = 0; i < g.n; ++i) b(i, 0) = a(std::max(i - shift, 0), 0);
  for (int n = 0; n < 50; ++n) {
    ev.step(a, 0.05);
    ev.step(b, 0.05);
  }
  // Away from the ends the two states agree after the shift.
  double err = 0.0;
  for (int i = shift + 100; i < g.n - 100; ++i) err = std::max(err, std::abs(b(i, 0) - a(i - shift, 0)));
  CHECK(err <= 1e-10);
}

TEST_CASE("measured speeds: bistable, balanced and rescaled") {
  const PotentialSpec w = make_unbalanced_bistable(0.25);
  const SliceProblem sp = points(w, 1.0, 0.0);
  const Grid1D g(30.0, 1201);
  EvolverOptions o;
  o.horizon = 40;
  const EvolutionResult r = measure_front_speed(sp, psi_init(sp, g, -15.0), o);
  const double exact = 0.5 / std::sqrt(2.0);
  CHECK(std::abs(r.fitted_speed - exact) / exact <= 0.05);
  for (std::size_t i = 1; i < r.free_energy.size(); ++i) CHECK(r.free_energy[i] <= r.free_energy[i - 1] + 1e-10);

  o.eps = 0.5;
  o.horizon = 20;
  const EvolutionResult r2 = measure_front_speed(sp, psi_init(sp, g, -15.0), o);
  CHECK(std::abs(r2.fitted_speed / r.fitted_speed - 2.0) <= 0.2);

  const PotentialSpec ac = make_scalar_allen_cahn();
  const SliceProblem sa = points(ac, -1.0, 1.0);
  EvolverOptions oa;
  const EvolutionResult r3 = measure_front_speed(sa, psi_init(sa, g, -3.0), oa);
  CHECK(std::abs(r3.fitted_speed) <= 1e-2);
}

TEST_CASE("time step above the stability limit is refused") {
  const PotentialSpec w = make_unbalanced_bistable(0.25);
  const SliceProblem sp = points(w, 1.0, 0.0);
  const Grid1D g(10.0, 201);
  EvolverOptions o;
  o.dt = 10.0;
  CHECK_THROWS_AS(measure_front_speed(sp, psi_init(sp, g), o), Error);
}

TEST_CASE("line fit") {
  double res = -1.0;
  CHECK(fit_line_slope({0, 1, 2, 3}, {1, 3, 5, 7}, &res) == doctest::Approx(2.0));
  CHECK(res == doctest::Approx(0.0).epsilon(1e-14));
  CHECK_THROWS_AS(fit_line_slope({1.0}, {1.0}), Error);
}
