#include <doctest.h>

#include <cmath>

#include "tw/constants.hpp"
#include "tw/errors.hpp"

using namespace tw;

namespace {

struct Bistable {
  PotentialSpec pot = make_unbalanced_bistable(0.25);
  SliceProblem sp = make();
  SliceProblem make() {
    SliceFamily fm, fp;
    fm.point = Vec::Ones(1);
    fm.level = pot.V(fm.point);
    fp.point = Vec::Zero(1);
    return SliceProblem(pot, fm, fp);
  }
};

}  // namespace

TEST_CASE("ledger is reproducible bit for bit and strictly positive where it must be") {
  Bistable b;
  const ConstantsLedger a = compute_ledger(b.sp);
  const ConstantsLedger c = compute_ledger(b.sp);
  CHECK(a.E_max == c.E_max);
  CHECK(a.rho0_minus == c.rho0_minus);
  CHECK(a.e_r_minus == c.e_r_minus);
  CHECK(a.nu_plus == c.nu_plus);
  for (double v : {a.rho0_minus, a.rho0_plus, a.beta_minus, a.beta_plus, a.mu_minus, a.d0, a.E_max, a.E_max_plus})
    CHECK(v > 0.0);
  CHECK(a.gap == doctest::Approx(1.0 / 24.0));
  CHECK(a.m_minus == doctest::Approx(-1.0 / 24.0));
}

TEST_CASE("a different seed changes only the sampled estimates") {
  Bistable b;
  LedgerOptions o;
  o.seed = 99;
  const ConstantsLedger a = compute_ledger(b.sp);
  const ConstantsLedger c = compute_ledger(b.sp, o);
  CHECK(a.beta_minus == c.beta_minus);
  CHECK(a.gap == c.gap);
}

TEST_CASE("points: d0 is the well distance minus the mean capture radius") {
  Bistable b;
  CHECK(family_separation(b.sp) == doctest::Approx(1.0));
  CHECK(compute_d0(b.sp, 0.2, 0.1) == doctest::Approx(1.0 - 0.15));
  CHECK_THROWS_AS(compute_d0(b.sp, 1.5, 1.0), Error);
}

TEST_CASE("beta for points is 2 / lambda") {
  CHECK(estimate_beta(false, 0.25, 0.0) == doctest::Approx(8.0));
  CHECK(estimate_beta(true, 1.0, 0.5) == doctest::Approx(2.0 * (1.0 + 1.5)));
}

TEST_CASE("assumption checker on hand-built ledgers") {
  ConstantsLedger L;
  L.gap = 0.01;
  L.E_max = 0.1;
  L.sublevel_ok = true;
  L.mu_minus = 1.0;
  L.d0 = 1.0;
  AssumptionReport r = check_assumptions(L);
  CHECK(r.perturbation_ok);
  CHECK(r.convergence_ok);
  L.gap = 0.0;
  r = check_assumptions(L);
  CHECK_FALSE(r.perturbation_ok);
  L.gap = 0.2;
  r = check_assumptions(L);
  CHECK_FALSE(r.perturbation_ok);
  CHECK(r.perturbation_margin == doctest::Approx(2.0));
}

TEST_CASE("transition time bound") {
  ConstantsLedger L;
  L.m_minus = -0.1;
  L.m_plus = 0.0;
  L.alpha_star = 0.05;
  CHECK(transition_time_bound(L, 0.5) == doctest::Approx(std::log(0.1 / 0.05 + 1.0) / 0.5));
  L.alpha_star = -0.01;
  CHECK(std::isinf(transition_time_bound(L, 0.5)));
  CHECK_THROWS_AS(transition_time_bound(L, 0.0), Error);
}
