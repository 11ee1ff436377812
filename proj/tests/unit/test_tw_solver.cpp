#include <doctest.h>

#include <cmath>

#include "gen.hpp"
#include "tw/analysis.hpp"
#include "tw/errors.hpp"
#include "tw/tw_solver.hpp"

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

const double kExact = 0.5 / std::sqrt(2.0);

SliceProfile exact_profile(const Grid1D& g) {
  const BistableReference ref = exact_bistable_reference(0.25, g);
  return SliceProfile{g, ref.profile.values};
}

}  // namespace

TEST_CASE("interpolating init is the wells outside the unit band") {
  Bistable b;
  const Grid1D g(10.0, 201);
  const SliceProfile P = psi_init(b.sp, g, 2.0);
  for (int i = 0; i < g.n; ++i) {
    const double t = g.node(i);
    if (t <= 1.0) CHECK(P.U(i, 0) == 1.0);
    if (t >= 3.0) CHECK(P.U(i, 0) == 0.0);
    CHECK(P.U(i, 0) >= 0.0);
    CHECK(P.U(i, 0) <= 1.0);
  }
}

TEST_CASE("translation scaling of the anchored energy on random profiles") {
  Bistable b;
  const Grid1D g(10.0, 401);
  Gen gen(17);
  for (int trial = 0; trial < 10; ++trial) {
    const double center = gen.uniform(-2.0, 2.0);
    SliceProfile P = psi_init(b.sp, g, center);
    for (int i = 0; i < g.n; ++i)
      if (std::abs(g.node(i) - center) < 1.0) P.U(i, 0) += 0.1 * gen.normal() * (1.0 - std::abs(g.node(i) - center));
    const double c = gen.uniform(0.1, 0.7);
    const int s = gen.integer(1, 20);
    SliceProfile Q = P;
    for (int i = 0; i < g.n; ++i) Q.U(i, 0) = P.U(std::max(i - s, 0), 0);
    const double e0 = profile_weighted_energy(b.sp, P, c, 0.0);
    const double e1 = profile_weighted_energy(b.sp, Q, c, 0.0);
    CHECK(e1 == doctest::Approx(std::exp(c * s * g.h) * e0).epsilon(1e-12));
  }
}

TEST_CASE("speed formula and residual on the exact profile") {
  Bistable b;
  const Grid1D g(20.0, 2001);
  const SliceProfile P = exact_profile(g);
  CHECK(formula_speed(b.sp, P) == doctest::Approx(kExact).epsilon(1e-3));
  CHECK(profile_residual(b.sp, P, kExact) <= 1e-4);
  const EquipartitionReport eq = equipartition_check(b.sp, P, kExact);
  CHECK(eq.max_residual <= 1e-3 * eq.scale);
}

TEST_CASE("classification is a step function in c") {
  Bistable b;
  SpeedProblem pb;
  pb.sp = &b.sp;
  pb.x1 = Grid1D(20.0, 401);
  pb.ledger = compute_ledger(b.sp);
  int last = 0;
  int switches = 0;
  for (double c : {0.2, 0.3, 0.4, 0.5}) {
    const int cls = classify_speed(pb, c).cls == SpeedClass::below ? 0 : 1;
    if (cls != last) ++switches;
    last = cls;
  }
  CHECK(last == 1);
  CHECK(switches == 1);
}

TEST_CASE("coarse bistable solve lands near the exact speed") {
  Bistable b;
  SpeedProblem pb;
  pb.sp = &b.sp;
  pb.x1 = Grid1D(20.0, 401);
  pb.ledger = compute_ledger(b.sp);
  const SpeedSearchResult r = find_speed(pb, 0.1, 1.0, 1e-3);
  CHECK(std::abs(r.c_star - kExact) <= 2e-2);
  CHECK(r.unconstrained);
  CHECK(std::abs(r.formula_speed - r.c_star) / r.c_star <= 5e-2);
  for (std::size_t i = 1; i < r.probes.size(); ++i) CHECK(r.probes[i].c != r.probes[i - 1].c);
}

TEST_CASE("bracket expansion when the bracket sits below c*") {
  Bistable b;
  SpeedProblem pb;
  pb.sp = &b.sp;
  pb.x1 = Grid1D(20.0, 401);
  pb.ledger = compute_ledger(b.sp);
  const SpeedSearchResult r = find_speed(pb, 0.05, 0.1, 1e-3);
  CHECK(std::abs(r.c_star - kExact) <= 2e-2);
}

TEST_CASE("uniqueness identity holds for a solution against itself") {
  Bistable b;
  const Grid1D g(20.0, 2001);
  const SliceProfile P = exact_profile(g);
  const UniquenessReport u = uniqueness_audit(b.sp, kExact, P, kExact, P);
  CHECK(u.residual <= 1e-3 * (1.0 + std::abs(u.lhs)));
}

TEST_CASE("argument checks") {
  Bistable b;
  SpeedProblem pb;
  pb.sp = &b.sp;
  pb.x1 = Grid1D(5.0, 51);
  CHECK_THROWS_AS(find_speed(pb, 0.5, 0.1, 1e-3), Error);
  CHECK_THROWS_AS(find_speed(pb, 0.1, 0.5, 0.0), Error);
}
