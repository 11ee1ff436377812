#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tw/constants.hpp"
#include "tw/slice_problem.hpp"

namespace tw {

// Slices at x1 <= -T must stay within r_minus of the minus family and slices
// at x1 >= T within r_plus of the plus family. Every slice is clipped to the
// pointwise ball of radius r_max.
struct ConstraintSpec {
  double T = 1.0;
  double r_minus = 0.0;
  double r_plus = 0.0;
  double r_max = 0.0;
};

ConstraintSpec make_constraints(const SliceProblem& sp, const ConstantsLedger& ledger, double T);

struct SolverOptions {
  double tol = 1e-7;     // max-norm of the projected preconditioned step
  int max_iter = 20000;
  int memory = 8;
  double precond_alpha = 1.0;
  double max_step = 0.5;  // cap on the max-norm of one step (0 disables)
  // Sign-test threshold on the energy anchored at the front.
  double classify_tol = 1e-6;
  // Stop as soon as the anchored energy certifies "below".
  bool early_exit = false;
  // Phase condition: the slice nearest to x1 = pin_at is held on the
  // hyperplane halfway between the two representatives, which removes the
  // translation mode. Without it the front drifts toward a constraint.
  bool pin_front = true;
  double pin_at = 0.0;
  bool operator==(const SolverOptions&) const = default;
};

struct ConstrainedMinimum {
  SliceProfile profile;
  double c = 0.0;
  double t_ref = 0.0;       // anchor of the reported energy
  double energy = 0.0;      // E_c anchored at t_ref
  double front = 0.0;       // first x1 where the distances to both families agree
  double T = 0.0;
  bool active_minus = false, active_plus = false;
  int iterations = 0;
  double step_norm = 0.0;
  bool converged = false;
  bool stopped_early = false;
  std::string reason;
};

// The interpolating profile: minus representative for x1 <= center - 1, plus
// representative for x1 >= center + 1, linear in between.
SliceProfile psi_init(const SliceProblem& sp, const Grid1D& x1, double center = 0.0);

// Projected L-BFGS on the anchored weighted energy with the separable
// preconditioner. The energy is re-anchored at the front before returning.
ConstrainedMinimum minimize_constrained(const SliceProblem& sp, const SliceProfile& init, double c,
                                        const ConstraintSpec& cs, const SolverOptions& opts);

// Per-slice diagnostics shared by the entry-time scans and the checks below.
struct SliceScan {
  std::vector<double> x1;
  std::vector<double> energy;      // E(U(t)) - m_plus
  std::vector<double> dist_minus;  // L2 distance to the minus family
  std::vector<double> dist_plus;
};
SliceScan scan_slices(const SliceProblem& sp, const SliceProfile& P);
// First x1 with dist_minus >= dist_plus (linear interpolation).
double front_position(const SliceScan& scan);

struct EntryTimes {
  double t_minus = 0.0, t_plus = 0.0;
  int i_minus = -1, i_plus = -1;
};
// t- = last slice with E - m+ <= a + E_max and dist- <= rho0-/2; t+ = first
// slice with E - m+ <= E_max+ and dist+ <= rho0+/2. Throws "undefined entry
// time" when a scan finds nothing.
EntryTimes entry_times(const SliceProblem& sp, const SliceProfile& P, const ConstantsLedger& L);

struct OscillationReport {
  bool ok = false;
  bool minus_ok = false;     // dist- < rho0-/2 on every slice up to t-
  bool plus_ok = false;      // dist+ < rho0+/2 on every slice from t+
  bool positivity_ok = false;  // E >= m+ on every slice after t-
  int bad_minus = -1;        // last slice before t- with rho0-/2 <= dist- <= rho0-
  int bad_plus = -1;         // first slice after t+ with rho0+/2 <= dist+ <= rho0+
};
OscillationReport no_oscillation_check(const SliceProblem& sp, const SliceProfile& P,
                                       const ConstantsLedger& L);

struct Surgery {
  SliceProfile profile;
  std::string kind;  // "minus-hold-splice", "minus-hold-plateau" or "plus-freeze"
  double energy_before = 0.0;
  double energy_after = 0.0;
  double margin = 0.0;  // energy_before - energy_after
};
// Applies the first applicable cut-and-paste move. Throws "not applicable"
// when the profile does not oscillate in either of the two ways.
Surgery competitor_moves(const SliceProblem& sp, const SliceProfile& P, const ConstantsLedger& L,
                         double c, double t_ref);

enum class SpeedClass { below, at_or_above };
const char* to_string(SpeedClass s);

struct SpeedProblem {
  const SliceProblem* sp = nullptr;
  Grid1D x1;
  ConstantsLedger ledger;
  SolverOptions opts;
  double T0 = 0.0;            // <= 0: max(1, 2 T_star(c)) capped at T_cap_fraction * L1
  double T_cap_fraction = 0.25;
};

double schedule_T0(const SpeedProblem& pb, double c);

struct Classification {
  SpeedClass cls = SpeedClass::at_or_above;
  ConstrainedMinimum minimum;
};
Classification classify_speed(const SpeedProblem& pb, double c);

struct ProbeRecord {
  double c = 0.0;
  SpeedClass cls = SpeedClass::at_or_above;
  double energy = 0.0;
  int iterations = 0;
  bool converged = false;
};

struct SpeedSearchResult {
  double c_star = 0.0;
  double c_lo = 0.0, c_hi = 0.0;
  ConstrainedMinimum final_min;
  bool unconstrained = false;
  std::vector<double> T_tried;
  double formula_speed = 0.0;
  double residual = 0.0;
  std::vector<ProbeRecord> probes;
  std::vector<std::string> notes;
};
// Bisection on the sign test, then a release solve at the midpoint with the T
// schedule {T0, 2 T0, 4 T0}. Throws "bracket not found"; a release failure is
// reported through `unconstrained` and a note.
SpeedSearchResult find_speed(const SpeedProblem& pb, double lo, double hi, double tol_c);

// (m+ - m-) / int |d U / d x1|^2.
double formula_speed(const SliceProblem& sp, const SliceProfile& P);
// Max node residual of -c dU/dx1 - Lap U + grad V(U).
double profile_residual(const SliceProblem& sp, const SliceProfile& P, double c);

struct EquipartitionReport {
  double max_residual = 0.0;  // max |d/dt(E - |U'|^2/2) - c |U'|^2| over interior nodes
  double scale = 0.0;         // max c |U'|^2, for relative statements
  double minus_bound_violation = 0.0;  // max over t < t- of |U'|^2/2 - (E - m-)
  double plus_bound_violation = 0.0;   // max over t > t+ of (E - m+) - |U'|^2/2
  bool entry_times_defined = false;
};
EquipartitionReport equipartition_check(const SliceProblem& sp, const SliceProfile& P, double c,
                                        const ConstantsLedger* L = nullptr);

struct UniquenessReport {
  double lhs = 0.0;       // c1 E_{c1}(U2; window)
  double rhs = 0.0;       // (c1 - c2) int |U2'|^2 w + boundary bracket
  double residual = 0.0;  // |lhs - rhs|
  double cross_12 = 0.0;  // E_{c1}(U2) on the window
  double cross_21 = 0.0;  // E_{c2}(U1) on the window
  double contradiction = 0.0;  // (c1 - c2) int |U2'|^2 e^{c1 t} / c1
};
// Evaluates the cross-energy identity for two solutions on the same grid,
// anchored at t_ref, with central differences and trapezoid sums over the
// interior nodes.
UniquenessReport uniqueness_audit(const SliceProblem& sp, double c1, const SliceProfile& U1, double c2,
                                  const SliceProfile& U2, double t_ref = 0.0);

}  // namespace tw
