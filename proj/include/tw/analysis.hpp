#pragma once

#include <string>
#include <vector>

#include "tw/slice_problem.hpp"

namespace tw {

struct RateFitOptions {
  double noise_floor = 1e-6;   // distances below 10x this are not used
  double end_margin = 2.0;     // x1 distance kept away from the domain ends
  double min_window = 2.0;     // shortest acceptable fit window in x1
  int min_samples = 5;
  double tolerance = 0.05;     // one-sided: fitted >= predicted - tolerance
  bool operator==(const RateFitOptions&) const = default;
};

struct RateFit {
  Side side = Side::plus;
  double fitted = 0.0;     // decay exponent of the slice distance
  double predicted = 0.0;
  double window_lo = 0.0, window_hi = 0.0;
  int samples = 0;
  double r2 = 0.0;
  bool ok = false;         // fitted >= predicted - tolerance and r2 >= 0.95
};

// Fits log dist(U(x1), family) linearly over the automatic window: from the
// first slice past the front whose distance is at most half the largest
// distance on that side, out to the last slice above 10x the noise floor.
// Throws "window too short" or "distance floor reached".
RateFit fit_exponential_rate(const SliceProblem& sp, const SliceProfile& P, Side side, double predicted,
                             const RateFitOptions& opts = {});

struct UniformConvergenceReport {
  double end_minus = 0.0;  // sup-norm distance of the first slice to the minus family
  double end_plus = 0.0;
  double row_minus = 0.0;  // max |U - sigma-| over x1 and the outer quarter x2 <= -0.75 L2 (curves)
  double row_plus = 0.0;
  double threshold = 5e-2;
  bool ok = false;
};
UniformConvergenceReport uniform_convergence_check(const SliceProblem& sp, const SliceProfile& P,
                                                   double threshold = 5e-2);

struct H1AuditOptions {
  bool align = false;       // compare each slice to its nearest translate of the target
  double shrink = 0.5;      // last value must be at most shrink * first
  double slack = 1e-9;      // allowed increase between consecutive entries
  int skip = 0;             // transient entries ignored by the monotonicity tests
};

struct H1AuditReport {
  std::vector<double> l2, h1, energy_gap;
  bool hypothesis_ok = false;   // L2 distance and |E - E(target)| both shrink
  bool conclusion_ok = false;   // H1 distance shrinks
  std::string verdict;          // "confirmed", "hypothesis failed" or "conclusion failed"
};
H1AuditReport h1_convergence_audit(const std::vector<Curve1D>& slices, const Curve1D& target,
                                   const PotentialSpec& pot, const H1AuditOptions& opts = {});

struct BistableReference {
  Curve1D profile;  // u(xi) = 1 / (1 + exp(xi / sqrt 2)), centred at xi = 0
  double speed = 0.0;
};
BistableReference exact_bistable_reference(double a_param, const Grid1D& g);
// -c u' - u'' + W'(u) for the closed form, evaluated with exact derivatives.
double bistable_ansatz_residual(double a_param, double xi);

}  // namespace tw
