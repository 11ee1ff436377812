#pragma once

#include <string>
#include <vector>

#include "tw/slice_problem.hpp"

namespace tw {

// Semi-implicit stepper for w_t - Lap w = -eps^{-2} grad V(w) on the x1 grid
// (times the x2 grid of the slice problem for curve families). Boundary rows
// and, for curves, the first and last x2 node of every slice are Dirichlet data
// taken from the state and never change.
class Evolver {
 public:
  Evolver(const SliceProblem& sp, const Grid1D& x1, double eps = 1.0);

  // (I - dt Lap_h) w_{n+1} = w_n - dt grad V_eps(w_n). Throws "blow-up" when
  // the max node norm exceeds blowup_factor times the reference radius.
  void step(RMat& w, double dt) const;
  // h1 h2 [sum over edges |dw|^2 / (2 h^2) + sum over interior nodes V_eps(w)].
  double free_energy(const RMat& w) const;
  // 2 / max eigenvalue of D^2 V_eps over the nodes of w.
  double stable_dt(const RMat& w) const;

  double eps() const { return eps_; }
  double reference_radius() const { return r_ref_; }
  double blowup_factor = 10.0;

 private:
  const SliceProblem* sp_;
  Grid1D x1_;
  double eps_;
  double r_ref_ = 1.0;
  int n2_ = 1, J_ = 1;  // x2 nodes and interior sine modes (1 and 1 for points)
  Mat Q_;
  std::vector<double> lambda_;
};

struct EvolverOptions {
  double dt = 0.0;          // <= 0: 0.9 * stable_dt of the initial state, capped at 0.05
  double horizon = 40.0;
  double sample_dt = 0.5;   // time between front samples
  double eps = 1.0;
  double edge_margin = 2.0; // stop when the front comes this close to x1 = +-L
  int snapshot_every = 0;   // keep the state every k samples (0: none)
  bool operator==(const EvolverOptions&) const = default;
};

struct EvolutionResult {
  std::vector<double> times;
  std::vector<double> fronts;
  std::vector<double> free_energy;  // at the sample times
  double fitted_speed = 0.0;
  double fit_residual = 0.0;        // RMS deviation of the fitted line
  int fit_samples = 0;
  SliceProfile final_state;
  std::vector<SliceProfile> snapshots;
  double dt = 0.0;
  int steps = 0;
  std::string scheme;
  bool left_domain = false;  // stopped early; the fit uses the partial record
};

// Evolves `init` and fits x_front(t) by least squares over the second half of
// the record. The front is the first x1 where the slice distances to the two
// families agree (a midpoint-hyperplane crossing for points, L2 nearest
// translates for curves).
EvolutionResult measure_front_speed(const SliceProblem& sp, const SliceProfile& init,
                                    const EvolverOptions& opts);

// Least-squares slope of y against t; residual gets the RMS misfit.
double fit_line_slope(const std::vector<double>& t, const std::vector<double>& y, double* residual = nullptr);

}  // namespace tw
