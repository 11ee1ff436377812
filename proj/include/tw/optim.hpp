#pragma once

#include <functional>
#include <string>

#include "tw/potential.hpp"

namespace tw {

// Smooth objective on R^N with a Euclidean gradient. Rows that must not move
// (pinned nodes) simply report a zero gradient and an identity preconditioner.
struct Objective {
  std::function<double(const Vec& x)> value;
  std::function<double(const Vec& x, Vec& g)> value_and_gradient;
  // out = P^{-1} g for an SPD approximation P of the Hessian. Optional.
  std::function<void(const Vec& g, Vec& out)> precondition;
  // Maps x onto the feasible set in place; returns true when x changed.
  // Optional.
  std::function<bool(Vec& x)> project;
  // Called after every accepted step; returning true stops the iteration.
  std::function<bool(const Vec& x, double f, int iter)> monitor;
};

struct MinimizeOptions {
  int max_iter = 20000;
  int memory = 8;
  // Stop when max |P^{-1} g| over free rows (or the projected step for
  // constrained problems) drops below step_tol, or when max |g| drops below
  // grad_tol. A non-positive tolerance disables that test.
  double step_tol = 0.0;
  double grad_tol = 0.0;
  // Relative energy stagnation window.
  double f_rel_tol = 0.0;
  int stall_window = 200;
  // Caps the max-norm of the search direction (0 disables). Keeps the first
  // steps of an unscaled L-BFGS run from jumping across energy barriers.
  double max_step = 0.0;
  // Optional per-row scaling applied to g before the max-norm gradient test.
  Vec grad_scale;
};

struct MinimizeReport {
  int iterations = 0;
  double f = 0.0;
  double grad_norm = 0.0;  // scaled max-norm of g on the final iterate
  double step_norm = 0.0;  // max-norm of the last preconditioned direction
  bool converged = false;
  bool stopped_by_monitor = false;
  bool projection_active = false;
  std::string reason;
};

// Limited-memory BFGS with a preconditioned initial Hessian and Armijo
// backtracking. With a projection, each trial point is projected, the memory is
// cleared whenever the projection moves the point, and stationarity is
// measured on the projected step.
MinimizeReport minimize_lbfgs(const Objective& obj, Vec& x, const MinimizeOptions& opts);

}  // namespace tw
