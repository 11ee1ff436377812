#pragma once

#include "tw/grid.hpp"
#include "tw/potential.hpp"

namespace tw {

struct WeightedEnergyParams {
  double c = 0.0;
  double t_ref = 0.0;                   // the weight is e^{c (t - t_ref)}
  const PotentialSpec* potential = nullptr;
  double m_plus = 0.0;                  // level subtracted from the density
};

// E(q) = int |q'|^2/2 + V(q): forward differences for the kinetic part and the
// trapezoid rule for the potential part.
double energy_1d(const Curve1D& q, const PotentialSpec& pot);

// L2 gradient of energy_1d: the row for node i is -q''_i + grad V(q_i), so that
// dE[phi] = h * sum_i <grad_i, phi_i>. End rows are zero (pinned nodes).
RMat energy_1d_gradient(const Curve1D& q, const PotentialSpec& pot);

// Raw pointer variants used inside solvers: q has n rows of k values.
double energy_1d_raw(const double* q, int n, int k, double h, const PotentialSpec& pot);
void energy_1d_gradient_raw(const double* q, int n, int k, double h, const PotentialSpec& pot,
                            double* g);

// Exponentially weighted energies. The grid is treated as a window of the
// lattice h*Z: nodes left of the window repeat the first node, which adds the
// geometric tail h w_0 e(q_0) e^{-ch}/(1 - e^{-ch}). The right end is pinned
// at the zero level, so nothing lies beyond it. Kinetic cells use the exact
// cell average of the weight, so piecewise-linear curves are integrated
// exactly. With these conventions grid-aligned translations scale the energy
// by e^{-c tau} up to roundoff.
double weighted_energy_1d(const Curve1D& q, const WeightedEnergyParams& params);
double weighted_energy_2d(const Profile2D& U, const WeightedEnergyParams& params);

// L2(dx1 dx2) gradient of weighted_energy_2d over interior nodes of interior
// slices. Divided by the weight, it is the discrete -c dU/dx1 - Lap U + grad V(U).
RMat weighted_energy_2d_gradient(const Profile2D& U, const WeightedEnergyParams& params);

// Max over interior nodes of |-c dU/dx1 - Lap U + grad V(U)| with central
// differences and the 5-point Laplacian.
double profile_residual(const Profile2D& U, double c, const PotentialSpec& pot);
// Same for a single R^k-valued profile: |-c u' - u'' + grad V(u)|.
double profile_residual_1d(const Curve1D& u, double c, const PotentialSpec& pot);

// Weight helpers shared with the solvers.
double node_weight(double c, double t, double t_ref);
double cell_weight(double c, double t_left, double h, double t_ref);
double left_tail_factor(double c, double h);  // e^{-ch} / (1 - e^{-ch})
// Throws when c (L - t_ref) would overflow the weight.
void check_weight_range(double c, double L, double t_ref);

}  // namespace tw
