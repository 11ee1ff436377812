#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Sparse>

#include "tw/grid.hpp"
#include "tw/potential.hpp"

namespace tw {

enum class HeteroclinicKind { global, local };
const char* to_string(HeteroclinicKind kind);

struct SpectralReport {
  std::vector<double> eigenvalues;  // lowest few, ascending
  double kernel_alignment = 0.0;    // |cos| between the first eigenvector and q'
  double gap = 0.0;                 // second eigenvalue
};

struct HeteroclinicResult {
  Curve1D curve;
  double energy = 0.0;
  HeteroclinicKind kind = HeteroclinicKind::global;
  double gradient_norm = 0.0;  // max-norm of -q'' + grad V(q) over interior nodes
  std::string phase_convention = "first midpoint-hyperplane crossing at t = 0";
  int iterations = 0;
  bool constraint_active = false;  // only meaningful for kind == local
  double constraint_distance = 0.0;
};

struct HeteroclinicOptions {
  double tol = 1e-8;
  int max_iter = 200000;
  // Shift of the tridiagonal (I - Laplacian) preconditioner.
  double precond_shift = 1.0;
  // Largest max-norm change of the curve in one step.
  double max_step = 0.25;
};

// Minimizes energy_1d with both end nodes pinned, then fixes the phase and
// polishes once more.
HeteroclinicResult minimize_heteroclinic(const PotentialSpec& pot, const WellPair& wells,
                                         const Curve1D& init, double tol,
                                         const HeteroclinicOptions& opts = {});

// Local minimizer of `pot` in the H1 ball of the given radius around the
// translate orbit of anchor.curve. Throws "constraint saturated" when the
// minimizer ends up on the boundary of the ball.
HeteroclinicResult minimize_local_heteroclinic(const PotentialSpec& pot,
                                               const HeteroclinicResult& anchor, double radius,
                                               double tol, const HeteroclinicOptions& opts = {});

// Translate so that the first crossing of <q - (s- + s+)/2, s+ - s-> = 0 is at t = 0.
Curve1D fix_phase(const Curve1D& curve);
// Location of that first crossing (linear interpolation between nodes).
double midpoint_crossing(const Curve1D& curve);

enum class NormKind { L2, H1 };

struct TranslateProjection {
  double tau = 0.0;
  double distance = 0.0;
  bool ambiguous = false;  // a second local minimum within 1% of the best
};

// argmin over tau of || q - rep(. + tau) ||. With hint == nullptr the search
// scans tau in [-L/2, L/2]; with a hint it searches hint +/- half_width.
TranslateProjection project_nearest_translate(const Curve1D& q, const Curve1D& rep,
                                              NormKind norm = NormKind::L2);
TranslateProjection project_nearest_translate_near(const Curve1D& q, const Curve1D& rep,
                                                   NormKind norm, double hint, double half_width);

// Tridiagonal-by-blocks matrix of A(q) v = -v'' + D^2V(q) v on interior nodes
// (Dirichlet ends), size (n-2)k, node-major.
Eigen::SparseMatrix<double> assemble_spectral_operator(const Curve1D& q, const PotentialSpec& pot);
// Lowest `count` eigenpairs of that operator (LAPACK banded solver).
SpectralReport spectral_report(const Curve1D& q, const PotentialSpec& pot, int count = 4);

// Pointwise radial projection onto the closed ball of radius r_max.
Curve1D clip_to_ball(const Curve1D& q, double r_max);

// Initial guesses.
Curve1D tanh_init(const Grid1D& g, const Vec& sigma_minus, const Vec& sigma_plus,
                  double width = std::sqrt(2.0));
// Circular arc through the upper (sign = +1) or lower (sign = -1) half plane
// joining (-1, 0) to (1, 0), traversed with a tanh clock of the given width.
Curve1D gl_arc_init(const Grid1D& g, int sign, double radius = 0.95, double width = 12.0);
// Path through (0, s2 a, s3 a) for the three-dimensional example.
Curve1D zs_init(const Grid1D& g, int s2, int s3, double amplitude = 0.45, double width = 2.0);
// The circle competitor q_T (ramp, arc of radius tanh(T/sqrt 2), ramp) sampled on g.
Curve1D gl_competitor(const Grid1D& g, double T);

}  // namespace tw
