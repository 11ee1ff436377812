#pragma once

#include <memory>
#include <vector>

#include "tw/grid.hpp"
#include "tw/linalg.hpp"
#include "tw/potential.hpp"

namespace tw {

enum class Side { minus, plus };

// One of the two minimizing families. For the planar problem a slice is a curve
// in x2 and the family is the translate orbit of a heteroclinic; for a system
// on the line a slice is a point of R^k and the family is a single well.
struct SliceFamily {
  bool is_curve = false;
  Vec point;
  Curve1D rep;
  double level = 0.0;  // m^- or m^+
};

// The slice space: energy of a slice, its gradient, distances to the families
// and the retractions used by the constrained solver. Slices are flat arrays;
// a curve slice is node-major (node j, component a at j*k + a) with its two
// end nodes pinned to the wells.
class SliceProblem {
 public:
  // Points: slices live in R^k.
  SliceProblem(const PotentialSpec& pot, SliceFamily minus, SliceFamily plus);
  // Curves on the x2 grid of the family representatives.
  static SliceProblem curves(const PotentialSpec& pot, SliceFamily minus, SliceFamily plus);

  bool is_curve() const { return minus_.is_curve; }
  int size() const { return m_; }
  int k() const { return k_; }
  // Weight of the Euclidean sum in the L2 inner product (h2 for curves, 1 for points).
  double mass() const { return mass_; }
  const Grid1D& x2() const { return minus_.rep.grid; }
  const PotentialSpec& potential() const { return *pot_; }
  const SliceFamily& family(Side s) const { return s == Side::minus ? minus_ : plus_; }
  double m_plus() const { return plus_.level; }
  double m_minus() const { return minus_.level; }

  double energy(const double* v) const;
  // Euclidean gradient of energy() with respect to the slice vector.
  void gradient(const double* v, double* g) const;
  // True for slice entries that never move (pinned curve ends).
  bool pinned(int idx) const;

  // L2 distance to the family; tau_hint (curves only) warm-starts the
  // translate search and receives the optimal shift.
  double distance(Side s, const double* v, double* tau_hint = nullptr) const;
  // Nearest family member written to out.
  void nearest(Side s, const double* v, double* out, double* tau_hint = nullptr) const;
  // If the slice is farther than radius from the family, moves it along the ray
  // from its nearest member onto the sphere of that radius. Returns true when
  // the slice moved. The cheap test at the hinted shift runs first.
  bool retract(Side s, double* v, double radius, double* tau_hint) const;
  // Pointwise radial clipping to the ball of radius r_max (the map P).
  bool clip(double* v, double r_max) const;

  Curve1D as_curve(const double* v) const;
  void from_curve(const Curve1D& c, double* v) const;
  // Slice vector of the family representative (point or phase-fixed curve).
  Vec representative(Side s) const;

 private:
  SliceProblem() = default;
  const PotentialSpec* pot_ = nullptr;
  SliceFamily minus_, plus_;
  int m_ = 0, k_ = 1;
  double mass_ = 1.0;
};

// x1-profile: row i is the slice at x1 = grid.node(i).
struct SliceProfile {
  Grid1D x1;
  RMat U;
};

// Anchored weighted energy of a profile. Both x1 ends are free; nodes to the
// left of the window repeat the first slice (lattice tail), nothing lies to
// the right of it. grad (optional) receives the Euclidean gradient.
double profile_weighted_energy(const SliceProblem& sp, const SliceProfile& P, double c, double t_ref,
                               RMat* grad = nullptr);

// Per-slice energies E(U(t_i)) and the kinetic density ||U'(t_i)||^2 (central
// differences, one-sided at the ends).
std::vector<double> slice_energies(const SliceProblem& sp, const SliceProfile& P);
std::vector<double> kinetic_density(const SliceProblem& sp, const SliceProfile& P);
// int ||dU/dx1||^2 dx1 with forward differences.
double kinetic_integral(const SliceProblem& sp, const SliceProfile& P);

// Exact inverse of K1 (x) M + h1 D_w (x) (K2 + alpha M), where K1 is the
// weighted x1 stiffness, D_w the node weights and K2 the x2 stiffness of a
// curve slice. The x2 part is diagonalized by the discrete sine transform, so
// each application is two dense transforms and one tridiagonal solve per mode.
class SeparablePreconditioner {
 public:
  SeparablePreconditioner(const SliceProblem& sp, const Grid1D& x1, double c, double t_ref,
                          double alpha);
  void apply(const RMat& g, RMat& out) const;

 private:
  const SliceProblem* sp_;
  int n1_ = 0, J_ = 0;
  Mat Q_;  // orthonormal sine basis on interior x2 nodes (curves only)
  std::vector<TridiagonalSolver> modes_;
};

}  // namespace tw
