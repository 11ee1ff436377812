#pragma once

#include <span>
#include <string>

#include "tw/potential.hpp"

namespace tw {

// Uniform grid on [-L, L]. The node count is odd so that t = 0 is a node.
struct Grid1D {
  double L = 1.0;
  int n = 3;
  double h = 1.0;

  Grid1D() = default;
  Grid1D(double half_length, int n_points);
  double node(int i) const { return -L + i * h; }
};

// A discretized path q : [-L, L] -> R^k. Row i holds q(t_i).
struct Curve1D {
  Grid1D grid;
  RMat values;
  Vec left;   // sigma^-
  Vec right;  // sigma^+

  Curve1D() = default;
  Curve1D(const Grid1D& g, int k, const Vec& sigma_minus, const Vec& sigma_plus);
  int k() const { return static_cast<int>(values.cols()); }
  int n() const { return grid.n; }
  const double* row(int i) const { return values.row(i).data(); }
  double* row(int i) { return values.row(i).data(); }
};

// A field U(x1, x2) stored slice by slice: row i of `data` is the x2-curve at
// x1 = x1.node(i), flattened node-major (node j, component a at j*k + a).
struct Profile2D {
  Grid1D x1;
  Grid1D x2;
  int k = 1;
  RMat data;
  Vec left;   // sigma^- (x2 -> -inf)
  Vec right;  // sigma^+ (x2 -> +inf)

  Profile2D() = default;
  Profile2D(const Grid1D& g1, const Grid1D& g2, int k, const Vec& sigma_minus, const Vec& sigma_plus);
  Curve1D slice(int i) const;
  void set_slice(int i, const Curve1D& c);
};

double trapezoid_integral(std::span<const double> samples, double h);

// q' with second-order central differences inside and second-order one-sided
// stencils at the two ends.
RMat central_difference(const Curve1D& curve);

// Returns t -> q(t + tau), resampled with Catmull-Rom cubics. Content that
// enters from outside the grid is padded with the boundary wells.
Curve1D translate_curve(const Curve1D& curve, double tau);

// Straight-line interpolation between the two wells on [-1, 1], constant outside.
Curve1D linear_ramp(const Grid1D& g, const Vec& sigma_minus, const Vec& sigma_plus,
                    double half_width = 1.0);

// Discrete norms on a common grid. The H1 norm adds the forward-difference
// seminorm to the L2 part.
double l2_distance(const Curve1D& a, const Curve1D& b);
double h1_distance(const Curve1D& a, const Curve1D& b);
double sup_distance(const Curve1D& a, const Curve1D& b);

// CSV: one row per node (t, q1..qk).
void write_curve_csv(const std::string& path, const Curve1D& c);
Curve1D read_curve_csv(const std::string& path, const Vec& sigma_minus, const Vec& sigma_plus);
// CSV: one row per (x1, x2) node (x1, x2, U1..Uk).
void write_profile_csv(const std::string& path, const Profile2D& p);

}  // namespace tw
