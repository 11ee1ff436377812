#include "tw/grid.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <vector>

#include "tw/errors.hpp"

namespace tw {

Grid1D::Grid1D(double half_length, int n_points) : L(half_length), n(n_points) {
  if (!(half_length > 0.0)) fail(ErrorKind::invalid_argument, "grid: half length must be positive");
  if (n_points < 3 || n_points % 2 == 0)
    fail(ErrorKind::invalid_argument, "grid: node count must be odd and at least 3");
  h = 2.0 * L / (n - 1);
}

Curve1D::Curve1D(const Grid1D& g, int k, const Vec& sigma_minus, const Vec& sigma_plus)
    : grid(g), values(RMat::Zero(g.n, k)), left(sigma_minus), right(sigma_plus) {}

Profile2D::Profile2D(const Grid1D& g1, const Grid1D& g2, int k_, const Vec& sigma_minus,
                     const Vec& sigma_plus)
    : x1(g1), x2(g2), k(k_), data(RMat::Zero(g1.n, g2.n * k_)), left(sigma_minus), right(sigma_plus) {}

Curve1D Profile2D::slice(int i) const {
  Curve1D c(x2, k, left, right);
  for (int j = 0; j < x2.n; ++j)
    for (int a = 0; a < k; ++a) c.values(j, a) = data(i, j * k + a);
  return c;
}

void Profile2D::set_slice(int i, const Curve1D& c) {
  for (int j = 0; j < x2.n; ++j)
    for (int a = 0; a < k; ++a) data(i, j * k + a) = c.values(j, a);
}

double trapezoid_integral(std::span<const double> f, double h) {
  if (f.size() < 2) fail(ErrorKind::invalid_argument, "trapezoid_integral: need at least 2 samples");
  double s = 0.5 * (f.front() + f.back());
  for (std::size_t i = 1; i + 1 < f.size(); ++i) s += f[i];
  return s * h;
}

RMat central_difference(const Curve1D& q) {
  const int n = q.n(), k = q.k();
  if (n < 3) fail(ErrorKind::invalid_argument, "central_difference: need at least 3 nodes");
  const double h = q.grid.h;
  RMat d(n, k);
  for (int i = 1; i + 1 < n; ++i) d.row(i) = (q.values.row(i + 1) - q.values.row(i - 1)) / (2.0 * h);
  d.row(0) = (-3.0 * q.values.row(0) + 4.0 * q.values.row(1) - q.values.row(2)) / (2.0 * h);
  d.row(n - 1) =
      (3.0 * q.values.row(n - 1) - 4.0 * q.values.row(n - 2) + q.values.row(n - 3)) / (2.0 * h);
  return d;
}

Curve1D translate_curve(const Curve1D& q, double tau) {
  const Grid1D& g = q.grid;
  if (!(std::abs(tau) < g.L)) fail(ErrorKind::invalid_argument, "translate_curve: |tau| must be < L");
  const int n = g.n, k = q.k();
  Curve1D out(g, k, q.left, q.right);
  auto sample = [&](long j, int a) -> double {
    if (j < 0) return q.left[a];
    if (j >= n) return q.right[a];
    return q.values(j, a);
  };
  double shift = tau / g.h;
  // Snap shifts that are grid-aligned up to roundoff so they stay exact.
  if (std::abs(shift - std::round(shift)) < 1e-9) shift = std::round(shift);
  const double whole = std::floor(shift);
  const double frac = shift - whole;
  const long s = static_cast<long>(whole);
  for (int i = 0; i < n; ++i) {
    const long j = i + s;
    for (int a = 0; a < k; ++a) {
      if (frac == 0.0) {
        out.values(i, a) = sample(j, a);
        continue;
      }
      const double p0 = sample(j - 1, a), p1 = sample(j, a), p2 = sample(j + 1, a),
                   p3 = sample(j + 2, a);
      const double x = frac;
      out.values(i, a) = p1 + 0.5 * x * (p2 - p0 + x * (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3 +
                                                        x * (3.0 * (p1 - p2) + p3 - p0)));
    }
  }
  return out;
}

Curve1D linear_ramp(const Grid1D& g, const Vec& sm, const Vec& sp, double half_width) {
  Curve1D c(g, static_cast<int>(sm.size()), sm, sp);
  for (int i = 0; i < g.n; ++i) {
    const double t = g.node(i);
    const double s = std::clamp((t + half_width) / (2.0 * half_width), 0.0, 1.0);
    c.values.row(i) = ((1.0 - s) * sm + s * sp).transpose();
  }
  return c;
}

namespace {
void check_same_grid(const Curve1D& a, const Curve1D& b) {
  if (a.n() != b.n() || a.k() != b.k() || a.grid.L != b.grid.L)
    fail(ErrorKind::invalid_argument, "curves live on different grids");
}
}  // namespace

double l2_distance(const Curve1D& a, const Curve1D& b) {
  check_same_grid(a, b);
  std::vector<double> f(a.n());
  for (int i = 0; i < a.n(); ++i) f[i] = (a.values.row(i) - b.values.row(i)).squaredNorm();
  return std::sqrt(trapezoid_integral(f, a.grid.h));
}

double h1_distance(const Curve1D& a, const Curve1D& b) {
  check_same_grid(a, b);
  const double h = a.grid.h;
  double kin = 0.0;
  for (int i = 0; i + 1 < a.n(); ++i) {
    const auto da = a.values.row(i + 1) - a.values.row(i);
    const auto db = b.values.row(i + 1) - b.values.row(i);
    kin += (da - db).squaredNorm() / h;
  }
  const double l2 = l2_distance(a, b);
  return std::sqrt(l2 * l2 + kin);
}

double sup_distance(const Curve1D& a, const Curve1D& b) {
  check_same_grid(a, b);
  double m = 0.0;
  for (int i = 0; i < a.n(); ++i) m = std::max(m, (a.values.row(i) - b.values.row(i)).norm());
  return m;
}

void write_curve_csv(const std::string& path, const Curve1D& c) {
  std::ofstream os(path);
  if (!os) fail(ErrorKind::io, "cannot write " + path);
  os << "t";
  for (int a = 0; a < c.k(); ++a) os << ",q" << (a + 1);
  os << "\n" << std::setprecision(17);
  for (int i = 0; i < c.n(); ++i) {
    os << c.grid.node(i);
    for (int a = 0; a < c.k(); ++a) os << "," << c.values(i, a);
    os << "\n";
  }
}

Curve1D read_curve_csv(const std::string& path, const Vec& sm, const Vec& sp) {
  std::ifstream is(path);
  if (!is) fail(ErrorKind::io, "cannot read " + path);
  std::string line;
  std::getline(is, line);
  std::vector<std::vector<double>> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> row;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    rows.push_back(std::move(row));
  }
  if (rows.size() < 3) fail(ErrorKind::io, path + ": too few rows");
  const int n = static_cast<int>(rows.size());
  const int k = static_cast<int>(rows[0].size()) - 1;
  Grid1D g(-rows.front()[0], n);
  Curve1D c(g, k, sm, sp);
  for (int i = 0; i < n; ++i)
    for (int a = 0; a < k; ++a) c.values(i, a) = rows[i][a + 1];
  return c;
}

void write_profile_csv(const std::string& path, const Profile2D& p) {
  std::ofstream os(path);
  if (!os) fail(ErrorKind::io, "cannot write " + path);
  os << "x1,x2";
  for (int a = 0; a < p.k; ++a) os << ",U" << (a + 1);
  os << "\n" << std::setprecision(17);
  for (int i = 0; i < p.x1.n; ++i) {
    for (int j = 0; j < p.x2.n; ++j) {
      os << p.x1.node(i) << "," << p.x2.node(j);
      for (int a = 0; a < p.k; ++a) os << "," << p.data(i, j * p.k + a);
      os << "\n";
    }
  }
}

}  // namespace tw
