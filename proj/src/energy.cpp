#include "tw/energy.hpp"

#include <cmath>
#include <vector>

#include "tw/errors.hpp"

namespace tw {

double node_weight(double c, double t, double t_ref) { return std::exp(c * (t - t_ref)); }

double cell_weight(double c, double t_left, double h, double t_ref) {
  // (1/h) int_{t_left}^{t_left+h} e^{c(t - t_ref)} dt
  const double x = c * h;
  const double factor = std::abs(x) < 1e-8 ? 1.0 + 0.5 * x : std::expm1(x) / x;
  return std::exp(c * (t_left - t_ref)) * factor;
}

double left_tail_factor(double c, double h) {
  const double x = c * h;
  return 1.0 / std::expm1(x);
}

void check_weight_range(double c, double L, double t_ref) {
  if (c * (L - t_ref) > 600.0 || c * (-L - t_ref) < -600.0)
    fail(ErrorKind::invalid_argument, "weight overflow - re-anchor or shrink domain");
}

double energy_1d_raw(const double* q, int n, int k, double h, const PotentialSpec& pot) {
  double kin = 0.0, potl = 0.0;
  for (int i = 0; i + 1 < n; ++i) {
    for (int a = 0; a < k; ++a) {
      const double d = q[(i + 1) * k + a] - q[i * k + a];
      kin += d * d;
    }
  }
  for (int i = 0; i < n; ++i) {
    const double w = (i == 0 || i == n - 1) ? 0.5 : 1.0;
    potl += w * pot.value(q + i * k);
  }
  return kin / (2.0 * h) + h * potl;
}

void energy_1d_gradient_raw(const double* q, int n, int k, double h, const PotentialSpec& pot,
                            double* g) {
  const double ih2 = 1.0 / (h * h);
  for (int a = 0; a < k; ++a) {
    g[a] = 0.0;
    g[(n - 1) * k + a] = 0.0;
  }
  for (int i = 1; i + 1 < n; ++i) {
    double* gi = g + i * k;
    pot.gradient(q + i * k, gi);
    for (int a = 0; a < k; ++a)
      gi[a] += (2.0 * q[i * k + a] - q[(i - 1) * k + a] - q[(i + 1) * k + a]) * ih2;
  }
}

double energy_1d(const Curve1D& q, const PotentialSpec& pot) {
  return energy_1d_raw(q.values.data(), q.n(), q.k(), q.grid.h, pot);
}

RMat energy_1d_gradient(const Curve1D& q, const PotentialSpec& pot) {
  RMat g(q.n(), q.k());
  energy_1d_gradient_raw(q.values.data(), q.n(), q.k(), q.grid.h, pot, g.data());
  return g;
}

double weighted_energy_1d(const Curve1D& q, const WeightedEnergyParams& p) {
  if (!p.potential) fail(ErrorKind::invalid_argument, "weighted_energy_1d: no potential");
  const Grid1D& g = q.grid;
  check_weight_range(p.c, g.L, p.t_ref);
  const double h = g.h;
  double kin = 0.0, potl = 0.0;
  for (int i = 0; i + 1 < g.n; ++i) {
    const double d2 = (q.values.row(i + 1) - q.values.row(i)).squaredNorm();
    kin += cell_weight(p.c, g.node(i), h, p.t_ref) * d2;
  }
  for (int i = 0; i < g.n; ++i)
    potl += node_weight(p.c, g.node(i), p.t_ref) * (p.potential->value(q.row(i)) - p.m_plus);
  const double tail = node_weight(p.c, g.node(0), p.t_ref) *
                      (p.potential->value(q.row(0)) - p.m_plus) * left_tail_factor(p.c, h);
  return kin / (2.0 * h) + h * (potl + tail);
}

namespace {

std::vector<double> slice_energies(const Profile2D& U, const PotentialSpec& pot) {
  std::vector<double> e(U.x1.n);
  const int n2 = U.x2.n;
#pragma omp parallel for schedule(static)
  for (int i = 0; i < U.x1.n; ++i)
    e[i] = energy_1d_raw(U.data.row(i).data(), n2, U.k, U.x2.h, pot);
  return e;
}

}  // namespace

double weighted_energy_2d(const Profile2D& U, const WeightedEnergyParams& p) {
  if (!p.potential) fail(ErrorKind::invalid_argument, "weighted_energy_2d: no potential");
  check_weight_range(p.c, U.x1.L, p.t_ref);
  const double h1 = U.x1.h, h2 = U.x2.h;
  const auto e = slice_energies(U, *p.potential);
  double kin = 0.0, potl = 0.0;
  for (int i = 0; i + 1 < U.x1.n; ++i) {
    // Pinned x2 ends contribute nothing; interior x2 nodes carry weight h2.
    const double d2 = (U.data.row(i + 1) - U.data.row(i)).squaredNorm() * h2;
    kin += cell_weight(p.c, U.x1.node(i), h1, p.t_ref) * d2;
  }
  for (int i = 0; i < U.x1.n; ++i) potl += node_weight(p.c, U.x1.node(i), p.t_ref) * (e[i] - p.m_plus);
  const double tail =
      node_weight(p.c, U.x1.node(0), p.t_ref) * (e[0] - p.m_plus) * left_tail_factor(p.c, h1);
  return kin / (2.0 * h1) + h1 * (potl + tail);
}

RMat weighted_energy_2d_gradient(const Profile2D& U, const WeightedEnergyParams& p) {
  if (!p.potential) fail(ErrorKind::invalid_argument, "weighted_energy_2d_gradient: no potential");
  const int n1 = U.x1.n, n2 = U.x2.n, k = U.k;
  const double h1 = U.x1.h, h2 = U.x2.h;
  RMat G = RMat::Zero(n1, n2 * k);
#pragma omp parallel for schedule(static)
  for (int i = 1; i < n1 - 1; ++i) {
    const double w = node_weight(p.c, U.x1.node(i), p.t_ref);
    const double wl = cell_weight(p.c, U.x1.node(i - 1), h1, p.t_ref);
    const double wr = cell_weight(p.c, U.x1.node(i), h1, p.t_ref);
    std::vector<double> gs(n2 * k);
    energy_1d_gradient_raw(U.data.row(i).data(), n2, k, h2, *p.potential, gs.data());
    for (int j = 1; j < n2 - 1; ++j) {
      for (int a = 0; a < k; ++a) {
        const int col = j * k + a;
        const double kin = (wl * (U.data(i, col) - U.data(i - 1, col)) -
                            wr * (U.data(i + 1, col) - U.data(i, col))) /
                           (h1 * h1);
        G(i, col) = kin + w * gs[col];
      }
    }
  }
  return G;
}

double profile_residual(const Profile2D& U, double c, const PotentialSpec& pot) {
  const int n1 = U.x1.n, n2 = U.x2.n, k = U.k;
  const double h1 = U.x1.h, h2 = U.x2.h;
  double m = 0.0;
  std::vector<double> g(k);
  for (int i = 1; i < n1 - 1; ++i) {
    for (int j = 1; j < n2 - 1; ++j) {
      pot.gradient(&U.data(i, j * k), g.data());
      double s = 0.0;
      for (int a = 0; a < k; ++a) {
        const int col = j * k + a;
        const double u = U.data(i, col);
        const double dx1 = (U.data(i + 1, col) - U.data(i - 1, col)) / (2.0 * h1);
        const double lap = (U.data(i + 1, col) - 2.0 * u + U.data(i - 1, col)) / (h1 * h1) +
                           (U.data(i, col + k) - 2.0 * u + U.data(i, col - k)) / (h2 * h2);
        const double r = -c * dx1 - lap + g[a];
        s += r * r;
      }
      m = std::max(m, std::sqrt(s));
    }
  }
  return m;
}

double profile_residual_1d(const Curve1D& u, double c, const PotentialSpec& pot) {
  const int n = u.n(), k = u.k();
  const double h = u.grid.h;
  double m = 0.0;
  std::vector<double> g(k);
  for (int i = 1; i < n - 1; ++i) {
    pot.gradient(u.row(i), g.data());
    double s = 0.0;
    for (int a = 0; a < k; ++a) {
      const double d1 = (u.values(i + 1, a) - u.values(i - 1, a)) / (2.0 * h);
      const double d2 = (u.values(i + 1, a) - 2.0 * u.values(i, a) + u.values(i - 1, a)) / (h * h);
      const double r = -c * d1 - d2 + g[a];
      s += r * r;
    }
    m = std::max(m, std::sqrt(s));
  }
  return m;
}

}  // namespace tw
