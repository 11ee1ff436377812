#pragma once

#include <cmath>
#include <random>

#include "tw/grid.hpp"

// Seeded generators for the property tests.
struct Gen {
  std::mt19937_64 rng;
  explicit Gen(unsigned long long seed) : rng(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }
  double normal() { return std::normal_distribution<double>(0.0, 1.0)(rng); }

  tw::Vec vec(int k, double scale) {
    tw::Vec v(k);
    for (int a = 0; a < k; ++a) v(a) = scale * normal();
    return v;
  }

  // Random smooth curve: a tanh connection plus a few Gaussian bumps.
  tw::Curve1D curve(const tw::Grid1D& g, const tw::Vec& sm, const tw::Vec& sp, double bump_scale) {
    tw::Curve1D c(g, static_cast<int>(sm.size()), sm, sp);
    const int nb = integer(1, 4);
    std::vector<double> centers, widths;
    std::vector<tw::Vec> amps;
    for (int b = 0; b < nb; ++b) {
      centers.push_back(uniform(-0.5 * g.L, 0.5 * g.L));
      widths.push_back(uniform(0.5, 3.0));
      amps.push_back(vec(static_cast<int>(sm.size()), bump_scale));
    }
    const double w = uniform(0.8, 2.5);
    for (int i = 0; i < g.n; ++i) {
      const double t = g.node(i);
      const double s = 0.5 * (1.0 + std::tanh(t / w));
      tw::Vec q = (1.0 - s) * sm + s * sp;
      if (i > 0 && i + 1 < g.n)
        for (int b = 0; b < nb; ++b) q += amps[b] * std::exp(-std::pow((t - centers[b]) / widths[b], 2));
      c.values.row(i) = q.transpose();
    }
    return c;
  }
};
