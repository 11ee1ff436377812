#include "tw/potential.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "tw/errors.hpp"

namespace tw {

double PotentialSpec::V(const Vec& u) const { return model->value(u.data()); }

Vec PotentialSpec::grad(const Vec& u) const {
  Vec g(k);
  model->gradient(u.data(), g.data());
  return g;
}

Mat PotentialSpec::hess(const Vec& u) const {
  RMat h(k, k);
  model->hessian(u.data(), h.data());
  return h;
}

double smoothstep5(double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  return x * x * x * (10.0 - 15.0 * x + 6.0 * x * x);
}

double smoothstep5_d1(double x) {
  if (x <= 0.0 || x >= 1.0) return 0.0;
  const double y = x * (1.0 - x);
  return 30.0 * y * y;
}

double smoothstep5_d2(double x) {
  if (x <= 0.0 || x >= 1.0) return 0.0;
  return 60.0 * x * (1.0 - x) * (1.0 - 2.0 * x);
}

namespace {

class ScalarAllenCahn final : public PotentialModel {
 public:
  int dim() const override { return 1; }
  double value(const double* u) const override {
    const double s = 1.0 - u[0] * u[0];
    return 0.25 * s * s;
  }
  void gradient(const double* u, double* g) const override { g[0] = -u[0] * (1.0 - u[0] * u[0]); }
  void hessian(const double* u, double* h) const override { h[0] = 3.0 * u[0] * u[0] - 1.0; }
};

// (1 - |u|^2)^2 / 4 on R^2, optionally plus u2^2 phi(|u|^2) with phi a
// quintic ramp from 0 at s0 to 1 at s1.
class GinzburgLandau final : public PotentialModel {
 public:
  GinzburgLandau() = default;
  GinzburgLandau(double s0, double s1) : perturbed_(true), s0_(s0), s1_(s1) {}

  int dim() const override { return 2; }

  double value(const double* u) const override {
    const double s = u[0] * u[0] + u[1] * u[1];
    double v = 0.25 * (1.0 - s) * (1.0 - s);
    if (perturbed_) v += u[1] * u[1] * phi(s);
    return v;
  }

  void gradient(const double* u, double* g) const override {
    const double s = u[0] * u[0] + u[1] * u[1];
    g[0] = -(1.0 - s) * u[0];
    g[1] = -(1.0 - s) * u[1];
    if (perturbed_) {
      const double p = phi(s), dp = dphi(s), w = u[1] * u[1];
      g[0] += 2.0 * w * dp * u[0];
      g[1] += 2.0 * u[1] * p + 2.0 * w * dp * u[1];
    }
  }

  void hessian(const double* u, double* h) const override {
    const double s = u[0] * u[0] + u[1] * u[1];
    h[0] = -(1.0 - s) + 2.0 * u[0] * u[0];
    h[1] = 2.0 * u[0] * u[1];
    h[2] = h[1];
    h[3] = -(1.0 - s) + 2.0 * u[1] * u[1];
    if (perturbed_) {
      // d/du of 2 u2 phi e2 + 2 u2^2 phi' u
      const double p = phi(s), dp = dphi(s), ddp = ddphi(s), w = u[1] * u[1];
      const double e2[2] = {0.0, 1.0};
      for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 2; ++b) {
          double v = 2.0 * p * e2[a] * e2[b];
          v += 4.0 * u[1] * dp * (e2[a] * u[b] + u[a] * e2[b]);
          v += 4.0 * w * ddp * u[a] * u[b];
          if (a == b) v += 2.0 * w * dp;
          h[2 * a + b] += v;
        }
      }
    }
  }

 private:
  double phi(double s) const { return smoothstep5((s - s0_) / (s1_ - s0_)); }
  double dphi(double s) const { return smoothstep5_d1((s - s0_) / (s1_ - s0_)) / (s1_ - s0_); }
  double ddphi(double s) const {
    const double w = s1_ - s0_;
    return smoothstep5_d2((s - s0_) / w) / (w * w);
  }

  bool perturbed_ = false;
  double s0_ = 0.0, s1_ = 1.0;
};

class ZunigaSternberg final : public PotentialModel {
 public:
  int dim() const override { return 3; }

  double value(const double* u) const override {
    const double p = sq(1.0 - u[0] * u[0]);
    return u[0] * u[0] * p + sq(u[1] * u[1] - 0.5 * p) + sq(u[2] * u[2] - 0.5 * p);
  }

  void gradient(const double* u, double* g) const override {
    const double x = u[0];
    const double p = sq(1.0 - x * x);
    const double dp = -4.0 * x * (1.0 - x * x);
    const double A = u[1] * u[1] - 0.5 * p;
    const double B = u[2] * u[2] - 0.5 * p;
    g[0] = 2.0 * x * p + x * x * dp - dp * (A + B);
    g[1] = 4.0 * u[1] * A;
    g[2] = 4.0 * u[2] * B;
  }

  void hessian(const double* u, double* h) const override {
    const double x = u[0];
    const double p = sq(1.0 - x * x);
    const double dp = -4.0 * x * (1.0 - x * x);
    const double ddp = 12.0 * x * x - 4.0;
    const double A = u[1] * u[1] - 0.5 * p;
    const double B = u[2] * u[2] - 0.5 * p;
    h[0] = 2.0 * p + 4.0 * x * dp + x * x * ddp - ddp * (A + B) + dp * dp;
    h[1] = h[3] = -2.0 * dp * u[1];
    h[2] = h[6] = -2.0 * dp * u[2];
    h[4] = 4.0 * A + 8.0 * u[1] * u[1];
    h[5] = h[7] = 0.0;
    h[8] = 4.0 * B + 8.0 * u[2] * u[2];
  }

 private:
  static double sq(double v) { return v * v; }
};

// W(u) = -int_0^u s(1-s)(s-a) ds; local minimum 0 at u = 0, global at u = 1.
class UnbalancedBistable final : public PotentialModel {
 public:
  explicit UnbalancedBistable(double a) : a_(a) {}
  int dim() const override { return 1; }
  double value(const double* u) const override {
    const double x = u[0];
    return a_ * x * x / 2.0 - (1.0 + a_) * x * x * x / 3.0 + x * x * x * x / 4.0;
  }
  void gradient(const double* u, double* g) const override {
    const double x = u[0];
    g[0] = x * (x - a_) * (x - 1.0);
  }
  void hessian(const double* u, double* h) const override {
    const double x = u[0];
    h[0] = 3.0 * x * x - 2.0 * (1.0 + a_) * x + a_;
  }

 private:
  double a_;
};

// V + delta * chi with chi = 1 on B(u0, r), 0 outside B(u0, 2r), quintic in between.
class Bump final : public PotentialModel {
 public:
  Bump(std::shared_ptr<const PotentialModel> base, double delta, Vec center, double radius)
      : base_(std::move(base)), delta_(delta), c_(std::move(center)), r_(radius) {}

  int dim() const override { return base_->dim(); }

  double value(const double* u) const override {
    return base_->value(u) + delta_ * profile(dist(u));
  }

  void gradient(const double* u, double* g) const override {
    base_->gradient(u, g);
    const double d = dist(u);
    if (d <= r_ || d >= 2.0 * r_) return;
    const double f1 = -smoothstep5_d1((d - r_) / r_) / r_;
    for (int a = 0; a < dim(); ++a) g[a] += delta_ * f1 * (u[a] - c_[a]) / d;
  }

  void hessian(const double* u, double* h) const override {
    base_->hessian(u, h);
    const double d = dist(u);
    if (d <= r_ || d >= 2.0 * r_) return;
    const double x = (d - r_) / r_;
    const double f1 = -smoothstep5_d1(x) / r_;
    const double f2 = -smoothstep5_d2(x) / (r_ * r_);
    const int k = dim();
    for (int a = 0; a < k; ++a) {
      const double na = (u[a] - c_[a]) / d;
      for (int b = 0; b < k; ++b) {
        const double nb = (u[b] - c_[b]) / d;
        const double id = a == b ? 1.0 : 0.0;
        h[a * k + b] += delta_ * (f2 * na * nb + f1 / d * (id - na * nb));
      }
    }
  }

 private:
  double dist(const double* u) const {
    double s = 0.0;
    for (int a = 0; a < dim(); ++a) s += (u[a] - c_[a]) * (u[a] - c_[a]);
    return std::sqrt(s);
  }
  double profile(double d) const { return 1.0 - smoothstep5((d - r_) / r_); }

  std::shared_ptr<const PotentialModel> base_;
  double delta_;
  Vec c_;
  double r_;
};

Vec vec(std::initializer_list<double> v) {
  Vec out(static_cast<Eigen::Index>(v.size()));
  int i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

double default_growth_radius(const std::vector<Vec>& wells) {
  double m = 0.0;
  for (const auto& w : wells) m = std::max(m, w.norm());
  return 2.0 * m + 1.0;
}

}  // namespace

PotentialSpec make_scalar_allen_cahn() {
  PotentialSpec p;
  p.name = "allen_cahn";
  p.k = 1;
  p.wells = {vec({-1.0}), vec({1.0})};
  p.well_levels = {0.0, 0.0};
  p.growth_radius = default_growth_radius(p.wells);
  p.model = std::make_shared<ScalarAllenCahn>();
  return p;
}

PotentialSpec make_ginzburg_landau() {
  PotentialSpec p;
  p.name = "ginzburg_landau";
  p.k = 2;
  p.wells = {vec({-1.0, 0.0}), vec({1.0, 0.0})};
  p.well_levels = {0.0, 0.0};
  p.growth_radius = default_growth_radius(p.wells);
  p.manifold_zero_set = true;
  p.model = std::make_shared<GinzburgLandau>();
  return p;
}

PotentialSpec make_perturbed_gl(double T_bar) {
  if (!(T_bar > 0.0)) fail(ErrorKind::invalid_argument, "perturbed_gl: T_bar must be positive");
  const double rho = std::tanh(T_bar / std::sqrt(2.0));
  const double eps = (1.0 - rho * rho) / 4.0;
  PotentialSpec p;
  p.name = "perturbed_gl";
  p.k = 2;
  p.wells = {vec({-1.0, 0.0}), vec({1.0, 0.0})};
  p.well_levels = {0.0, 0.0};
  p.growth_radius = default_growth_radius(p.wells);
  p.params = {{"T_bar", T_bar}, {"phi_s0", rho * rho + eps}, {"phi_s1", 1.0 - eps}};
  p.model = std::make_shared<GinzburgLandau>(rho * rho + eps, 1.0 - eps);
  return p;
}

PotentialSpec make_zuniga_sternberg() {
  const double r = 1.0 / std::sqrt(2.0);
  PotentialSpec p;
  p.name = "zuniga_sternberg";
  p.k = 3;
  p.wells = {vec({-1.0, 0.0, 0.0}), vec({1.0, 0.0, 0.0}), vec({0.0, r, r}),
             vec({0.0, -r, r}),     vec({0.0, r, -r}),    vec({0.0, -r, -r})};
  p.well_levels.assign(p.wells.size(), 0.0);
  p.growth_radius = default_growth_radius(p.wells);
  p.model = std::make_shared<ZunigaSternberg>();
  return p;
}

PotentialSpec make_bump_perturbation(const PotentialSpec& base, double delta, const Vec& center,
                                     double radius) {
  if (!(delta >= 0.0)) fail(ErrorKind::invalid_argument, "bump: delta must be nonnegative");
  if (!(radius > 0.0)) fail(ErrorKind::invalid_argument, "bump: radius must be positive");
  if (center.size() != base.k) fail(ErrorKind::invalid_argument, "bump: center has wrong dimension");
  for (const auto& w : base.wells) {
    if ((w - center).norm() < 2.0 * radius)
      fail(ErrorKind::invalid_argument, "bump: a well lies inside the support ball B(u0, 2r)");
  }
  PotentialSpec p = base;
  p.name = "bump(" + base.name + ")";
  p.params["bump_delta"] = delta;
  p.params["bump_radius"] = radius;
  for (int a = 0; a < base.k; ++a) p.params["bump_center_" + std::to_string(a)] = center[a];
  p.model = std::make_shared<Bump>(base.model, delta, center, radius);
  return p;
}

PotentialSpec make_unbalanced_bistable(double a_param) {
  if (!(a_param > 0.0 && a_param < 0.5))
    fail(ErrorKind::invalid_argument, "unbalanced_bistable: a_param must lie in (0, 1/2)");
  PotentialSpec p;
  p.name = "unbalanced_bistable";
  p.k = 1;
  // Listed as (sigma_minus, sigma_plus): the global well first.
  p.wells = {vec({1.0}), vec({0.0})};
  p.well_levels = {(2.0 * a_param - 1.0) / 12.0, 0.0};
  p.growth_radius = default_growth_radius(p.wells);
  p.params = {{"a_param", a_param}};
  p.model = std::make_shared<UnbalancedBistable>(a_param);
  return p;
}

PotentialSpec make_potential(const std::string& name, const std::map<std::string, double>& params) {
  auto get = [&](const char* key) {
    auto it = params.find(key);
    if (it == params.end())
      fail(ErrorKind::config, "potential '" + name + "' needs parameter '" + key + "'");
    return it->second;
  };
  if (name == "allen_cahn") return make_scalar_allen_cahn();
  if (name == "ginzburg_landau") return make_ginzburg_landau();
  if (name == "perturbed_gl") return make_perturbed_gl(get("T_bar"));
  if (name == "zuniga_sternberg") return make_zuniga_sternberg();
  if (name == "unbalanced_bistable") return make_unbalanced_bistable(get("a_param"));
  fail(ErrorKind::config, "unknown potential name '" + name + "'");
}

std::vector<std::string> check_potential(const PotentialSpec& pot, unsigned seed, int samples) {
  std::vector<std::string> problems;
  const int k = pot.k;
  for (std::size_t i = 0; i < pot.wells.size(); ++i) {
    const Vec& w = pot.wells[i];
    const double v = pot.V(w);
    if (std::abs(v - pot.well_levels[i]) > 1e-12)
      problems.push_back("V differs from its declared level at well " + std::to_string(i));
    Eigen::SelfAdjointEigenSolver<Mat> es(pot.hess(w));
    if (!(es.eigenvalues().minCoeff() > 0.0))
      problems.push_back("Hessian not positive definite at well " + std::to_string(i));
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> box(-2.0, 2.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double floor_level = *std::min_element(pot.well_levels.begin(), pot.well_levels.end());
  for (int s = 0; s < samples; ++s) {
    Vec u(k);
    for (int a = 0; a < k; ++a) u[a] = box(rng);
    double dmin = 1e300;
    for (const auto& w : pot.wells) dmin = std::min(dmin, (u - w).norm());
    if (!pot.manifold_zero_set && dmin > 1e-2) {
      // Away from the wells V must sit strictly above the lowest well level,
      // and strictly above zero unless the potential is the unbalanced case.
      const double v = pot.V(u);
      if (!(v > floor_level))
        problems.push_back("V not above its minimum level at a sampled point");
      if (floor_level == 0.0 && !(v > 0.0))
        problems.push_back("V not positive away from the wells");
    }
    Vec dir(k);
    for (int a = 0; a < k; ++a) dir[a] = gauss(rng);
    dir.normalize();
    const Vec far = dir * (pot.growth_radius * (1.0 + std::abs(box(rng))));
    if (!(pot.grad(far).dot(far) > 0.0))
      problems.push_back("<grad V(u), u> not positive beyond the growth radius");
  }
  return problems;
}

}  // namespace tw
