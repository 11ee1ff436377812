#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace tw {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using RMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Pointwise kernel of a potential on R^k. Implementations are immutable, so one
// instance may be evaluated from several threads at once.
class PotentialModel {
 public:
  virtual ~PotentialModel() = default;
  virtual int dim() const = 0;
  virtual double value(const double* u) const = 0;
  virtual void gradient(const double* u, double* g) const = 0;
  // Row-major k x k.
  virtual void hessian(const double* u, double* h) const = 0;
};

struct PotentialSpec {
  std::string name;
  int k = 1;
  std::vector<Vec> wells;
  // V at each listed well. Zero except for the unbalanced scalar case, whose
  // global minimum sits below zero.
  std::vector<double> well_levels;
  double growth_radius = 1.0;
  // Ginzburg-Landau vanishes on a whole circle; the listed wells are only
  // bookkeeping points and the isolated-well checks must be skipped.
  bool manifold_zero_set = false;
  std::map<std::string, double> params;
  std::shared_ptr<const PotentialModel> model;

  double value(const double* u) const { return model->value(u); }
  void gradient(const double* u, double* g) const { model->gradient(u, g); }
  void hessian(const double* u, double* h) const { model->hessian(u, h); }

  double V(const Vec& u) const;
  Vec grad(const Vec& u) const;
  Mat hess(const Vec& u) const;
};

struct WellPair {
  Vec sigma_minus;
  Vec sigma_plus;
};

PotentialSpec make_scalar_allen_cahn();
PotentialSpec make_ginzburg_landau();
PotentialSpec make_perturbed_gl(double T_bar);
PotentialSpec make_zuniga_sternberg();
PotentialSpec make_bump_perturbation(const PotentialSpec& base, double delta, const Vec& center,
                                     double radius);
PotentialSpec make_unbalanced_bistable(double a_param);

// Name-based factory used by the configuration layer. Bump perturbations need a
// computed heteroclinic to place the bump and are assembled by the caller.
PotentialSpec make_potential(const std::string& name, const std::map<std::string, double>& params);

// Checks the pointwise well conditions on a potential: zeros at the wells,
// positive-definite Hessians there, positivity away from the wells and the
// outward growth condition beyond R0. Returns human readable problems, empty
// when everything passes.
std::vector<std::string> check_potential(const PotentialSpec& pot, unsigned seed = 7,
                                         int samples = 400);

// Quintic smoothstep S(x) = x^3 (10 - 15 x + 6 x^2) clamped to [0, 1], and its
// first two derivatives.
double smoothstep5(double x);
double smoothstep5_d1(double x);
double smoothstep5_d2(double x);

}  // namespace tw
