#pragma once

#include <limits>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "tw/heteroclinic.hpp"
#include "tw/slice_problem.hpp"

namespace tw {

// Sampling protocol for the nonconstructive constants. Everything is seeded,
// so identical inputs reproduce the ledger bit for bit.
struct LedgerOptions {
  unsigned seed = 20240601;
  int rho_trials = 50;        // perturbations per radius in the capture-radius sweep
  int e_r_starts = 6;         // multistart count for e_r
  int nu_samples = 200;       // samples per nu(r) inversion
  int sublevel_samples = 100; // samples for the sublevel-set check
  double safety = 0.5;        // factor applied to E_max (and its plus twin)
  double tol = 1e-7;          // projected-step tolerance of the shell minimizations
  int max_iter = 20000;
  // Manual capture radii; non-positive means "estimate".
  double rho0_minus = 0.0;
  double rho0_plus = 0.0;
  bool operator==(const LedgerOptions&) const = default;
};

struct ConstantsLedger {
  double rho0_minus = 0.0, rho0_plus = 0.0;
  double beta_minus = 0.0, beta_plus = 0.0;
  double beta_bar_minus = 0.0, beta_bar_plus = 0.0;
  double mu_minus = 0.0;
  double d0 = 0.0;
  // Spectral inputs of the beta estimates: gap above the kernel and the
  // largest negative part of D^2V along the family member.
  double lambda_minus = 0.0, lambda_plus = 0.0;
  double hess_neg_minus = 0.0, hess_neg_plus = 0.0;
  std::map<double, double> e_r_minus, e_r_plus;
  std::map<double, double> nu_minus, nu_plus;
  bool nu_conservative = false;  // some nu sweep hit its floor
  double delta0_minus = 0.0, r_frak_minus = 0.0;
  double eta0_plus = 0.0, r_hat_plus = 0.0;
  double E_max_raw = 0.0;        // before the safety factor
  double E_max = 0.0;            // minus-side bound used by the assumption checks
  double E_max_plus = 0.0;       // plus-side twin (safety applied)
  double m_minus = 0.0, m_plus = 0.0, gap = 0.0;
  double alpha_star = 0.0;       // min{E_max_plus, E_max + a}, a = m_minus - m_plus
  bool sublevel_ok = false;
  LedgerOptions protocol;
  std::vector<std::string> notes;
};

struct AssumptionReport {
  bool perturbation_ok = false;
  double perturbation_margin = 0.0;  // gap / E_max
  bool convergence_ok = false;
  double convergence_margin = 0.0;   // gap / ((mu^- d0)^2 / 2)
  bool sublevel_ok = false;
  std::vector<std::string> notes;
};

// Distance between the rho/2 neighbourhoods of the two translate orbits: the
// minimum over relative shifts of the L2 distance, minus (rho- + rho+)/2.
// Throws "families overlap" when the result is not positive.
double compute_d0(const HeteroclinicResult& q_minus, const HeteroclinicResult& q_plus,
                  double rho0_minus, double rho0_plus);
double compute_d0(const SliceProblem& sp, double rho0_minus, double rho0_plus);
// min over tau of || q_minus - q_plus(. + tau) ||_L2 (distance of the wells for points).
double family_separation(const SliceProblem& sp);

// Random smooth slice perturbation with L2 norm `norm`, supported where the
// family member is in transition (curves) or in a random direction (points).
// Pinned entries are zero and the component along q' is removed.
Vec random_slice_perturbation(const SliceProblem& sp, Side s, std::mt19937_64& rng, double norm);

// Capture radius: convexity radius of V around the well for points; for curves
// the largest dyadic fraction of 0.45 times the family separation at which all
// sampled perturbations have an unambiguous nearest translate.
double estimate_rho0(const SliceProblem& sp, Side s, const LedgerOptions& opts);

// Gap above the kernel (lambda_2 of A(q) for curves, lambda_min(D^2V) at the
// well for points) and max_t of the negative part of D^2V(q(t)).
void spectral_inputs(const SliceProblem& sp, Side s, double* lambda, double* hess_neg);
// beta = 2 / lambda for points; for curves the H1 version
// beta = 2 (1 + (1 + M) / lambda_2), M the negative part above.
double estimate_beta(bool is_curve, double lambda, double hess_neg);

// Best energy found over slices at distance in [r, rho0] from the family:
// projected L-BFGS on the shell from several seeded starts. An upper estimate.
double estimate_e_r(const SliceProblem& sp, Side s, double r, double rho0, const LedgerOptions& opts);

struct NuEstimate {
  double value = 0.0;
  bool conservative = false;  // no sweep level qualified; value is the sweep floor
  double worst_energy = std::numeric_limits<double>::infinity();  // min E - m over violators
};
// Largest dyadic epsilon such that every sample in the rho0/2 neighbourhood
// with E - m <= epsilon lies within H1 distance r of the family.
NuEstimate estimate_nu(const SliceProblem& sp, Side s, double r, double rho0,
                       const LedgerOptions& opts);

// Samples slices with E < m_plus and checks that each lies within rho0_minus/2
// of the minus family. Returns true when every sample passes.
bool check_sublevel(const SliceProblem& sp, double rho0_minus, const LedgerOptions& opts,
                    std::vector<std::string>* notes = nullptr);

ConstantsLedger compute_ledger(const SliceProblem& sp, const LedgerOptions& opts = {});
AssumptionReport check_assumptions(const ConstantsLedger& ledger);

// (1/c) ln(-a/alpha_star + 1); infinity when alpha_star <= 0.
double transition_time_bound(const ConstantsLedger& ledger, double c);

struct CompetitorCheck {
  std::vector<double> T;
  std::vector<double> energy;
  bool decreasing = false;
  double energy_at_10 = 0.0;
  bool below_ac = false;  // E(q_10) < 2 sqrt(2) / 3
};
CompetitorCheck check_gl_competitor(const Grid1D& g, const std::vector<double>& Ts = {5.0, 10.0, 20.0});

}  // namespace tw
