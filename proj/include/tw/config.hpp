#pragma once

#include <map>
#include <string>
#include <vector>

#include "tw/analysis.hpp"
#include "tw/constants.hpp"
#include "tw/evolver.hpp"
#include "tw/tw_solver.hpp"

namespace tw {

// Initial guess for one family member (plane mode only).
struct FamilyInit {
  std::string type = "tanh";  // tanh | gl_arc | zs
  int sign = 1;               // gl_arc: +1 upper, -1 lower half plane
  double radius = 0.9;        // gl_arc
  double width = 4.0;         // clock width of the init
  int s2 = 1, s3 = 1;         // zs
  double amplitude = 0.45;    // zs
  bool local = false;         // minimize in an H1 ball around the init instead
  double local_radius = 0.5;
  bool operator==(const FamilyInit&) const = default;
};

struct BumpConfig {
  bool enabled = false;
  double delta = 0.0;
  double radius = 0.3;
  std::string at = "plus_apex";  // plus_apex | point
  std::vector<double> center;    // used when at == "point"
  bool operator==(const BumpConfig&) const = default;
};

struct ExperimentConfig {
  std::string name;
  // line: slices are points of R^k (systems on the line);
  // plane: slices are curves in x2 and the families are heteroclinics.
  std::string mode = "line";
  std::string potential;
  std::map<std::string, double> params;
  BumpConfig bump;
  std::vector<double> well_minus, well_plus;
  FamilyInit family_minus, family_plus;

  double L1 = 20.0;
  int n1 = 2001;
  double L2 = 16.0;
  int n2 = 257;

  double heteroclinic_tol = 1e-9;
  SolverOptions solver;
  double T0 = 0.0;
  double T_cap_fraction = 0.25;
  double c_lo = 0.1, c_hi = 1.0, tol_c = 1e-4;
  LedgerOptions ledger;

  EvolverOptions evolve;
  double evolve_center = 0.0;  // front of the interpolating initial state

  RateFitOptions rate_fit;
  double uniform_threshold = 5e-2;

  bool operator==(const ExperimentConfig&) const = default;
};

// Parses and validates (against the shipped schema) a YAML config. Throws
// ErrorKind::config naming the offending field.
ExperimentConfig parse_config(const std::string& yaml_text);
ExperimentConfig load_config(const std::string& path);
// Canonical YAML text; parse_config(serialize_config(c)) == c.
std::string serialize_config(const ExperimentConfig& c);
// SHA-256 of the canonical text, hex.
std::string config_hash(const ExperimentConfig& c);

// Directory holding the JSON schemas (TW_SCHEMA_DIR overrides the build default).
std::string schema_dir();

}  // namespace tw
