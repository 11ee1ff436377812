#include "tw/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "tw/errors.hpp"
#include "tw/io.hpp"
#include "tw/schema.hpp"

#ifndef TW_SCHEMA_DIR
#define TW_SCHEMA_DIR "schema"
#endif

namespace tw {

namespace {

using nlohmann::json;

json scalar_to_json(const std::string& s) {
  if (s == "true" || s == "True") return true;
  if (s == "false" || s == "False") return false;
  if (s == "null" || s == "~") return nullptr;
  if (!s.empty()) {
    char* end = nullptr;
    const long long i = std::strtoll(s.c_str(), &end, 10);
    if (*end == '\0') return i;
    const double d = std::strtod(s.c_str(), &end);
    if (*end == '\0') return d;
  }
  return s;
}

json yaml_to_json(const YAML::Node& n) {
  switch (n.Type()) {
    case YAML::NodeType::Map: {
      json o = json::object();
      for (const auto& kv : n) o[kv.first.as<std::string>()] = yaml_to_json(kv.second);
      return o;
    }
    case YAML::NodeType::Sequence: {
      json a = json::array();
      for (const auto& e : n) a.push_back(yaml_to_json(e));
      return a;
    }
    case YAML::NodeType::Scalar:
      // Quoted scalars stay strings.
      if (n.Tag() == "!") return n.as<std::string>();
      return scalar_to_json(n.as<std::string>());
    default:
      return nullptr;
  }
}

template <class T>
void get(const json& o, const char* key, T& out) {
  if (o.contains(key)) out = o[key].get<T>();
}

FamilyInit read_family(const json& o) {
  FamilyInit f;
  get(o, "type", f.type);
  get(o, "sign", f.sign);
  get(o, "radius", f.radius);
  get(o, "width", f.width);
  get(o, "s2", f.s2);
  get(o, "s3", f.s3);
  get(o, "amplitude", f.amplitude);
  get(o, "local", f.local);
  get(o, "local_radius", f.local_radius);
  return f;
}

void emit_family(YAML::Emitter& e, const FamilyInit& f) {
  e << YAML::BeginMap;
  e << YAML::Key << "type" << YAML::Value << f.type;
  e << YAML::Key << "sign" << YAML::Value << f.sign;
  e << YAML::Key << "radius" << YAML::Value << f.radius;
  e << YAML::Key << "width" << YAML::Value << f.width;
  e << YAML::Key << "s2" << YAML::Value << f.s2;
  e << YAML::Key << "s3" << YAML::Value << f.s3;
  e << YAML::Key << "amplitude" << YAML::Value << f.amplitude;
  e << YAML::Key << "local" << YAML::Value << f.local;
  e << YAML::Key << "local_radius" << YAML::Value << f.local_radius;
  e << YAML::EndMap;
}

void emit_list(YAML::Emitter& e, const std::vector<double>& v) {
  e << YAML::Flow << YAML::BeginSeq;
  for (double x : v) e << x;
  e << YAML::EndSeq;
}

}  // namespace

std::string schema_dir() {
  if (const char* env = std::getenv("TW_SCHEMA_DIR")) return env;
  return TW_SCHEMA_DIR;
}

ExperimentConfig parse_config(const std::string& text) {
  json doc;
  try {
    doc = yaml_to_json(YAML::Load(text));
  } catch (const YAML::Exception& e) {
    fail(ErrorKind::config, std::string("config: YAML parse error: ") + e.what());
  }
  if (!doc.is_object()) fail(ErrorKind::config, "config: top level must be a mapping");
  const std::vector<std::string> problems = validate_json(doc, load_schema("config"));
  if (!problems.empty()) {
    std::string msg = "config: " + problems.front();
    for (std::size_t i = 1; i < problems.size(); ++i) msg += "; " + problems[i];
    fail(ErrorKind::config, msg);
  }

  ExperimentConfig c;
  c.name = doc["name"].get<std::string>();
  c.mode = doc["mode"].get<std::string>();
  const json& pot = doc["potential"];
  c.potential = pot["name"].get<std::string>();
  if (pot.contains("params"))
    for (auto it = pot["params"].begin(); it != pot["params"].end(); ++it) c.params[it.key()] = it.value().get<double>();
  if (pot.contains("bump")) {
    const json& b = pot["bump"];
    c.bump.enabled = true;
    get(b, "delta", c.bump.delta);
    get(b, "radius", c.bump.radius);
    get(b, "at", c.bump.at);
    get(b, "center", c.bump.center);
    if (c.bump.at == "point" && c.bump.center.empty())
      fail(ErrorKind::config, "config: potential.bump.center is required when at = point");
  }
  c.well_minus = doc["wells"]["minus"].get<std::vector<double>>();
  c.well_plus = doc["wells"]["plus"].get<std::vector<double>>();
  if (c.well_minus.size() != c.well_plus.size())
    fail(ErrorKind::config, "config: wells.minus and wells.plus differ in dimension");
  if (doc.contains("families")) {
    if (doc["families"].contains("minus")) c.family_minus = read_family(doc["families"]["minus"]);
    if (doc["families"].contains("plus")) c.family_plus = read_family(doc["families"]["plus"]);
  }
  const json& g = doc["grid"];
  get(g, "L1", c.L1);
  get(g, "n1", c.n1);
  get(g, "L2", c.L2);
  get(g, "n2", c.n2);
  if (c.n1 % 2 == 0) fail(ErrorKind::config, "config: grid.n1 must be odd");
  if (c.mode == "plane" && c.n2 % 2 == 0) fail(ErrorKind::config, "config: grid.n2 must be odd");
  if (doc.contains("heteroclinic")) get(doc["heteroclinic"], "tol", c.heteroclinic_tol);
  if (doc.contains("solver")) {
    const json& s = doc["solver"];
    get(s, "tol", c.solver.tol);
    get(s, "max_iter", c.solver.max_iter);
    get(s, "memory", c.solver.memory);
    get(s, "precond_alpha", c.solver.precond_alpha);
    get(s, "max_step", c.solver.max_step);
    get(s, "classify_tol", c.solver.classify_tol);
    get(s, "pin_front", c.solver.pin_front);
    get(s, "pin_at", c.solver.pin_at);
  }
  if (doc.contains("schedule")) {
    get(doc["schedule"], "T0", c.T0);
    get(doc["schedule"], "cap_fraction", c.T_cap_fraction);
  }
  if (doc.contains("bisection")) {
    get(doc["bisection"], "lo", c.c_lo);
    get(doc["bisection"], "hi", c.c_hi);
    get(doc["bisection"], "tol_c", c.tol_c);
  }
  if (!(c.c_lo < c.c_hi)) fail(ErrorKind::config, "config: bisection.lo must be below bisection.hi");
  if (doc.contains("constants")) {
    const json& k = doc["constants"];
    get(k, "seed", c.ledger.seed);
    get(k, "rho_trials", c.ledger.rho_trials);
    get(k, "e_r_starts", c.ledger.e_r_starts);
    get(k, "nu_samples", c.ledger.nu_samples);
    get(k, "sublevel_samples", c.ledger.sublevel_samples);
    get(k, "safety", c.ledger.safety);
    get(k, "tol", c.ledger.tol);
    get(k, "max_iter", c.ledger.max_iter);
    get(k, "rho0_minus", c.ledger.rho0_minus);
    get(k, "rho0_plus", c.ledger.rho0_plus);
  }
  if (doc.contains("evolve")) {
    const json& e = doc["evolve"];
    get(e, "dt", c.evolve.dt);
    get(e, "horizon", c.evolve.horizon);
    get(e, "sample_dt", c.evolve.sample_dt);
    get(e, "eps", c.evolve.eps);
    get(e, "edge_margin", c.evolve.edge_margin);
    get(e, "snapshot_every", c.evolve.snapshot_every);
    get(e, "center", c.evolve_center);
  }
  if (doc.contains("verify")) {
    const json& v = doc["verify"];
    get(v, "noise_floor", c.rate_fit.noise_floor);
    get(v, "end_margin", c.rate_fit.end_margin);
    get(v, "min_window", c.rate_fit.min_window);
    get(v, "min_samples", c.rate_fit.min_samples);
    get(v, "tolerance", c.rate_fit.tolerance);
    get(v, "uniform_threshold", c.uniform_threshold);
  }
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) fail(ErrorKind::config, "config: cannot read " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const ExperimentConfig& c) {
  YAML::Emitter e;
  e.SetDoublePrecision(17);
  e << YAML::BeginMap;
  e << YAML::Key << "name" << YAML::Value << YAML::DoubleQuoted << c.name;
  e << YAML::Key << "mode" << YAML::Value << c.mode;

  e << YAML::Key << "potential" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "name" << YAML::Value << c.potential;
  if (!c.params.empty()) {
    e << YAML::Key << "params" << YAML::Value << YAML::BeginMap;
    for (const auto& [k, v] : c.params) e << YAML::Key << k << YAML::Value << v;
    e << YAML::EndMap;
  }
  if (c.bump.enabled) {
    e << YAML::Key << "bump" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "delta" << YAML::Value << c.bump.delta;
    e << YAML::Key << "radius" << YAML::Value << c.bump.radius;
    e << YAML::Key << "at" << YAML::Value << c.bump.at;
    if (!c.bump.center.empty()) {
      e << YAML::Key << "center" << YAML::Value;
      emit_list(e, c.bump.center);
    }
    e << YAML::EndMap;
  }
  e << YAML::EndMap;

  e << YAML::Key << "wells" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "minus" << YAML::Value;
  emit_list(e, c.well_minus);
  e << YAML::Key << "plus" << YAML::Value;
  emit_list(e, c.well_plus);
  e << YAML::EndMap;

  e << YAML::Key << "families" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "minus" << YAML::Value;
  emit_family(e, c.family_minus);
  e << YAML::Key << "plus" << YAML::Value;
  emit_family(e, c.family_plus);
  e << YAML::EndMap;

  e << YAML::Key << "grid" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "L1" << YAML::Value << c.L1 << YAML::Key << "n1" << YAML::Value << c.n1;
  e << YAML::Key << "L2" << YAML::Value << c.L2 << YAML::Key << "n2" << YAML::Value << c.n2;
  e << YAML::EndMap;

  e << YAML::Key << "heteroclinic" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "tol" << YAML::Value << c.heteroclinic_tol;
  e << YAML::EndMap;

  const SolverOptions& s = c.solver;
  e << YAML::Key << "solver" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "tol" << YAML::Value << s.tol;
  e << YAML::Key << "max_iter" << YAML::Value << s.max_iter;
  e << YAML::Key << "memory" << YAML::Value << s.memory;
  e << YAML::Key << "precond_alpha" << YAML::Value << s.precond_alpha;
  e << YAML::Key << "max_step" << YAML::Value << s.max_step;
  e << YAML::Key << "classify_tol" << YAML::Value << s.classify_tol;
  e << YAML::Key << "pin_front" << YAML::Value << s.pin_front;
  e << YAML::Key << "pin_at" << YAML::Value << s.pin_at;
  e << YAML::EndMap;

  e << YAML::Key << "schedule" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "T0" << YAML::Value << c.T0;
  e << YAML::Key << "cap_fraction" << YAML::Value << c.T_cap_fraction;
  e << YAML::EndMap;

  e << YAML::Key << "bisection" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "lo" << YAML::Value << c.c_lo;
  e << YAML::Key << "hi" << YAML::Value << c.c_hi;
  e << YAML::Key << "tol_c" << YAML::Value << c.tol_c;
  e << YAML::EndMap;

  const LedgerOptions& k = c.ledger;
  e << YAML::Key << "constants" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "seed" << YAML::Value << k.seed;
  e << YAML::Key << "rho_trials" << YAML::Value << k.rho_trials;
  e << YAML::Key << "e_r_starts" << YAML::Value << k.e_r_starts;
  e << YAML::Key << "nu_samples" << YAML::Value << k.nu_samples;
  e << YAML::Key << "sublevel_samples" << YAML::Value << k.sublevel_samples;
  e << YAML::Key << "safety" << YAML::Value << k.safety;
  e << YAML::Key << "tol" << YAML::Value << k.tol;
  e << YAML::Key << "max_iter" << YAML::Value << k.max_iter;
  e << YAML::Key << "rho0_minus" << YAML::Value << k.rho0_minus;
  e << YAML::Key << "rho0_plus" << YAML::Value << k.rho0_plus;
  e << YAML::EndMap;

  const EvolverOptions& v = c.evolve;
  e << YAML::Key << "evolve" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "dt" << YAML::Value << v.dt;
  e << YAML::Key << "horizon" << YAML::Value << v.horizon;
  e << YAML::Key << "sample_dt" << YAML::Value << v.sample_dt;
  e << YAML::Key << "eps" << YAML::Value << v.eps;
  e << YAML::Key << "edge_margin" << YAML::Value << v.edge_margin;
  e << YAML::Key << "center" << YAML::Value << c.evolve_center;
  e << YAML::Key << "snapshot_every" << YAML::Value << v.snapshot_every;
  e << YAML::EndMap;

  const RateFitOptions& r = c.rate_fit;
  e << YAML::Key << "verify" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "noise_floor" << YAML::Value << r.noise_floor;
  e << YAML::Key << "end_margin" << YAML::Value << r.end_margin;
  e << YAML::Key << "min_window" << YAML::Value << r.min_window;
  e << YAML::Key << "min_samples" << YAML::Value << r.min_samples;
  e << YAML::Key << "tolerance" << YAML::Value << r.tolerance;
  e << YAML::Key << "uniform_threshold" << YAML::Value << c.uniform_threshold;
  e << YAML::EndMap;

  e << YAML::EndMap;
  return std::string(e.c_str()) + "\n";
}

std::string config_hash(const ExperimentConfig& c) { return sha256_hex(serialize_config(c)); }

}  // namespace tw
