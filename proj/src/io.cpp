#include "tw/io.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <openssl/evp.h>

#include "tw/errors.hpp"

namespace tw {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// JSON has no infinities; they travel as strings.
json num(double x) {
  if (std::isfinite(x)) return x;
  if (std::isnan(x)) return "nan";
  return x > 0 ? "inf" : "-inf";
}

double to_num(const json& j) {
  if (j.is_number()) return j.get<double>();
  const std::string s = j.get<std::string>();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  return std::numeric_limits<double>::quiet_NaN();
}

json map_to_json(const std::map<double, double>& m) {
  json a = json::array();
  for (const auto& [r, v] : m) a.push_back({{"r", num(r)}, {"value", num(v)}});
  return a;
}

std::map<double, double> map_from_json(const json& a) {
  std::map<double, double> m;
  for (const auto& e : a) m[to_num(e["r"])] = to_num(e["value"]);
  return m;
}

std::string hex(const unsigned char* d, unsigned n) {
  std::ostringstream os;
  for (unsigned i = 0; i < n; ++i) os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(d[i]);
  return os.str();
}

}  // namespace

std::string sha256_hex(const std::string& data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
    fail(ErrorKind::io, "sha256 failed");
  return hex(md, len);
}

std::string sha256_file(const std::string& path) { return sha256_hex(read_text_file(path)); }

std::string read_text_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) fail(ErrorKind::io, "cannot read " + path);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) fail(ErrorKind::io, "cannot write " + path);
  os << text;
  if (!os) fail(ErrorKind::io, "write failed: " + path);
}

void write_json(const std::string& path, const json& j) { write_text_file(path, j.dump(2) + "\n"); }

json read_json(const std::string& path) {
  try {
    return json::parse(read_text_file(path));
  } catch (const json::exception& e) {
    fail(ErrorKind::io, path + ": " + e.what());
  }
}

void write_slice_profile_csv(const std::string& path, const SliceProblem& sp, const SliceProfile& P) {
  std::ostringstream os;
  os << std::setprecision(17);
  const int k = sp.k();
  if (!sp.is_curve()) {
    os << "x1";
    for (int a = 0; a < k; ++a) os << ",U" << (a + 1);
    os << "\n";
    for (int i = 0; i < P.x1.n; ++i) {
      os << P.x1.node(i);
      for (int a = 0; a < k; ++a) os << "," << P.U(i, a);
      os << "\n";
    }
  } else {
    const Grid1D& g2 = sp.x2();
    os << "x1,x2";
    for (int a = 0; a < k; ++a) os << ",U" << (a + 1);
    os << "\n";
    for (int i = 0; i < P.x1.n; ++i)
      for (int j = 0; j < g2.n; ++j) {
        os << P.x1.node(i) << "," << g2.node(j);
        for (int a = 0; a < k; ++a) os << "," << P.U(i, j * k + a);
        os << "\n";
      }
  }
  write_text_file(path, os.str());
}

SliceProfile read_slice_profile_csv(const std::string& path, const SliceProblem& sp) {
  std::istringstream is(read_text_file(path));
  std::string line;
  std::getline(is, line);
  const int skip = sp.is_curve() ? 2 : 1;
  const int k = sp.k();
  std::vector<double> x1s;
  std::vector<double> vals;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> row;
    try {
      while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    } catch (const std::exception&) {
      fail(ErrorKind::io, path + ": malformed number");
    }
    if (static_cast<int>(row.size()) != skip + k) fail(ErrorKind::io, path + ": wrong column count");
    if (x1s.empty() || row[0] != x1s.back()) x1s.push_back(row[0]);
    for (int a = 0; a < k; ++a) vals.push_back(row[skip + a]);
  }
  const int n1 = static_cast<int>(x1s.size());
  if (n1 < 3) fail(ErrorKind::io, path + ": too few rows");
  if (static_cast<int>(vals.size()) != n1 * sp.size()) fail(ErrorKind::io, path + ": slice size mismatch");
  SliceProfile P{Grid1D(-x1s.front(), n1), RMat(n1, sp.size())};
  for (int i = 0; i < n1; ++i)
    for (int j = 0; j < sp.size(); ++j) P.U(i, j) = vals[static_cast<std::size_t>(i) * sp.size() + j];
  return P;
}

void write_series_csv(const std::string& path, const std::vector<std::string>& header,
                      const std::vector<std::vector<double>>& columns) {
  if (header.size() != columns.size()) fail(ErrorKind::invalid_argument, "series csv: header mismatch");
  std::ostringstream os;
  os << std::setprecision(17);
  for (std::size_t c = 0; c < header.size(); ++c) os << (c ? "," : "") << header[c];
  os << "\n";
  const std::size_t n = columns.empty() ? 0 : columns[0].size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < columns.size(); ++c) os << (c ? "," : "") << columns[c].at(i);
    os << "\n";
  }
  write_text_file(path, os.str());
}

json to_json(const SpectralReport& r) {
  json ev = json::array();
  for (double e : r.eigenvalues) ev.push_back(num(e));
  return {{"eigenvalues", ev}, {"kernel_alignment", num(r.kernel_alignment)}, {"gap", num(r.gap)}};
}

json to_json(const HeteroclinicResult& r) {
  return {{"energy", num(r.energy)},
          {"kind", to_string(r.kind)},
          {"gradient_norm", num(r.gradient_norm)},
          {"phase_convention", r.phase_convention},
          {"iterations", r.iterations},
          {"constraint_active", r.constraint_active},
          {"constraint_distance", num(r.constraint_distance)},
          {"grid", {{"L", r.curve.grid.L}, {"n", r.curve.grid.n}}}};
}

json to_json(const ConstantsLedger& L) {
  json notes = L.notes;
  const LedgerOptions& p = L.protocol;
  return {{"rho0_minus", num(L.rho0_minus)},
          {"rho0_plus", num(L.rho0_plus)},
          {"beta_minus", num(L.beta_minus)},
          {"beta_plus", num(L.beta_plus)},
          {"beta_bar_minus", num(L.beta_bar_minus)},
          {"beta_bar_plus", num(L.beta_bar_plus)},
          {"mu_minus", num(L.mu_minus)},
          {"d0", num(L.d0)},
          {"lambda_minus", num(L.lambda_minus)},
          {"lambda_plus", num(L.lambda_plus)},
          {"hess_neg_minus", num(L.hess_neg_minus)},
          {"hess_neg_plus", num(L.hess_neg_plus)},
          {"e_r_minus", map_to_json(L.e_r_minus)},
          {"e_r_plus", map_to_json(L.e_r_plus)},
          {"nu_minus", map_to_json(L.nu_minus)},
          {"nu_plus", map_to_json(L.nu_plus)},
          {"nu_conservative", L.nu_conservative},
          {"delta0_minus", num(L.delta0_minus)},
          {"r_frak_minus", num(L.r_frak_minus)},
          {"eta0_plus", num(L.eta0_plus)},
          {"r_hat_plus", num(L.r_hat_plus)},
          {"E_max_raw", num(L.E_max_raw)},
          {"E_max", num(L.E_max)},
          {"E_max_plus", num(L.E_max_plus)},
          {"m_minus", num(L.m_minus)},
          {"m_plus", num(L.m_plus)},
          {"gap", num(L.gap)},
          {"alpha_star", num(L.alpha_star)},
          {"sublevel_ok", L.sublevel_ok},
          {"protocol",
           {{"seed", p.seed},
            {"rho_trials", p.rho_trials},
            {"e_r_starts", p.e_r_starts},
            {"nu_samples", p.nu_samples},
            {"sublevel_samples", p.sublevel_samples},
            {"safety", p.safety},
            {"tol", p.tol},
            {"max_iter", p.max_iter},
            {"rho0_minus", p.rho0_minus},
            {"rho0_plus", p.rho0_plus}}},
          {"notes", notes}};
}

ConstantsLedger ledger_from_json(const json& j) {
  ConstantsLedger L;
  try {
    L.rho0_minus = to_num(j.at("rho0_minus"));
    L.rho0_plus = to_num(j.at("rho0_plus"));
    L.beta_minus = to_num(j.at("beta_minus"));
    L.beta_plus = to_num(j.at("beta_plus"));
    L.beta_bar_minus = to_num(j.at("beta_bar_minus"));
    L.beta_bar_plus = to_num(j.at("beta_bar_plus"));
    L.mu_minus = to_num(j.at("mu_minus"));
    L.d0 = to_num(j.at("d0"));
    L.lambda_minus = to_num(j.at("lambda_minus"));
    L.lambda_plus = to_num(j.at("lambda_plus"));
    L.hess_neg_minus = to_num(j.at("hess_neg_minus"));
    L.hess_neg_plus = to_num(j.at("hess_neg_plus"));
    L.e_r_minus = map_from_json(j.at("e_r_minus"));
    L.e_r_plus = map_from_json(j.at("e_r_plus"));
    L.nu_minus = map_from_json(j.at("nu_minus"));
    L.nu_plus = map_from_json(j.at("nu_plus"));
    L.nu_conservative = j.at("nu_conservative").get<bool>();
    L.delta0_minus = to_num(j.at("delta0_minus"));
    L.r_frak_minus = to_num(j.at("r_frak_minus"));
    L.eta0_plus = to_num(j.at("eta0_plus"));
    L.r_hat_plus = to_num(j.at("r_hat_plus"));
    L.E_max_raw = to_num(j.at("E_max_raw"));
    L.E_max = to_num(j.at("E_max"));
    L.E_max_plus = to_num(j.at("E_max_plus"));
    L.m_minus = to_num(j.at("m_minus"));
    L.m_plus = to_num(j.at("m_plus"));
    L.gap = to_num(j.at("gap"));
    L.alpha_star = to_num(j.at("alpha_star"));
    L.sublevel_ok = j.at("sublevel_ok").get<bool>();
    const json& p = j.at("protocol");
    L.protocol.seed = p.at("seed").get<unsigned>();
    L.protocol.rho_trials = p.at("rho_trials").get<int>();
    L.protocol.e_r_starts = p.at("e_r_starts").get<int>();
    L.protocol.nu_samples = p.at("nu_samples").get<int>();
    L.protocol.sublevel_samples = p.at("sublevel_samples").get<int>();
    L.protocol.safety = p.at("safety").get<double>();
    L.protocol.tol = p.at("tol").get<double>();
    L.protocol.max_iter = p.at("max_iter").get<int>();
    L.protocol.rho0_minus = p.at("rho0_minus").get<double>();
    L.protocol.rho0_plus = p.at("rho0_plus").get<double>();
    L.notes = j.at("notes").get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    fail(ErrorKind::io, std::string("ledger: ") + e.what());
  }
  return L;
}

json to_json(const AssumptionReport& r) {
  return {{"perturbation_ok", r.perturbation_ok},
          {"perturbation_margin", num(r.perturbation_margin)},
          {"convergence_ok", r.convergence_ok},
          {"convergence_margin", num(r.convergence_margin)},
          {"sublevel_ok", r.sublevel_ok},
          {"notes", r.notes}};
}

json to_json(const ConstrainedMinimum& m) {
  return {{"c", num(m.c)},
          {"t_ref", num(m.t_ref)},
          {"energy", num(m.energy)},
          {"front", num(m.front)},
          {"T", num(m.T)},
          {"constraints_active", {{"minus", m.active_minus}, {"plus", m.active_plus}}},
          {"iterations", m.iterations},
          {"step_norm", num(m.step_norm)},
          {"converged", m.converged},
          {"stopped_early", m.stopped_early},
          {"reason", m.reason}};
}

json to_json(const SpeedSearchResult& r) {
  json probes = json::array();
  for (const ProbeRecord& p : r.probes)
    probes.push_back({{"c", num(p.c)},
                      {"class", to_string(p.cls)},
                      {"energy", num(p.energy)},
                      {"iterations", p.iterations},
                      {"converged", p.converged}});
  json Ts = json::array();
  for (double T : r.T_tried) Ts.push_back(num(T));
  return {{"c_star", num(r.c_star)},
          {"bracket", {num(r.c_lo), num(r.c_hi)}},
          {"final", to_json(r.final_min)},
          {"unconstrained", r.unconstrained},
          {"T_tried", Ts},
          {"formula_speed", num(r.formula_speed)},
          {"residual", num(r.residual)},
          {"probes", probes},
          {"notes", r.notes}};
}

json to_json(const EvolutionResult& r) {
  return {{"fitted_speed", num(r.fitted_speed)},
          {"fit_residual", num(r.fit_residual)},
          {"fit_samples", r.fit_samples},
          {"dt", num(r.dt)},
          {"steps", r.steps},
          {"scheme", r.scheme},
          {"left_domain", r.left_domain},
          {"samples", r.times.size()}};
}

json to_json(const RateFit& r) {
  return {{"side", r.side == Side::plus ? "plus_infinity" : "minus_infinity"},
          {"fitted", num(r.fitted)},
          {"predicted", num(r.predicted)},
          {"window", {num(r.window_lo), num(r.window_hi)}},
          {"samples", r.samples},
          {"r2", num(r.r2)},
          {"ok", r.ok}};
}

json to_json(const UniformConvergenceReport& r) {
  return {{"end_minus", num(r.end_minus)}, {"end_plus", num(r.end_plus)}, {"row_minus", num(r.row_minus)},
          {"row_plus", num(r.row_plus)},   {"threshold", num(r.threshold)}, {"ok", r.ok}};
}

json to_json(const EquipartitionReport& r) {
  return {{"max_residual", num(r.max_residual)},
          {"scale", num(r.scale)},
          {"minus_bound_violation", num(r.minus_bound_violation)},
          {"plus_bound_violation", num(r.plus_bound_violation)},
          {"entry_times_defined", r.entry_times_defined}};
}

json to_json(const H1AuditReport& r) {
  json l2 = json::array(), h1 = json::array(), eg = json::array();
  for (double x : r.l2) l2.push_back(num(x));
  for (double x : r.h1) h1.push_back(num(x));
  for (double x : r.energy_gap) eg.push_back(num(x));
  return {{"l2", l2},
          {"h1", h1},
          {"energy_gap", eg},
          {"hypothesis_ok", r.hypothesis_ok},
          {"conclusion_ok", r.conclusion_ok},
          {"verdict", r.verdict}};
}

json ledger_provenance(const ConstantsLedger& L) {
  const LedgerOptions& p = L.protocol;
  const std::string seed = "seed " + std::to_string(p.seed);
  return {
      {"rho0", p.rho0_minus > 0.0 || p.rho0_plus > 0.0
                   ? "manual override from the config"
                   : "largest dyadic radius with unambiguous nearest translates over " +
                         std::to_string(p.rho_trials) + " seeded perturbations (" + seed + ")"},
      {"beta", "closed form from the spectral gap of A(q) and the negative part of D^2V along q"},
      {"mu_minus", "from beta and the capture radius (closed form)"},
      {"d0", "min over relative shifts of the L2 distance of the two orbits, minus (rho- + rho+)/2"},
      {"e_r", "projected L-BFGS on the shell [r, rho0], " + std::to_string(p.e_r_starts) +
                  " seeded starts; an upper estimate"},
      {"nu", "largest dyadic level whose sublevel samples stay within r (" + std::to_string(p.nu_samples) +
                 " samples per level, " + seed + ")"},
      {"E_max", "closed form from delta0, e_r and nu, times safety " + std::to_string(p.safety)},
      {"sublevel_ok", std::to_string(p.sublevel_samples) + " seeded samples below m+ checked against rho0-/2"},
      {"m_pm", "energies of the computed family representatives"}};
}

RunDirectory::RunDirectory(const std::string& root, const std::string& config_hash) {
  dir_ = (fs::path(root) / config_hash.substr(0, 16)).string();
  std::error_code ec;
  fs::create_directories(dir_, ec);
  if (ec) fail(ErrorKind::io, "cannot create " + dir_ + ": " + ec.message());
  const std::string mf = file("manifest.json");
  if (fs::exists(mf))
    manifest_ = read_json(mf);
  else
    manifest_ = {{"config_hash", config_hash}, {"files", json::object()}};
  if (manifest_.value("config_hash", std::string()) != config_hash)
    fail(ErrorKind::integrity, "manifest in " + dir_ + " belongs to another config");
}

bool RunDirectory::exists(const std::string& name) const { return fs::exists(file(name)); }

void RunDirectory::record(const std::string& name, const std::string& stage) {
  manifest_["files"][name] = {{"sha256", sha256_file(file(name))}, {"stage", stage}};
}

void RunDirectory::set_manifest_field(const std::string& key, const json& value) { manifest_[key] = value; }

void RunDirectory::save_manifest() const { write_json(file("manifest.json"), manifest_); }

void RunDirectory::verify(const std::vector<std::string>& names) const {
  for (const std::string& n : names) {
    if (!manifest_["files"].contains(n)) fail(ErrorKind::integrity, n + " is not listed in the manifest");
    if (!exists(n)) fail(ErrorKind::integrity, n + " is missing");
    if (sha256_file(file(n)) != manifest_["files"][n]["sha256"].get<std::string>())
      fail(ErrorKind::integrity, "checksum mismatch for " + n);
  }
}

}  // namespace tw
