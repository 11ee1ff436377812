#include "tw/commands.hpp"

#include <cmath>
#include <iomanip>
#include <memory>
#include <sstream>

#include "tw/errors.hpp"
#include "tw/io.hpp"
#include "tw/schema.hpp"

namespace tw {

using nlohmann::json;

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::config:
    case ErrorKind::invalid_argument:
      return exit_config;
    case ErrorKind::convergence:
      return exit_convergence;
    case ErrorKind::assumption:
      return exit_assumption;
    case ErrorKind::io:
    case ErrorKind::integrity:
      return exit_io;
  }
  return exit_failure;
}

namespace {

const char* kPsiNote =
    "initial profile psi: minus representative for x1 <= center - 1, plus representative for "
    "x1 >= center + 1, linear in between; translated curves are padded with the exact well values";

json jnum(double x) {
  if (std::isfinite(x)) return x;
  return std::isnan(x) ? json("nan") : json(x > 0 ? "inf" : "-inf");
}

double jget(const json& j) {
  if (j.is_number()) return j.get<double>();
  const std::string s = j.get<std::string>();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  return std::numeric_limits<double>::quiet_NaN();
}

Vec to_vec(const std::vector<double>& v) {
  Vec out(static_cast<int>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out(static_cast<int>(i)) = v[i];
  return out;
}

json vec_json(const Vec& v) {
  json a = json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

RunDirectory open_run(const ExperimentConfig& cfg, const CommandOptions& opts) {
  RunDirectory run(opts.out, config_hash(cfg));
  run.set_manifest_field("config_name", cfg.name);
  run.set_manifest_field("config_hash", config_hash(cfg));
  run.set_manifest_field("grid", {{"mode", cfg.mode}, {"L1", cfg.L1}, {"n1", cfg.n1}, {"L2", cfg.L2}, {"n2", cfg.n2}});
  run.set_manifest_field("initial_profile", kPsiNote);
  if (!run.exists("config.yaml")) {
    write_text_file(run.file("config.yaml"), serialize_config(cfg));
    run.record("config.yaml", "config");
  }
  return run;
}

void put_json(RunDirectory& run, const std::string& name, const json& j, const std::string& stage) {
  write_json(run.file(name), j);
  run.record(name, stage);
}

void require_artifacts(const RunDirectory& run, const std::vector<std::string>& names, const std::string& producer) {
  for (const std::string& n : names)
    if (!run.exists(n)) fail(ErrorKind::io, n + " not found in " + run.path() + "; run `" + producer + "` first");
  run.verify(names);
}

Curve1D family_init(const FamilyInit& f, const Grid1D& g, const Vec& sm, const Vec& sp) {
  if (f.type == "gl_arc") return gl_arc_init(g, f.sign, f.radius, f.width);
  if (f.type == "zs") return zs_init(g, f.s2, f.s3, f.amplitude, f.width);
  return tanh_init(g, sm, sp, f.width);
}

void check_wells(const ExperimentConfig& cfg, const PotentialSpec& pot) {
  if (static_cast<int>(cfg.well_minus.size()) != pot.k)
    fail(ErrorKind::config, "config: wells have dimension " + std::to_string(cfg.well_minus.size()) +
                                " but potential '" + cfg.potential + "' lives in R^" + std::to_string(pot.k));
  if (cfg.bump.enabled && cfg.bump.at == "point" && static_cast<int>(cfg.bump.center.size()) != pot.k)
    fail(ErrorKind::config, "config: potential.bump.center has the wrong dimension");
  if (cfg.bump.enabled && cfg.bump.at == "plus_apex" && cfg.mode != "plane")
    fail(ErrorKind::config, "config: potential.bump.at = plus_apex needs mode plane");
}

// Everything later stages need to rebuild the slice problem. Heap allocated
// because the slice problem points into the potential.
struct Instance {
  PotentialSpec pot;
  std::unique_ptr<SliceProblem> sp;
  Grid1D x1;
  json families;
};

std::unique_ptr<Instance> load_instance(const ExperimentConfig& cfg, const RunDirectory& run) {
  const bool plane = cfg.mode == "plane";
  std::vector<std::string> need = {"families.json"};
  if (plane) {
    need.push_back("q_minus.csv");
    need.push_back("q_plus.csv");
  }
  require_artifacts(run, need, "heteroclinic");
  auto inst = std::make_unique<Instance>();
  inst->families = read_json(run.file("families.json"));
  const json& fam = inst->families;
  PotentialSpec base = make_potential(cfg.potential, cfg.params);
  check_wells(cfg, base);
  if (cfg.bump.enabled) {
    const Vec center = to_vec(fam.at("bump_center").get<std::vector<double>>());
    inst->pot = make_bump_perturbation(base, cfg.bump.delta, center, cfg.bump.radius);
  } else {
    inst->pot = base;
  }
  const Vec sm = to_vec(cfg.well_minus), spv = to_vec(cfg.well_plus);
  SliceFamily fm, fp;
  if (plane) {
    fm.is_curve = fp.is_curve = true;
    fm.rep = read_curve_csv(run.file("q_minus.csv"), sm, spv);
    fp.rep = read_curve_csv(run.file("q_plus.csv"), sm, spv);
    fm.level = jget(fam.at("minus").at("energy"));
    fp.level = jget(fam.at("plus").at("energy"));
    inst->sp = std::make_unique<SliceProblem>(SliceProblem::curves(inst->pot, fm, fp));
  } else {
    fm.point = sm;
    fp.point = spv;
    fm.level = inst->pot.V(sm);
    fp.level = inst->pot.V(spv);
    inst->sp = std::make_unique<SliceProblem>(inst->pot, fm, fp);
  }
  inst->x1 = Grid1D(cfg.L1, cfg.n1);
  return inst;
}

json family_json(const HeteroclinicResult& q, const PotentialSpec& pot) {
  json j = to_json(q);
  j["spectral"] = to_json(spectral_report(q.curve, pot));
  return j;
}

json well_json(const PotentialSpec& pot, const Vec& w) {
  Eigen::SelfAdjointEigenSolver<Mat> es(pot.hess(w));
  return {{"point", vec_json(w)}, {"level", pot.V(w)}, {"hessian_eigenvalues", vec_json(es.eigenvalues())}};
}

template <class Body>
CommandResult guarded(const std::string& stage, Body&& body) {
  CommandResult res;
  try {
    body(res);
  } catch (const Error& e) {
    res.exit_code = exit_code_for(e.kind());
    res.message = stage + ": " + e.what();
  } catch (const std::exception& e) {
    res.exit_code = exit_failure;
    res.message = stage + ": " + e.what();
  }
  return res;
}

std::string fmt(double x) {
  std::ostringstream os;
  os << std::setprecision(8) << x;
  return os.str();
}

std::string ledger_table(const ConstantsLedger& L, const AssumptionReport& a) {
  std::ostringstream os;
  auto row = [&](const std::string& k, const std::string& v) { os << std::left << std::setw(16) << k << v << "\n"; };
  row("rho0-", fmt(L.rho0_minus));
  row("rho0+", fmt(L.rho0_plus));
  row("beta-", fmt(L.beta_minus));
  row("beta+", fmt(L.beta_plus));
  row("mu-", fmt(L.mu_minus));
  row("d0", fmt(L.d0));
  row("E_max", fmt(L.E_max) + "  (raw " + fmt(L.E_max_raw) + ")");
  row("E_max+", fmt(L.E_max_plus));
  row("m-", fmt(L.m_minus));
  row("m+", fmt(L.m_plus));
  row("gap", fmt(L.gap));
  row("alpha*", fmt(L.alpha_star));
  row("perturbation", std::string(a.perturbation_ok ? "ok" : "fails") + "  (gap/E_max " + fmt(a.perturbation_margin) + ")");
  row("convergence", std::string(a.convergence_ok ? "ok" : "fails") + "  (gap/thr " + fmt(a.convergence_margin) + ")");
  row("sublevel", a.sublevel_ok ? "ok" : "fails");
  for (const std::string& n : L.notes) os << "note: " << n << "\n";
  for (const std::string& n : a.notes) os << "note: " << n << "\n";
  return os.str();
}

}  // namespace

CommandResult cmd_heteroclinic(const ExperimentConfig& cfg, const CommandOptions& opts) {
  return guarded("heteroclinic", [&](CommandResult& res) {
    RunDirectory run = open_run(cfg, opts);
    res.run_dir = run.path();
    PotentialSpec base = make_potential(cfg.potential, cfg.params);
    check_wells(cfg, base);
    const Vec sm = to_vec(cfg.well_minus), spv = to_vec(cfg.well_plus);
    const WellPair wells{sm, spv};
    json fam = {{"mode", cfg.mode}};
    std::ostringstream text;

    if (cfg.mode == "plane") {
      const Grid1D g2(cfg.L2, cfg.n2);
      const Curve1D init_m = family_init(cfg.family_minus, g2, sm, spv);
      const Curve1D init_p = family_init(cfg.family_plus, g2, sm, spv);
      std::optional<HeteroclinicResult> anchor;
      auto get_anchor = [&]() -> const HeteroclinicResult& {
        if (!anchor) anchor = minimize_heteroclinic(base, wells, init_p, cfg.heteroclinic_tol);
        return *anchor;
      };
      PotentialSpec pot = base;
      if (cfg.bump.enabled) {
        Vec center = cfg.bump.at == "point" ? to_vec(cfg.bump.center)
                                            : Vec(get_anchor().curve.values.row(g2.n / 2).transpose());
        pot = make_bump_perturbation(base, cfg.bump.delta, center, cfg.bump.radius);
        fam["bump_center"] = vec_json(center);
      }
      const HeteroclinicResult qm = minimize_heteroclinic(pot, wells, init_m, cfg.heteroclinic_tol);
      const HeteroclinicResult qp =
          cfg.family_plus.local
              ? minimize_local_heteroclinic(pot, get_anchor(), cfg.family_plus.local_radius, cfg.heteroclinic_tol)
              : minimize_heteroclinic(pot, wells, init_p, cfg.heteroclinic_tol);
      if (anchor) fam["anchor"] = to_json(*anchor);
      fam["minus"] = family_json(qm, pot);
      fam["plus"] = family_json(qp, pot);
      write_curve_csv(run.file("q_minus.csv"), qm.curve);
      run.record("q_minus.csv", "heteroclinic");
      write_curve_csv(run.file("q_plus.csv"), qp.curve);
      run.record("q_plus.csv", "heteroclinic");
      text << "m- = " << fmt(qm.energy) << " (" << to_string(qm.kind) << ")\n"
           << "m+ = " << fmt(qp.energy) << " (" << to_string(qp.kind) << ")\n";
    } else {
      if (cfg.bump.enabled) fail(ErrorKind::config, "config: bumps are only supported in plane mode");
      fam["minus"] = well_json(base, sm);
      fam["plus"] = well_json(base, spv);
      // With equal well levels the two wells are joined by a standing heteroclinic.
      if (std::abs(base.V(sm) - base.V(spv)) <= 1e-12) {
        const Grid1D g(cfg.L1, cfg.n1);
        const HeteroclinicResult q =
            minimize_heteroclinic(base, wells, family_init(cfg.family_minus, g, sm, spv), cfg.heteroclinic_tol);
        fam["heteroclinic"] = family_json(q, base);
        write_curve_csv(run.file("heteroclinic.csv"), q.curve);
        run.record("heteroclinic.csv", "heteroclinic");
        text << "heteroclinic energy = " << fmt(q.energy) << "\n";
      }
      text << "m- = " << fmt(base.V(sm)) << ", m+ = " << fmt(base.V(spv)) << "\n";
    }
    put_json(run, "families.json", fam, "heteroclinic");
    run.save_manifest();
    res.summary = fam;
    res.text = text.str();
  });
}

CommandResult cmd_constants(const ExperimentConfig& cfg, const CommandOptions& opts) {
  return guarded("constants", [&](CommandResult& res) {
    RunDirectory run = open_run(cfg, opts);
    res.run_dir = run.path();
    auto inst = load_instance(cfg, run);
    const ConstantsLedger L = compute_ledger(*inst->sp, cfg.ledger);
    const AssumptionReport a = check_assumptions(L);
    const json lj = to_json(L);
    const std::vector<std::string> problems = validate_json(lj, load_schema("ledger"));
    if (!problems.empty()) fail(ErrorKind::integrity, "ledger does not match its schema: " + problems.front());
    put_json(run, "ledger.json", lj, "constants");
    put_json(run, "assumptions.json", to_json(a), "constants");
    run.set_manifest_field("ledger_provenance", ledger_provenance(L));
    run.save_manifest();
    res.summary = {{"ledger", lj}, {"assumptions", to_json(a)}};
    res.text = ledger_table(L, a);
  });
}

CommandResult cmd_solve_tw(const ExperimentConfig& cfg, const CommandOptions& opts) {
  return guarded("solve-tw", [&](CommandResult& res) {
    RunDirectory run = open_run(cfg, opts);
    res.run_dir = run.path();
    auto inst = load_instance(cfg, run);
    require_artifacts(run, {"ledger.json"}, "constants");
    const ConstantsLedger L = ledger_from_json(read_json(run.file("ledger.json")));
    const AssumptionReport a = check_assumptions(L);
    if (!a.perturbation_ok && !opts.override_assumptions) {
      std::string why;
      for (const std::string& n : a.notes) why += (why.empty() ? "" : "; ") + n;
      fail(ErrorKind::assumption, "perturbation assumption violated (" + why + "); pass --override-assumptions to solve anyway");
    }

    SpeedProblem pb;
    pb.sp = inst->sp.get();
    pb.x1 = inst->x1;
    pb.ledger = L;
    pb.opts = cfg.solver;
    pb.T0 = cfg.T0;
    pb.T_cap_fraction = cfg.T_cap_fraction;
    const SpeedSearchResult r = find_speed(pb, cfg.c_lo, cfg.c_hi, cfg.tol_c);
    const SliceProfile& P = r.final_min.profile;

    put_json(run, "speed.json", to_json(r), "solve-tw");
    write_slice_profile_csv(run.file("profile.csv"), *inst->sp, P);
    run.record("profile.csv", "solve-tw");

    json diag;
    diag["override_assumptions"] = opts.override_assumptions;
    diag["assumptions"] = to_json(a);
    json Ts = json::array();
    for (double T : r.T_tried) Ts.push_back(jnum(T));
    diag["T_schedule"] = Ts;
    diag["unconstrained"] = r.unconstrained;
    const double T_star = transition_time_bound(L, r.c_star);
    diag["T_star"] = jnum(T_star);
    try {
      const EntryTimes et = entry_times(*inst->sp, P, L);
      diag["entry_times"] = {{"t_minus", et.t_minus}, {"t_plus", et.t_plus}, {"gap", et.t_plus - et.t_minus},
                             {"within_T_star", et.t_plus - et.t_minus <= T_star}};
    } catch (const Error& e) {
      diag["entry_times"] = {{"error", e.what()}};
    }
    const OscillationReport osc = no_oscillation_check(*inst->sp, P, L);
    diag["oscillation"] = {{"ok", osc.ok},           {"minus_ok", osc.minus_ok},   {"plus_ok", osc.plus_ok},
                           {"positivity_ok", osc.positivity_ok}, {"bad_minus", osc.bad_minus}, {"bad_plus", osc.bad_plus}};
    diag["equipartition"] = to_json(equipartition_check(*inst->sp, P, r.c_star, &L));
    const double bound = std::sqrt(2.0 * std::max(L.gap, 0.0)) / L.d0;
    diag["speed_bound"] = {{"bound", jnum(bound)}, {"ok", r.c_star <= bound + 1e-3}};
    put_json(run, "diagnostics.json", diag, "solve-tw");
    run.save_manifest();

    res.summary = {{"c_star", r.c_star},     {"formula_speed", r.formula_speed}, {"residual", r.residual},
                   {"unconstrained", r.unconstrained}, {"converged", r.final_min.converged}};
    std::ostringstream text;
    text << "c* = " << fmt(r.c_star) << "  (bracket " << fmt(r.c_lo) << " .. " << fmt(r.c_hi) << ")\n"
         << "formula speed = " << fmt(r.formula_speed) << ", residual = " << fmt(r.residual) << "\n"
         << "released = " << (r.unconstrained ? "yes" : "no") << "\n";
    for (const std::string& n : r.notes) text << "note: " << n << "\n";
    res.text = text.str();
    if (!r.final_min.converged) {
      res.exit_code = exit_convergence;
      res.message = "solve-tw: final constrained minimization did not converge (" + r.final_min.reason + ")";
    }
  });
}

CommandResult cmd_evolve(const ExperimentConfig& cfg, const CommandOptions& opts) {
  return guarded("evolve", [&](CommandResult& res) {
    RunDirectory run = open_run(cfg, opts);
    res.run_dir = run.path();
    auto inst = load_instance(cfg, run);
    const SliceProfile init = psi_init(*inst->sp, inst->x1, cfg.evolve_center);
    const EvolutionResult ev = measure_front_speed(*inst->sp, init, cfg.evolve);

    json j = to_json(ev);
    j["eps"] = cfg.evolve.eps;
    j["initial_center"] = cfg.evolve_center;
    if (run.exists("speed.json") && run.manifest()["files"].contains("speed.json")) {
      run.verify({"speed.json"});
      const double c_star = jget(read_json(run.file("speed.json")).at("c_star"));
      const double expected = c_star / cfg.evolve.eps;
      j["c_star"] = c_star;
      j["expected_speed"] = expected;
      j["relative_error"] = jnum(std::abs(ev.fitted_speed - expected) / std::abs(expected));
    }
    put_json(run, "evolve.json", j, "evolve");
    write_series_csv(run.file("fronts.csv"), {"t", "front", "free_energy"}, {ev.times, ev.fronts, ev.free_energy});
    run.record("fronts.csv", "evolve");
    for (std::size_t s = 0; s < ev.snapshots.size(); ++s) {
      const std::string name = "snapshot_" + std::to_string(s) + ".csv";
      write_slice_profile_csv(run.file(name), *inst->sp, ev.snapshots[s]);
      run.record(name, "evolve");
    }
    run.save_manifest();
    res.summary = j;
    std::ostringstream text;
    text << "fitted speed = " << fmt(ev.fitted_speed) << " (" << ev.fit_samples << " samples, rms "
         << fmt(ev.fit_residual) << ", dt " << fmt(ev.dt) << ")\n";
    if (ev.left_domain) text << "note: front left the domain; fit uses the partial record\n";
    if (j.contains("expected_speed"))
      text << "expected c*/eps = " << fmt(jget(j["expected_speed"])) << ", relative error "
           << fmt(jget(j["relative_error"])) << "\n";
    res.text = text.str();
  });
}

CommandResult cmd_verify(const ExperimentConfig& cfg, const CommandOptions& opts) {
  return guarded("verify", [&](CommandResult& res) {
    RunDirectory run = open_run(cfg, opts);
    res.run_dir = run.path();
    auto inst = load_instance(cfg, run);
    require_artifacts(run, {"ledger.json"}, "constants");
    require_artifacts(run, {"speed.json", "profile.csv", "diagnostics.json"}, "solve-tw");
    const SliceProblem& sp = *inst->sp;
    const ConstantsLedger L = ledger_from_json(read_json(run.file("ledger.json")));
    const AssumptionReport a = check_assumptions(L);
    const double c_star = jget(read_json(run.file("speed.json")).at("c_star"));
    const SliceProfile P = read_slice_profile_csv(run.file("profile.csv"), sp);
    if (P.x1.n != inst->x1.n) fail(ErrorKind::integrity, "profile.csv does not match the configured x1 grid");

    json report;
    bool all_ok = true;
    auto fit = [&](Side side, double predicted) -> json {
      try {
        return to_json(fit_exponential_rate(sp, P, side, predicted, cfg.rate_fit));
      } catch (const Error& e) {
        return {{"error", e.what()}, {"ok", false}};
      }
    };
    json rp = fit(Side::plus, c_star);
    all_ok = all_ok && rp["ok"].get<bool>();
    json rm = fit(Side::minus, L.mu_minus - c_star);
    // The minus-side rate is only predicted under the convergence assumption.
    rm["gated"] = a.convergence_ok;
    if (a.convergence_ok) all_ok = all_ok && rm["ok"].get<bool>();
    put_json(run, "rate_plus.json", rp, "verify");
    put_json(run, "rate_minus.json", rm, "verify");
    report["rate_plus"] = rp;
    report["rate_minus"] = rm;

    const UniformConvergenceReport uc = uniform_convergence_check(sp, P, cfg.uniform_threshold);
    report["uniform"] = to_json(uc);
    all_ok = all_ok && uc.ok;

    const EquipartitionReport eq = equipartition_check(sp, P, c_star, &L);
    report["equipartition"] = to_json(eq);
    report["profile_residual"] = profile_residual(sp, P, c_star);

    const double bound = std::sqrt(2.0 * std::max(L.gap, 0.0)) / L.d0;
    const bool bound_ok = c_star <= bound + 1e-3;
    report["speed_bound"] = {{"c_star", c_star}, {"bound", jnum(bound)}, {"ok", bound_ok}};
    all_ok = all_ok && bound_ok;
    const double T_star = transition_time_bound(L, c_star);
    try {
      const EntryTimes et = entry_times(sp, P, L);
      const bool ok = et.t_plus - et.t_minus <= T_star;
      report["entry_gap"] = {{"gap", et.t_plus - et.t_minus}, {"T_star", jnum(T_star)}, {"ok", ok}};
      all_ok = all_ok && ok;
    } catch (const Error& e) {
      report["entry_gap"] = {{"error", e.what()}, {"T_star", jnum(T_star)}, {"ok", false}};
      all_ok = false;
    }

    if (sp.is_curve()) {
      // Tail slices, one per unit of x1, from the front toward +L1.
      const SliceScan scan = scan_slices(sp, P);
      const double front = front_position(scan);
      const int stride = std::max(1, static_cast<int>(std::lround(1.0 / P.x1.h)));
      std::vector<Curve1D> tail;
      for (int i = 0; i < P.x1.n; i += stride)
        if (P.x1.node(i) >= front + 1.0 && P.x1.node(i) <= P.x1.L - cfg.rate_fit.end_margin)
          tail.push_back(sp.as_curve(P.U.row(i).data()));
      if (tail.size() >= 3) {
        H1AuditOptions ho;
        ho.align = true;
        report["h1_audit"] = to_json(h1_convergence_audit(tail, sp.family(Side::plus).rep, sp.potential(), ho));
      } else {
        report["h1_audit"] = {{"verdict", "too few tail slices"}};
      }
    }
    report["assumptions"] = to_json(a);
    report["all_ok"] = all_ok;
    put_json(run, "verify.json", report, "verify");
    run.save_manifest();
    res.summary = report;
    std::ostringstream text;
    text << "rate +inf: " << (rp.contains("fitted") ? fmt(jget(rp["fitted"])) : rp.value("error", std::string()))
         << " vs " << fmt(c_star) << (rp["ok"].get<bool>() ? "  ok" : "  FAIL") << "\n"
         << "rate -inf: " << (rm.contains("fitted") ? fmt(jget(rm["fitted"])) : rm.value("error", std::string()))
         << (a.convergence_ok ? "" : "  (not gated: convergence assumption fails)") << "\n"
         << "end slices: " << fmt(uc.end_minus) << ", " << fmt(uc.end_plus) << (uc.ok ? "  ok" : "  FAIL") << "\n"
         << "speed bound: " << fmt(c_star) << " <= " << fmt(bound) << (bound_ok ? "  ok" : "  FAIL") << "\n"
         << "all checks: " << (all_ok ? "ok" : "some failed") << "\n";
    res.text = text.str();
  });
}

CommandResult run_command(const std::string& name, const ExperimentConfig& cfg, const CommandOptions& opts) {
  if (name == "heteroclinic") return cmd_heteroclinic(cfg, opts);
  if (name == "constants") return cmd_constants(cfg, opts);
  if (name == "solve-tw") return cmd_solve_tw(cfg, opts);
  if (name == "evolve") return cmd_evolve(cfg, opts);
  if (name == "verify") return cmd_verify(cfg, opts);
  CommandResult res;
  res.exit_code = exit_config;
  res.message = "unknown command '" + name + "'";
  return res;
}

}  // namespace tw
