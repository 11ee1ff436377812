#pragma once

#include <string>

#include <json.hpp>

#include "tw/config.hpp"
#include "tw/errors.hpp"

namespace tw {

// Exit codes shared by the C interface and the command-line tool.
enum ExitCode : int {
  exit_ok = 0,
  exit_failure = 1,      // unexpected internal error
  exit_config = 2,
  exit_convergence = 3,
  exit_assumption = 4,
  exit_io = 5,           // unreadable, missing or tampered artifacts
};
int exit_code_for(ErrorKind kind);

struct CommandOptions {
  std::string out = "out";
  bool override_assumptions = false;
};

struct CommandResult {
  int exit_code = exit_ok;
  std::string run_dir;
  std::string message;       // failing stage and reason when exit_code != 0
  std::string text;          // human-readable report for stdout
  nlohmann::json summary = nlohmann::json::object();
};

// Artifacts are exchanged through <out>/<first 16 hex digits of the config
// hash>/. Stages:
//   heteroclinic  families.json, q_minus.csv, q_plus.csv (curves), heteroclinic.csv (balanced line)
//   constants     ledger.json, assumptions.json
//   solve-tw      speed.json, profile.csv, diagnostics.json
//   evolve        evolve.json, fronts.csv, snapshot_<k>.csv
//   verify        verify.json, rate_plus.json, rate_minus.json
// None of them throws; failures come back as exit codes with a message.
CommandResult cmd_heteroclinic(const ExperimentConfig& cfg, const CommandOptions& opts);
CommandResult cmd_constants(const ExperimentConfig& cfg, const CommandOptions& opts);
CommandResult cmd_solve_tw(const ExperimentConfig& cfg, const CommandOptions& opts);
CommandResult cmd_evolve(const ExperimentConfig& cfg, const CommandOptions& opts);
CommandResult cmd_verify(const ExperimentConfig& cfg, const CommandOptions& opts);

// Dispatch by subcommand name ("heteroclinic", "constants", "solve-tw",
// "evolve", "verify"); unknown names give exit_config.
CommandResult run_command(const std::string& name, const ExperimentConfig& cfg, const CommandOptions& opts);

}  // namespace tw
