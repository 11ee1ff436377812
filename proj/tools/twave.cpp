#include <cstdio>
#include <string>
#include <utility>

#include <CLI11.hpp>

#include "tw/twave.h"

int main(int argc, char** argv) {
  CLI::App app{"Traveling waves of gradient reaction-diffusion systems"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "out";
  bool override_assumptions = false;
  bool print_json = false;
  int threads = 0;
  app.add_option("--config", config_path, "YAML experiment config")->required();
  app.add_option("--out", out_dir, "output root; runs go to <out>/<config hash prefix>");
  app.add_flag("--override-assumptions", override_assumptions, "solve even when the ledger assumptions fail");
  app.add_option("--threads", threads, "worker threads (0: library default)")->check(CLI::NonNegativeNumber);
  app.add_flag("--json", print_json, "print the stage summary as JSON instead of text");
  app.add_flag_callback("--version", [] {
    std::printf("twave %s\n", tw_version());
    throw CLI::Success();
  });
  const std::pair<const char*, const char*> stages[] = {
      {"heteroclinic", "minimize the slice families (wells in line mode)"},
      {"constants", "estimate the constants ledger and check the assumptions"},
      {"solve-tw", "bisect for the wave speed and solve for the profile"},
      {"evolve", "run the parabolic flow and fit the front speed"},
      {"verify", "audit the solved wave (rates, bounds, identities)"},
  };
  for (const auto& [name, help] : stages) app.add_subcommand(name, help)->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // Usage errors share the config exit code.
    const int rc = app.exit(e);
    return rc == 0 ? 0 : TW_ERR_CONFIG;
  }

  tw_set_threads(threads);
  tw_config* cfg = nullptr;
  if (int rc = tw_config_load(config_path.c_str(), &cfg); rc != TW_OK) {
    std::fprintf(stderr, "error: %s\n", tw_last_error());
    return rc;
  }
  const std::string command = app.get_subcommands().front()->get_name();
  tw_result* res = nullptr;
  const int rc = tw_run(command.c_str(), cfg, out_dir.c_str(), override_assumptions ? 1 : 0, &res);
  if (res) {
    if (print_json)
      std::printf("%s\n", tw_result_summary_json(res));
    else
      std::fputs(tw_result_text(res), stdout);
    if (*tw_result_run_dir(res)) std::fprintf(stderr, "run directory: %s\n", tw_result_run_dir(res));
  }
  if (rc != TW_OK) std::fprintf(stderr, "error: %s\n", tw_last_error());
  tw_result_free(res);
  tw_config_free(cfg);
  return rc;
}
