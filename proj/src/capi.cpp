#include "tw/twave.h"

#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "tw/commands.hpp"
#include "tw/config.hpp"
#include "tw/errors.hpp"

struct tw_config {
  tw::ExperimentConfig cfg;
  std::string hash, text;
};

struct tw_result {
  tw::CommandResult res;
  std::string summary;
};

namespace {

thread_local std::string last_error;

int record(int code, const std::string& msg) {
  last_error = msg;
  return code;
}

template <class F>
int guarded(F&& f) {
  try {
    last_error.clear();
    return f();
  } catch (const tw::Error& e) {
    return record(tw::exit_code_for(e.kind()), e.what());
  } catch (const std::exception& e) {
    return record(TW_ERR_FAILURE, e.what());
  } catch (...) {
    return record(TW_ERR_FAILURE, "unknown error");
  }
}

int wrap_config(tw::ExperimentConfig c, tw_config** out) {
  auto* h = new tw_config{std::move(c), "", ""};
  h->text = tw::serialize_config(h->cfg);
  h->hash = tw::config_hash(h->cfg);
  *out = h;
  return TW_OK;
}

}  // namespace

extern "C" {

const char* tw_last_error(void) { return last_error.c_str(); }

const char* tw_version(void) { return "1.0.0"; }

void tw_set_threads(int n) {
#ifdef _OPENMP
  if (n > 0) omp_set_num_threads(n);
#else
  (void)n;
#endif
}

int tw_config_load(const char* path, tw_config** out) {
  if (!path || !out) return record(TW_ERR_FAILURE, "null argument");
  *out = nullptr;
  return guarded([&] { return wrap_config(tw::load_config(path), out); });
}

int tw_config_parse(const char* yaml_text, tw_config** out) {
  if (!yaml_text || !out) return record(TW_ERR_FAILURE, "null argument");
  *out = nullptr;
  return guarded([&] { return wrap_config(tw::parse_config(yaml_text), out); });
}

void tw_config_free(tw_config* cfg) { delete cfg; }

const char* tw_config_hash(const tw_config* cfg) { return cfg ? cfg->hash.c_str() : ""; }
const char* tw_config_name(const tw_config* cfg) { return cfg ? cfg->cfg.name.c_str() : ""; }
const char* tw_config_serialize(const tw_config* cfg) { return cfg ? cfg->text.c_str() : ""; }

int tw_run(const char* command, const tw_config* cfg, const char* out_dir, int override_assumptions,
           tw_result** out) {
  if (!command || !cfg || !out) return record(TW_ERR_FAILURE, "null argument");
  *out = nullptr;
  return guarded([&] {
    tw::CommandOptions opts;
    if (out_dir) opts.out = out_dir;
    opts.override_assumptions = override_assumptions != 0;
    auto* r = new tw_result{tw::run_command(command, cfg->cfg, opts), ""};
    r->summary = r->res.summary.dump(2);
    *out = r;
    if (r->res.exit_code != TW_OK) last_error = r->res.message;
    return r->res.exit_code;
  });
}

int tw_result_exit_code(const tw_result* r) { return r ? r->res.exit_code : TW_ERR_FAILURE; }
const char* tw_result_run_dir(const tw_result* r) { return r ? r->res.run_dir.c_str() : ""; }
const char* tw_result_message(const tw_result* r) { return r ? r->res.message.c_str() : ""; }
const char* tw_result_text(const tw_result* r) { return r ? r->res.text.c_str() : ""; }
const char* tw_result_summary_json(const tw_result* r) { return r ? r->summary.c_str() : ""; }
void tw_result_free(tw_result* r) { delete r; }

}  // extern "C"
