#ifndef TWAVE_H
#define TWAVE_H

#ifdef __cplusplus
extern "C" {
#endif

#if defined(TW_BUILDING_LIBRARY)
#define TW_API __attribute__((visibility("default")))
#else
#define TW_API
#endif

/* Status codes; the non-zero values double as process exit codes. */
enum {
  TW_OK = 0,
  TW_ERR_FAILURE = 1,
  TW_ERR_CONFIG = 2,
  TW_ERR_CONVERGENCE = 3,
  TW_ERR_ASSUMPTION = 4,
  TW_ERR_IO = 5
};

typedef struct tw_config tw_config;
typedef struct tw_result tw_result;

/* Message of the last failed call on this thread ("" if none). */
TW_API const char* tw_last_error(void);
TW_API const char* tw_version(void);
/* Worker threads for the data-parallel kernels; n <= 0 keeps the default. */
TW_API void tw_set_threads(int n);

TW_API int tw_config_load(const char* path, tw_config** out);
TW_API int tw_config_parse(const char* yaml_text, tw_config** out);
TW_API void tw_config_free(tw_config* cfg);
/* Strings stay valid until the config is freed. */
TW_API const char* tw_config_hash(const tw_config* cfg);
TW_API const char* tw_config_name(const tw_config* cfg);
TW_API const char* tw_config_serialize(const tw_config* cfg);

/* Runs one stage ("heteroclinic", "constants", "solve-tw", "evolve",
 * "verify") with outputs under out_dir. On return *out holds a result
 * handle even when the stage failed; the return value equals its exit code. */
TW_API int tw_run(const char* command, const tw_config* cfg, const char* out_dir, int override_assumptions,
                  tw_result** out);
TW_API int tw_result_exit_code(const tw_result* r);
/* Strings stay valid until the result is freed. */
TW_API const char* tw_result_run_dir(const tw_result* r);
TW_API const char* tw_result_message(const tw_result* r);
TW_API const char* tw_result_text(const tw_result* r);
TW_API const char* tw_result_summary_json(const tw_result* r);
TW_API void tw_result_free(tw_result* r);

#ifdef __cplusplus
}
#endif

#endif
