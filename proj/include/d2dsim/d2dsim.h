/* C interface to the d2dsim library. All strings returned through char**
 * out-parameters are heap-allocated and released with d2d_string_free. */
#ifndef D2DSIM_H
#define D2DSIM_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define D2D_API __declspec(dllexport)
#else
#define D2D_API __attribute__((visibility("default")))
#endif

/* Status codes double as process exit codes in the command-line tool. */
typedef enum d2d_status {
  D2D_OK = 0,
  D2D_ERR_USAGE = 1,     /* null handle or bad argument */
  D2D_ERR_CONFIG = 2,    /* configuration or map validation */
  D2D_ERR_RUNTIME = 3,   /* numerical, sampling, deployment or I/O failure */
  D2D_ERR_TOLERANCE = 4, /* a validation check exceeded its tolerance */
} d2d_status;

typedef struct d2d_config d2d_config;
typedef struct d2d_map d2d_map;

/* Called after each finished trial of the current grid point. */
typedef void (*d2d_progress_fn)(long done, long total, void* user);

D2D_API const char* d2d_version(void);
/* Message of the last failure on the calling thread ("" if none). */
D2D_API const char* d2d_last_error(void);
D2D_API void d2d_string_free(char* s);

/* text == NULL loads the defaults. D2DSIM_<SECTION>_<KEY> environment
 * variables are applied on top when use_env != 0. */
D2D_API int d2d_config_parse(const char* text, int use_env, d2d_config** out);
D2D_API int d2d_config_load_file(const char* path, int use_env, d2d_config** out);
D2D_API int d2d_config_set(d2d_config* cfg, const char* section, const char* key, const char* value);
D2D_API int d2d_config_validate(const d2d_config* cfg);
D2D_API int d2d_config_dump(const d2d_config* cfg, char** out);
D2D_API void d2d_config_free(d2d_config* cfg);

D2D_API int d2d_map_build(const d2d_config* cfg, d2d_map** out);
D2D_API int d2d_map_load(const char* text, d2d_map** out);
D2D_API int d2d_map_serialize(const d2d_map* map, char** out);
D2D_API int d2d_map_building_count(const d2d_map* map, size_t* out);
D2D_API void d2d_map_free(d2d_map* map);

/* Per-trial CSV for the configured strategy and band. */
D2D_API int d2d_simulate(const d2d_config* cfg, int workers, char** csv_out);
/* Results CSV of the configured sweep. */
D2D_API int d2d_sweep(const d2d_config* cfg, int workers, d2d_progress_fn progress, void* user, char** csv_out);
/* Closed-form vs Monte-Carlo table at the configured threshold. */
D2D_API int d2d_analyze(const d2d_config* cfg, long trials, char** csv_out);
/* Runs the oracle suites; D2D_ERR_TOLERANCE when any check fails. The report
 * is produced either way. */
D2D_API int d2d_validate(uint64_t seed, long ppp_trials, char** report_out);
/* JSON run manifest: version, command, resolved configuration. */
D2D_API int d2d_manifest(const d2d_config* cfg, const char* command, int workers, char** json_out);

#ifdef __cplusplus
}
#endif

#endif
