/* C interface to the optimization laboratory: opaque handles, integer
 * error codes, thread-local error messages. All functions return
 * OPTLAB_OK (0) on success; on failure the out-parameters are untouched
 * and optlab_last_error() describes what went wrong. */

#ifndef OPTLAB_H
#define OPTLAB_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum optlab_status {
  OPTLAB_OK = 0,
  OPTLAB_ERR_CONFIG = 2,    /* bad input, malformed config, IO */
  OPTLAB_ERR_NUMERICAL = 3, /* divergence, iteration caps */
  OPTLAB_ERR_INTERNAL = 4
} optlab_status;

typedef struct optlab_config optlab_config;
typedef struct optlab_trace optlab_trace;

const char* optlab_version(void);

/* Message for the most recent failure on this thread; never NULL. */
const char* optlab_last_error(void);

/* ---- configs ---- */
optlab_status optlab_config_parse(const char* json_text, optlab_config** out);
optlab_status optlab_config_load(const char* path, optlab_config** out);
optlab_status optlab_config_set_seed(optlab_config* cfg, uint64_t seed);
optlab_status optlab_config_family(const optlab_config* cfg, char* buf,
                                   size_t buf_len);
optlab_status optlab_config_out_path(const optlab_config* cfg, char* buf,
                                     size_t buf_len);
void optlab_config_free(optlab_config* cfg);

/* Bundled smoke configs: names separated by '\n'. */
optlab_status optlab_bundled_names(char* buf, size_t buf_len);
optlab_status optlab_bundled_config(const char* name, char* buf, size_t buf_len);

/* ---- runs and traces ---- */
optlab_status optlab_run(const optlab_config* cfg, optlab_trace** out);

long optlab_trace_rows(const optlab_trace* trace);
/* Column order matches the CSV: step, grads, proxes, bits, f_gap,
 * dist_sq, wall_ns (7 doubles per row). */
optlab_status optlab_trace_row(const optlab_trace* trace, long row,
                               double values[7]);
optlab_status optlab_trace_write_csv(const optlab_trace* trace,
                                     const char* path);
optlab_status optlab_trace_read_csv(const char* path, optlab_trace** out);
void optlab_trace_free(optlab_trace* trace);

/* ---- verification ---- */
typedef void (*optlab_check_cb)(const char* name, int pass, const char* detail,
                                void* user);
/* Runs the invariant property suites; *n_failed receives the failure
 * count. The callback (optional) observes every check. */
optlab_status optlab_check_invariants(optlab_check_cb cb, void* user,
                                      int* n_failed);

typedef void (*optlab_bench_cb)(const char* name, int ok, double seconds,
                                const char* error, void* user);
optlab_status optlab_bench_suite(const char* suite, optlab_bench_cb cb,
                                 void* user, int* n_failed);

#ifdef __cplusplus
}
#endif

#endif /* OPTLAB_H */
