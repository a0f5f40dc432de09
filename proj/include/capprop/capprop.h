/* capprop C API: capacity-propagation studies behind a stable shared-library
 * surface. Handles are opaque; every entry point returns a status code and
 * the per-thread message of the last failure is available via
 * capprop_last_error(). Status codes mirror the CLI exit codes. */

#ifndef CAPPROP_CAPPROP_H
#define CAPPROP_CAPPROP_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#define CAPPROP_ABI_VERSION 1u

typedef struct capprop_config capprop_config;
typedef struct capprop_report capprop_report;

enum {
    CAPPROP_OK = 0,
    CAPPROP_ERR_VALIDATION = 1, /* bad config / bad arguments */
    CAPPROP_ERR_RUNTIME = 2
};

/* Bundle content selection for capprop_report_write. */
enum {
    CAPPROP_EMIT_REPORT = 1,
    CAPPROP_EMIT_TABLE = 2,
    CAPPROP_EMIT_PLOTS = 4,
    CAPPROP_EMIT_ALL = 7
};

unsigned capprop_abi_version(void);

/* Message describing this thread's most recent failure; never NULL. */
const char* capprop_last_error(void);

/* Load + validate a JSON config file / in-memory JSON text. */
int capprop_config_open(const char* path, capprop_config** out);
int capprop_config_parse(const char* json_text, capprop_config** out);
void capprop_config_free(capprop_config* cfg);

int capprop_config_set_seed(capprop_config* cfg, uint64_t seed);
int capprop_config_set_jobs(capprop_config* cfg, int jobs);

/* 1 if the config carries at least one sweep list, else 0. */
int capprop_config_has_sweep(const capprop_config* cfg);

/* Execute the configured study / the discrete-vs-continuum comparison. */
int capprop_run(const capprop_config* cfg, capprop_report** out);
int capprop_compare(const capprop_config* cfg, capprop_report** out);

void capprop_report_free(capprop_report* rep);

/* Canonical serialized report; owned by the report handle. */
const char* capprop_report_json(const capprop_report* rep);

/* Wall-clock seconds spent producing the report (not part of the bytes). */
double capprop_report_runtime_seconds(const capprop_report* rep);

/* Write the output bundle (report/table/plots per flags + manifest.json)
 * into out_dir; staged and renamed so failures leave no partial bundle. */
int capprop_report_write(const capprop_report* rep, const char* out_dir, int flags);

#ifdef __cplusplus
}
#endif

#endif
