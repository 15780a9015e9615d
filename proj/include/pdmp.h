/* C interface to the pdmp sampling engine.
 *
 * All functions return PDMP_OK on success. On failure the returned
 * status maps onto the CLI exit codes (2 = configuration error,
 * 3 = runtime error) and pdmp_last_error() carries a message for the
 * calling thread. Strings returned through out-parameters are owned
 * by the caller and released with pdmp_free_string().
 */
#ifndef PDMP_H
#define PDMP_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum {
  PDMP_OK = 0,
  PDMP_ERR_CONFIG = 2,
  PDMP_ERR_RUNTIME = 3,
} pdmp_status;

/* Opaque, validated run configuration. */
typedef struct pdmp_run_config pdmp_run_config;

const char* pdmp_version(void);

/* Message from the most recent failing call on this thread. */
const char* pdmp_last_error(void);

void pdmp_free_string(char* s);

pdmp_status pdmp_config_load(const char* path, pdmp_run_config** out);
pdmp_status pdmp_config_parse(const char* text, pdmp_run_config** out);
void pdmp_config_free(pdmp_run_config* cfg);

pdmp_status pdmp_config_set_seed(pdmp_run_config* cfg, uint64_t seed);
pdmp_status pdmp_config_set_out_dir(pdmp_run_config* cfg, const char* dir);

/* Canonical text form; parsing it back reproduces the configuration. */
pdmp_status pdmp_config_serialize(const pdmp_run_config* cfg, char** out);

/* Runs every repeat and writes chain.csv, metrics.json and
 * manifest.json under <out_dir>/rep<i>/. */
pdmp_status pdmp_sample(const pdmp_run_config* cfg);

/* Recomputes metrics.json for a stored run directory. */
pdmp_status pdmp_diagnose(const char* run_dir);

/* Renders a metric table across stored run directories. */
pdmp_status pdmp_compare(const char* const* run_dirs, size_t n_dirs,
                         char** table_out);

#ifdef __cplusplus
}
#endif

#endif /* PDMP_H */
