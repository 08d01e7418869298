#ifndef MOBSIM_H
#define MOBSIM_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum MobsimStatus {
  MOBSIM_STATUS_OK = 0,
  MOBSIM_STATUS_NULL_POINTER = 1,
  MOBSIM_STATUS_INVALID_UTF8 = 2,
  MOBSIM_STATUS_CONFIG_ERROR = 3,
  MOBSIM_STATUS_INVARIANT_VIOLATION = 4,
  MOBSIM_STATUS_IO = 5,
  MOBSIM_STATUS_OUT_OF_RANGE = 6,
  MOBSIM_STATUS_PANIC = 7,
} MobsimStatus;

typedef enum MobsimProcedure {
  MOBSIM_PROCEDURE_BHO = 0,
  MOBSIM_PROCEDURE_CHO = 1,
  MOBSIM_PROCEDURE_CHO_L1 = 2,
  MOBSIM_PROCEDURE_LLM = 3,
  MOBSIM_PROCEDURE_LLM_F = 4,
  MOBSIM_PROCEDURE_LLM_F_DS = 5,
} MobsimProcedure;

/**
 * Opaque simulation configuration.
 */
typedef struct MobsimConfig MobsimConfig;

/**
 * Opaque results of one run: a campaign per configured procedure.
 */
typedef struct MobsimResults MobsimResults;

/**
 * KPIs of one drop or, with `has_seed == false`, pooled over all drops.
 */
typedef struct MobsimKpis {
  enum MobsimProcedure procedure;
  bool has_seed;
  uint64_t seed;
  uint32_t n_drops;
  double rlp_per_ue_min;
  double hof_per_ue_min;
  double pp_per_ue_min;
  double reliability_pct;
  double prep_per_ue_min;
  double resource_reservation_pct;
} MobsimKpis;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *mobsim_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *mobsim_version(void);

/**
 * Smoothing weight of a layer-3 filter with coefficient `k`.
 */
double mobsim_l3_alpha(double k);

/**
 * Creates the default configuration.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
enum MobsimStatus mobsim_config_new(struct MobsimConfig **out);

/**
 * Parses a `key = value` configuration text.
 *
 * # Safety
 * `text` must be NUL-terminated; `out` must be writable.
 */
enum MobsimStatus mobsim_config_parse(const char *text, struct MobsimConfig **out);

/**
 * Loads a configuration file.
 *
 * # Safety
 * `path` must be NUL-terminated; `out` must be writable.
 */
enum MobsimStatus mobsim_config_load(const char *path, struct MobsimConfig **out);

/**
 * Overrides the campaign size.
 *
 * # Safety
 * `config` must be a live handle.
 */
enum MobsimStatus mobsim_config_set_campaign(struct MobsimConfig *config,
                                             uint32_t n_ues,
                                             uint32_t n_drops,
                                             double duration_s,
                                             uint64_t base_seed);

/**
 * Renders the resolved configuration in config-file syntax. Free the
 * string with [`mobsim_string_free`].
 *
 * # Safety
 * `config` must be a live handle; `out` must be writable.
 */
enum MobsimStatus mobsim_config_echo(const struct MobsimConfig *config, char **out);

/**
 * # Safety
 * `config` must be NULL or a handle from this library, freed only once.
 */
void mobsim_config_free(struct MobsimConfig *config);

/**
 * # Safety
 * `s` must be NULL or a string returned by this library, freed only once.
 */
void mobsim_string_free(char *s);

/**
 * Runs every configured procedure over the configured seeds.
 *
 * # Safety
 * `config` must be a live handle; `out` must be writable.
 */
enum MobsimStatus mobsim_run(const struct MobsimConfig *config, struct MobsimResults **out);

/**
 * Number of simulated procedures.
 *
 * # Safety
 * `results` must be NULL or a live handle.
 */
size_t mobsim_results_procedure_count(const struct MobsimResults *results);

/**
 * Number of drops per procedure.
 *
 * # Safety
 * `results` must be NULL or a live handle.
 */
size_t mobsim_results_drop_count(const struct MobsimResults *results);

/**
 * Pooled KPIs of the `procedure_index`-th procedure.
 *
 * # Safety
 * `results` must be a live handle; `out` must be writable.
 */
enum MobsimStatus mobsim_results_pooled(const struct MobsimResults *results,
                                        size_t procedure_index,
                                        struct MobsimKpis *out);

/**
 * KPIs of one drop.
 *
 * # Safety
 * `results` must be a live handle; `out` must be writable.
 */
enum MobsimStatus mobsim_results_drop(const struct MobsimResults *results,
                                      size_t procedure_index,
                                      size_t drop_index,
                                      struct MobsimKpis *out);

/**
 * Writes the same output files as the command-line tool into `out_dir`.
 *
 * # Safety
 * `results` must be a live handle; `out_dir` must be NUL-terminated.
 */
enum MobsimStatus mobsim_results_write(const struct MobsimResults *results,
                                       const char *out_dir,
                                       bool emit_events);

/**
 * # Safety
 * `results` must be NULL or a handle from this library, freed only once.
 */
void mobsim_results_free(struct MobsimResults *results);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MOBSIM_H */
