#ifndef VARQITE_MKP_H
#define VARQITE_MKP_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible function.
 */
typedef enum VqmStatus {
  VQM_STATUS_OK = 0,
  VQM_STATUS_NULL_POINTER = 1,
  VQM_STATUS_INVALID_ARGUMENT = 2,
  VQM_STATUS_INVALID_INSTANCE = 3,
  VQM_STATUS_IO = 4,
  VQM_STATUS_PARSE = 5,
  VQM_STATUS_NUMERIC = 6,
  VQM_STATUS_OUT_OF_RANGE = 7,
  VQM_STATUS_PANIC = 99,
} VqmStatus;

/**
 * Opaque knapsack instance.
 */
typedef struct VqmInstance VqmInstance;

/**
 * Opaque experiment output: per-trial rows plus the aggregated report.
 */
typedef struct VqmResults VqmResults;

/**
 * One results row in C-friendly form. Missing gaps are NaN.
 */
typedef struct VqmTrialRow {
  uint32_t trial;
  uint64_t seed;
  uint64_t mkp_objective;
  bool feasible;
  bool optimal;
  double qubo_objective;
  double opt_gap;
  double opt_gap_mkp;
  double final_energy;
  uint64_t steps;
} VqmTrialRow;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. The pointer is
 * valid until the next failing call on the same thread.
 */
const char *vqm_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *vqm_version(void);

/**
 * Generates a seeded instance with `m` knapsacks and `n` items.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
enum VqmStatus vqm_instance_generate(uint64_t seed, size_t m, size_t n, struct VqmInstance **out);

/**
 * Parses an instance from its JSON form.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum VqmStatus vqm_instance_from_json(const char *json, struct VqmInstance **out);

/**
 * Releases an instance; null is ignored.
 *
 * # Safety
 * `inst` must be null or a handle from this library not yet freed.
 */
void vqm_instance_free(struct VqmInstance *inst);

/**
 * Number of binary variables (`m * n`), or 0 for a null handle.
 *
 * # Safety
 * `inst` must be null or a live handle.
 */
size_t vqm_instance_n_vars(const struct VqmInstance *inst);

/**
 * Writes the instance id as a NUL-terminated string into `buf` of
 * `len` bytes. Fails with `OutOfRange` if it does not fit.
 *
 * # Safety
 * `inst` must be a live handle and `buf` writable for `len` bytes.
 */
enum VqmStatus vqm_instance_id(const struct VqmInstance *inst, char *buf, size_t len);

/**
 * Brute-force MKP optimum value.
 *
 * # Safety
 * `inst` must be a live handle and `out` writable.
 */
enum VqmStatus vqm_instance_optimum(const struct VqmInstance *inst, uint64_t *out);

/**
 * Runs `trials` trials of each method in the comma-separated `methods`
 * list (or `"all"`) over `count` instances with default engine settings.
 * With `deterministic` set, runtimes are recorded as 0.
 *
 * # Safety
 * `instances` must point to `count` live handles, `methods` must be a
 * NUL-terminated string and `out` writable.
 */
enum VqmStatus vqm_solve(const struct VqmInstance *const *instances,
                         size_t count,
                         const char *methods,
                         size_t trials,
                         uint64_t seed,
                         bool deterministic,
                         struct VqmResults **out);

/**
 * Releases a results handle; null is ignored.
 *
 * # Safety
 * `res` must be null or a handle from [`vqm_solve`] not yet freed.
 */
void vqm_results_free(struct VqmResults *res);

/**
 * Number of trial rows, or 0 for a null handle.
 *
 * # Safety
 * `res` must be null or a live handle.
 */
size_t vqm_results_len(const struct VqmResults *res);

/**
 * Copies row `index` (sorted by instance, method, trial) into `out`.
 *
 * # Safety
 * `res` must be a live handle and `out` writable.
 */
enum VqmStatus vqm_results_row(const struct VqmResults *res, size_t index, struct VqmTrialRow *out);

/**
 * Writes the results table as CSV to `path`.
 *
 * # Safety
 * `res` must be a live handle and `path` a NUL-terminated string.
 */
enum VqmStatus vqm_results_write_csv(const struct VqmResults *res, const char *path);

/**
 * Writes the per-method report as CSV to `path`.
 *
 * # Safety
 * `res` must be a live handle and `path` a NUL-terminated string.
 */
enum VqmStatus vqm_results_write_report(const struct VqmResults *res, const char *path);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* VARQITE_MKP_H */
