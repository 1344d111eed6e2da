#ifndef DAGPREEMPT_H
#define DAGPREEMPT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define DP_SCHEDULER_HEFT 0

#define DP_SCHEDULER_CPOP 1

#define DP_SCHEDULER_MINMIN 2

#define DP_SCHEDULER_MAXMIN 3

#define DP_SCHEDULER_RANDOM 4

#define DP_POLICY_PREEMPTIVE 0

#define DP_POLICY_NON_PREEMPTIVE 1

#define DP_POLICY_LAST_K 2

typedef enum {
  DP_STATUS_OK = 0,
  DP_STATUS_NULL_POINTER = 1,
  DP_STATUS_INVALID_UTF8 = 2,
  DP_STATUS_PARSE_ERROR = 3,
  DP_STATUS_INVALID_ARGUMENT = 4,
  DP_STATUS_SIMULATION_ERROR = 5,
  DP_STATUS_BUFFER_TOO_SMALL = 6,
  DP_STATUS_PANIC = 7,
} DpStatus;

typedef struct DpResult DpResult;

typedef struct DpWorkload DpWorkload;

typedef struct {
  double total_makespan;
  double mean_makespan;
  double mean_flowtime;
  double mean_utilization;
  /**
   * Wall-clock seconds.
   */
  double scheduler_runtime;
} DpMetrics;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or NULL. Valid until the
 * next failing call on the same thread; do not free.
 */
const char *dp_last_error_message(void);

/**
 * Parses workflow JSON into a new workload handle.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` a writable pointer.
 */
DpStatus dp_workload_from_json(const char *json, DpWorkload **out);

/**
 * Generates a workload from a JSON generator spec, or from the defaults
 * when `spec_json` is NULL. `seed` replaces the spec's seed.
 *
 * # Safety
 * `spec_json` must be NULL or a NUL-terminated string; `out` must be writable.
 */
DpStatus dp_workload_generate(const char *spec_json, uint64_t seed, DpWorkload **out);

/**
 * # Safety
 * `workload` must be NULL or a handle from this library not yet freed.
 */
void dp_workload_free(DpWorkload *workload);

/**
 * Number of task graphs, or 0 for NULL.
 *
 * # Safety
 * `workload` must be NULL or a live handle.
 */
size_t dp_workload_graph_count(const DpWorkload *workload);

/**
 * Number of network nodes, or 0 for NULL.
 *
 * # Safety
 * `workload` must be NULL or a live handle.
 */
size_t dp_workload_node_count(const DpWorkload *workload);

/**
 * Runs a simulation. `k` is only read for `DP_POLICY_LAST_K`; `seed` only
 * affects the random scheduler. The result keeps the workload alive.
 *
 * # Safety
 * `workload` must be a live handle and `out` writable.
 */
DpStatus dp_simulate(const DpWorkload *workload,
                     uint32_t scheduler,
                     uint32_t policy,
                     size_t k,
                     uint64_t seed,
                     DpResult **out);

/**
 * # Safety
 * `result` must be a live handle and `out` writable.
 */
DpStatus dp_result_metrics(const DpResult *result, DpMetrics *out);

/**
 * Copies per-node utilization into `buf`, which must hold at least
 * `dp_workload_node_count` values.
 *
 * # Safety
 * `result` must be a live handle and `buf` valid for `len` writes.
 */
DpStatus dp_result_utilization(const DpResult *result, double *buf, size_t len);

/**
 * Number of validity violations in the final schedule; 0 means valid.
 *
 * # Safety
 * `result` must be a live handle and `out` writable.
 */
DpStatus dp_result_violation_count(const DpResult *result, size_t *out);

/**
 * Gantt JSON of the final schedule. Free the string with [`dp_string_free`].
 *
 * # Safety
 * `result` must be a live handle and `out` writable.
 */
DpStatus dp_result_gantt_json(const DpResult *result, char **out);

/**
 * # Safety
 * `s` must be NULL or a string returned by this library, not yet freed.
 */
void dp_string_free(char *s);

/**
 * # Safety
 * `result` must be NULL or a handle from [`dp_simulate`] not yet freed.
 */
void dp_result_free(DpResult *result);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DAGPREEMPT_H */
