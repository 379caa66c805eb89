#ifndef CCLSIM_H
#define CCLSIM_H

#include <stddef.h>
#include <stdint.h>

#define CCL_SUCCESS 0

#define CCL_INVALID_VALUE -30

#define CCL_INVARIANT_VIOLATION 10002

#define CCL_INVALID_HANDLE 10013

#define CCL_CLOCK_VIRTUAL 0

#define CCL_CLOCK_HOST 1

#define CCL_DEVICE_ANY -1

#define CCL_DEVICE_CPU 0

#define CCL_DEVICE_GPU 1

#define CCL_DEVICE_ACCEL 2

#define CCL_DEVICE_OTHER 3

#define CCL_INFO_NAME 0

#define CCL_INFO_VENDOR 1

#define CCL_INFO_TYPE 2

#define CCL_INFO_COMPUTE_UNITS 3

#define CCL_INFO_MAX_WG_TOTAL 4

#define CCL_INFO_MAX_WG_PER_DIM 5

#define CCL_INFO_PREFERRED_MULTIPLE 6

#define CCL_INFO_VERSION 7

typedef struct CclError CclError;

typedef struct CclProfiler CclProfiler;

typedef struct CclRegistry CclRegistry;

typedef struct CclReport CclReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Writes the description of `code` into `buf`; returns the size needed.
 */
size_t ccl_error_string(int32_t code, char *buf, size_t len);

int32_t ccl_error_code(const struct CclError *err);

/**
 * Valid until the error is destroyed.
 */
const char *ccl_error_message(const struct CclError *err);

const char *ccl_error_origin(const struct CclError *err);

void ccl_error_destroy(struct CclError *err);

int32_t ccl_registry_builtin(struct CclRegistry **reg);

int32_t ccl_registry_load(const char *path, struct CclRegistry **reg, struct CclError **err);

int32_t ccl_registry_from_json(const char *json, struct CclRegistry **reg, struct CclError **err);

void ccl_registry_destroy(struct CclRegistry *reg);

int32_t ccl_registry_device_count(const struct CclRegistry *reg, size_t *count);

/**
 * Formats one info key of the device at `index` (registry order). `needed`,
 * if non-null, receives the buffer size required for the full value.
 */
int32_t ccl_device_info(const struct CclRegistry *reg,
                        size_t index,
                        uint32_t key,
                        char *buf,
                        size_t len,
                        size_t *needed,
                        struct CclError **err);

/**
 * Applies the type and vendor filters (either may be skipped with
 * `CCL_DEVICE_ANY` / NULL) and writes matching registry indices. `count`
 * receives the number of matches even when it exceeds `cap`.
 */
int32_t ccl_select_devices(const struct CclRegistry *reg,
                           int32_t dev_type,
                           const char *vendor,
                           size_t *indices,
                           size_t cap,
                           size_t *count,
                           struct CclError **err);

/**
 * `real_ws`, `gws` and `lws` each hold `dims` elements.
 */
int32_t ccl_suggest_worksizes(const struct CclRegistry *reg,
                              size_t index,
                              size_t dims,
                              const uint64_t *real_ws,
                              uint64_t *gws,
                              uint64_t *lws,
                              struct CclError **err);

/**
 * Runs the double-buffered generator on device `index`, writing
 * `8 * n * iterations` bytes to `out_buf`. When `report` is non-null it
 * receives the profile of the run.
 */
int32_t ccl_run_pipeline(const struct CclRegistry *reg,
                         size_t index,
                         uint32_t n,
                         uint64_t iterations,
                         int32_t clock,
                         uint8_t *out_buf,
                         size_t out_len,
                         struct CclReport **report,
                         struct CclError **err);

int32_t ccl_profiler_new(struct CclProfiler **prof);

void ccl_profiler_destroy(struct CclProfiler *prof);

/**
 * Adds one completed event. Queues are created on first use.
 */
int32_t ccl_profiler_add_event(struct CclProfiler *prof,
                               const char *queue,
                               const char *event,
                               uint64_t start_ns,
                               uint64_t end_ns,
                               struct CclError **err);

int32_t ccl_profiler_set_elapsed(struct CclProfiler *prof, uint64_t elapsed_ns);

int32_t ccl_profiler_calc(const struct CclProfiler *prof,
                          struct CclReport **report,
                          struct CclError **err);

void ccl_report_destroy(struct CclReport *report);

/**
 * Any of the out-pointers may be NULL.
 */
int32_t ccl_report_totals(const struct CclReport *report,
                          uint64_t *total_events_ns,
                          uint64_t *effective_ns,
                          uint64_t *elapsed_ns,
                          double *device_fraction);

/**
 * Relative share of all event time taken by events named `event`.
 */
int32_t ccl_report_rel_duration(const struct CclReport *report,
                                const char *event,
                                double *rel,
                                struct CclError **err);

/**
 * Summed overlap of two event names in either order; 0 when they never overlap.
 */
int32_t ccl_report_overlap(const struct CclReport *report,
                           const char *a,
                           const char *b,
                           uint64_t *overlap_ns,
                           struct CclError **err);

/**
 * Writes the text summary (aggregates by time descending, overlaps by
 * duration descending); returns the size needed, 0 on a bad handle.
 */
size_t ccl_report_summary(const struct CclReport *report, char *buf, size_t len);

int32_t ccl_report_export(const struct CclReport *report, const char *path, struct CclError **err);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CCLSIM_H */
