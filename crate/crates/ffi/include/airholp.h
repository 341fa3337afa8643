#ifndef AIRHOLP_H
#define AIRHOLP_H

/* Generated by cbindgen from the airholp-ffi crate; edit src/lib.rs instead. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Outcome of a fallible call. Zero is success; anything else is a failure
// whose message `airholp_last_error_message` returns.
typedef enum AirholpStatus {
  AIRHOLP_STATUS_OK = 0,
  // A required pointer argument was null.
  AIRHOLP_STATUS_NULL_POINTER = 1,
  // A parameter is outside its documented range.
  AIRHOLP_STATUS_INVALID_ARGUMENT = 2,
  // Array or matrix shapes do not line up.
  AIRHOLP_STATUS_DIMENSION_MISMATCH = 3,
  // An input value is NaN or infinite.
  AIRHOLP_STATUS_NON_FINITE = 4,
  // The response never varies, so correlation scores are undefined.
  AIRHOLP_STATUS_ZERO_VARIANCE_RESPONSE = 5,
  // A numerical routine failed.
  AIRHOLP_STATUS_NUMERICAL = 6,
  // Malformed input data.
  AIRHOLP_STATUS_DATA = 7,
  // An input/output error from the underlying library.
  AIRHOLP_STATUS_IO = 8,
  // A panic was caught at the boundary; state may be inconsistent.
  AIRHOLP_STATUS_PANIC = 9,
} AirholpStatus;

// An immutable dataset: a design matrix with its response, optionally
// standardized at construction.
typedef struct AirholpDataset AirholpDataset;

// Scores, ranking, and retention set from one screening call.
typedef struct AirholpResult AirholpResult;

// The penalty path of one adaptive screening run.
typedef struct AirholpTrace AirholpTrace;

// Tuning knobs for `airholp_screen_air_holp`; get defaults from
// `airholp_air_options_default`.
typedef struct AirholpAirOptions {
  // Starting penalty; clamped into [0, c sqrt(n)] at run time.
  double r0;
  // Interval constant: candidate penalties stay in [0, c sqrt(n)].
  double c;
  // Stopping tolerance on successive penalties.
  double delta;
  // Cap on penalty updates.
  size_t max_iter;
} AirholpAirOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message from the most recent failure on this thread, as NUL-terminated
// UTF-8; empty before the first failure.
//
// The pointer stays valid until the next failing call on the same thread.
const char *airholp_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *airholp_version(void);

// Default retention size ceil(n / ln n) for n observations.
//
// # Safety
// `out` must be a valid pointer to a `size_t`.
enum AirholpStatus airholp_default_threshold(size_t n, size_t *out);

// Default adaptive-screening options.
struct AirholpAirOptions airholp_air_options_default(void);

// Builds a dataset from a row-major n-by-p design and a response of
// length n. All entries must be finite, n >= 2 and p >= 1.
//
// With `standardize` set, columns are centered and scaled to unit sample
// deviation and the response is centered, matching what the screening
// theory assumes; otherwise the data are taken as given.
//
// # Safety
// `x` must point to n * p readable doubles, `y` to n readable doubles,
// and `out` must be a valid pointer to receive the handle. The handle
// must be released with `airholp_dataset_free`.
enum AirholpStatus airholp_dataset_new(size_t n,
                                       size_t p,
                                       const double *x,
                                       const double *y,
                                       bool standardize,
                                       struct AirholpDataset **out);

// Releases a dataset; a null pointer is a no-op.
//
// # Safety
// `dataset` must be null or a handle from `airholp_dataset_new` that
// has not been freed yet.
void airholp_dataset_free(struct AirholpDataset *dataset);

// Number of observations, or 0 for a null handle.
//
// # Safety
// `dataset` must be null or a live dataset handle.
size_t airholp_dataset_n(const struct AirholpDataset *dataset);

// Number of predictors, or 0 for a null handle.
//
// # Safety
// `dataset` must be null or a live dataset handle.
size_t airholp_dataset_p(const struct AirholpDataset *dataset);

// Marginal correlation screening; keeps the top `m` features.
//
// # Safety
// `dataset` must be a live dataset handle and `out` a valid pointer. The
// result must be released with `airholp_result_free`.
enum AirholpStatus airholp_screen_sis(const struct AirholpDataset *dataset,
                                      size_t m,
                                      struct AirholpResult **out);

// OLS-projection screening (the ridge limit at r = 0); keeps the top `m`
// features.
//
// # Safety
// Same contract as `airholp_screen_sis`.
enum AirholpStatus airholp_screen_holp(const struct AirholpDataset *dataset,
                                       size_t m,
                                       struct AirholpResult **out);

// Penalized projection screening at a fixed penalty r >= 0; keeps the top
// `m` features.
//
// # Safety
// Same contract as `airholp_screen_sis`.
enum AirholpStatus airholp_screen_ridge_holp(const struct AirholpDataset *dataset,
                                             double r,
                                             size_t m,
                                             struct AirholpResult **out);

// Adaptive projection screening: tunes the penalty, keeps the top `m`
// features, and optionally returns the penalty path.
//
// `options` may be null for defaults. `out_trace` may be null when the
// caller only wants the final result.
//
// # Safety
// `dataset` must be a live dataset handle, `out` a valid pointer, and
// `options`/`out_trace` each null or valid. The outputs must be released
// with `airholp_result_free` and `airholp_trace_free`.
enum AirholpStatus airholp_screen_air_holp(const struct AirholpDataset *dataset,
                                           const struct AirholpAirOptions *options,
                                           size_t m,
                                           struct AirholpResult **out,
                                           struct AirholpTrace **out_trace);

// Releases a screening result; a null pointer is a no-op.
//
// # Safety
// `result` must be null or an unfreed handle from a screen call.
void airholp_result_free(struct AirholpResult *result);

// Number of features scored, or 0 for a null handle.
//
// # Safety
// `result` must be null or a live result handle.
size_t airholp_result_num_features(const struct AirholpResult *result);

// Number of features retained, or 0 for a null handle.
//
// # Safety
// `result` must be null or a live result handle.
size_t airholp_result_num_screened(const struct AirholpResult *result);

// Ridge penalty behind the scores, or NaN for penalty-free methods and
// null handles.
//
// # Safety
// `result` must be null or a live result handle.
double airholp_result_penalty(const struct AirholpResult *result);

// Copies the per-feature scores; `len` must equal the feature count.
//
// # Safety
// `result` must be a live result handle and `out` must point to `len`
// writable doubles.
enum AirholpStatus airholp_result_scores(const struct AirholpResult *result,
                                         double *out,
                                         size_t len);

// Copies the zero-based feature ranking, best first; `len` must equal the
// feature count.
//
// # Safety
// `result` must be a live result handle and `out` must point to `len`
// writable `size_t`s.
enum AirholpStatus airholp_result_ranking(const struct AirholpResult *result,
                                          size_t *out,
                                          size_t len);

// Copies the zero-based retained feature indices; `len` must equal
// `airholp_result_num_screened`.
//
// # Safety
// `result` must be a live result handle and `out` must point to `len`
// writable `size_t`s.
enum AirholpStatus airholp_result_screened(const struct AirholpResult *result,
                                           size_t *out,
                                           size_t len);

// Number of warnings attached to the result, or 0 for a null handle.
//
// # Safety
// `result` must be null or a live result handle.
size_t airholp_result_num_warnings(const struct AirholpResult *result);

// Copies warning `idx` into `buf` as NUL-terminated UTF-8, truncating to
// `cap` bytes including the terminator. Returns the warning's full byte
// length excluding the terminator, or -1 when the handle is null or `idx`
// is out of range; call with a null `buf` to size the allocation first.
//
// # Safety
// `result` must be null or a live result handle; `buf` must be null or
// point to `cap` writable bytes.
ptrdiff_t airholp_result_warning(const struct AirholpResult *result,
                                 size_t idx,
                                 char *buf,
                                 size_t cap);

// Releases a trace; a null pointer is a no-op.
//
// # Safety
// `trace` must be null or an unfreed handle from
// `airholp_screen_air_holp`.
void airholp_trace_free(struct AirholpTrace *trace);

// Number of penalty updates performed, or 0 for a null handle.
//
// # Safety
// `trace` must be null or a live trace handle.
size_t airholp_trace_iterations(const struct AirholpTrace *trace);

// Whether the stopping rule fired before the iteration cap; false for a
// null handle.
//
// # Safety
// `trace` must be null or a live trace handle.
bool airholp_trace_converged(const struct AirholpTrace *trace);

// Length of the penalty path (iterations + 1), or 0 for a null handle.
//
// # Safety
// `trace` must be null or a live trace handle.
size_t airholp_trace_len(const struct AirholpTrace *trace);

// The final penalty, or NaN for a null handle.
//
// # Safety
// `trace` must be null or a live trace handle.
double airholp_trace_final_penalty(const struct AirholpTrace *trace);

// Copies the penalty path, starting value first; `len` must equal
// `airholp_trace_len`.
//
// # Safety
// `trace` must be a live trace handle and `out` must point to `len`
// writable doubles.
enum AirholpStatus airholp_trace_penalties(const struct AirholpTrace *trace,
                                           double *out,
                                           size_t len);

// Copies the objective value at each accepted update; `len` must equal
// `airholp_trace_iterations`.
//
// # Safety
// `trace` must be a live trace handle and `out` must point to `len`
// writable doubles.
enum AirholpStatus airholp_trace_objective_values(const struct AirholpTrace *trace,
                                                  double *out,
                                                  size_t len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* AIRHOLP_H */
