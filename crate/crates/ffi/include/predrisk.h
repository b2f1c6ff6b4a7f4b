#ifndef PREDRISK_H
#define PREDRISK_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum PredriskStatus {
  PREDRISK_STATUS_OK = 0,
  /**
   * Null pointer, bad length or non-UTF-8 text.
   */
  PREDRISK_STATUS_INVALID_ARGUMENT = 1,
  /**
   * Syntax, schema or model-invariant error, or an unsupported request.
   */
  PREDRISK_STATUS_SPEC = 2,
  PREDRISK_STATUS_CONDITIONING_UNDEFINED = 3,
  PREDRISK_STATUS_RULE_MISMATCH = 4,
  PREDRISK_STATUS_CAP_EXCEEDED = 5,
  /**
   * A bug; the message describes the panic.
   */
  PREDRISK_STATUS_INTERNAL = 6,
} PredriskStatus;

/**
 * Opaque handle to a parsed and validated document.
 */
typedef struct PredriskSpec PredriskSpec;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Parses a NUL-terminated UTF-8 document into `*out`. Free the handle with
 * `predrisk_spec_free`.
 *
 * # Safety
 * `text` must be a valid NUL-terminated string and `out` a valid pointer.
 */
enum PredriskStatus predrisk_spec_parse(const char *text, struct PredriskSpec **out);

/**
 * Releases a handle; null is ignored.
 *
 * # Safety
 * `spec` must come from `predrisk_spec_parse` and not be freed twice.
 */
void predrisk_spec_free(struct PredriskSpec *spec);

/**
 * Writes the canonical serialization to `*out`; free it with
 * `predrisk_string_free`.
 *
 * # Safety
 * `spec` must be a live handle and `out` a valid pointer.
 */
enum PredriskStatus predrisk_spec_serialize(const struct PredriskSpec *spec, char **out);

/**
 * # Safety
 * `s` must come from this library and not be freed twice; null is ignored.
 */
void predrisk_string_free(char *s);

/**
 * Bayes point prediction for one observation and its posterior predictive
 * risk. The prediction has `*prediction_len` components, written to
 * `prediction` when `prediction_cap` is large enough; otherwise the call
 * fails with `INVALID_ARGUMENT` and still reports the needed length.
 *
 * # Safety
 * `y_obs` must point to `y_obs_len` doubles, `prediction` to
 * `prediction_cap` doubles, and the out-pointers must be valid.
 */
enum PredriskStatus predrisk_predict(const struct PredriskSpec *spec,
                                     const double *y_obs,
                                     size_t y_obs_len,
                                     double *prediction,
                                     size_t prediction_cap,
                                     size_t *prediction_len,
                                     double *risk_out);

/**
 * Bayes prediction risk of the Bayes rule. `mc_samples` and `seed` are used
 * only when neither an exact nor a closed-form evaluation applies;
 * `*error_out` is the reported error bound (0 for exact values).
 *
 * # Safety
 * `spec` must be a live handle and the out-pointers valid.
 */
enum PredriskStatus predrisk_bayes_risk(const struct PredriskSpec *spec,
                                        uint64_t mc_samples,
                                        uint64_t seed,
                                        double *value_out,
                                        double *error_out);

/**
 * Checks every rule of a finite model against the Bayes rule and sets
 * `*admissible` to whether none dominates it at tolerance `tol`.
 *
 * # Safety
 * `spec` must be a live handle and `admissible` a valid pointer.
 */
enum PredriskStatus predrisk_certify_bayes_admissible(const struct PredriskSpec *spec,
                                                      double tol,
                                                      uint64_t cap,
                                                      bool *admissible);

/**
 * Message for the last failed call on this thread, or null. The pointer
 * stays valid until the next call into this library on the same thread.
 */
const char *predrisk_last_error_message(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PREDRISK_H */
