#ifndef FINJET_H
#define FINJET_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes. 0 to 3 coincide with the exit codes of the `finjet` binary.
 */
typedef enum FinjetStatus {
  FINJET_STATUS_OK = 0,
  /**
   * A verification check failed or a residual regressed.
   */
  FINJET_STATUS_CHECK_FAILED = 1,
  /**
   * Bad configuration, expression or argument value.
   */
  FINJET_STATUS_CONFIG = 2,
  /**
   * Numeric domain error, invalid model or point outside the domain.
   */
  FINJET_STATUS_NUMERIC = 3,
  FINJET_STATUS_NULL_POINTER = 4,
  /**
   * The output buffer is too small; the needed length is still written.
   */
  FINJET_STATUS_BUFFER_TOO_SMALL = 5,
  FINJET_STATUS_INTERNAL = 6,
} FinjetStatus;

/**
 * A loaded scenario: model, maps, symbols, densities and sampling setup.
 */
typedef struct FinjetScenario FinjetScenario;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, empty after a success.
 * Valid until the next call on the same thread.
 */
const char *finjet_last_error(void);

/**
 * Engine version, a static string.
 */
const char *finjet_version(void);

/**
 * Parses a scenario from JSON text.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` a writable pointer.
 */
enum FinjetStatus finjet_scenario_load(const char *json, struct FinjetScenario **out);

/**
 * Reads a scenario file.
 *
 * # Safety
 * As for [`finjet_scenario_load`].
 */
enum FinjetStatus finjet_scenario_load_file(const char *path, struct FinjetScenario **out);

/**
 * A scenario holding only a model, given as the JSON of the `model` entry.
 *
 * # Safety
 * As for [`finjet_scenario_load`].
 */
enum FinjetStatus finjet_scenario_from_model(const char *model_json, struct FinjetScenario **out);

/**
 * # Safety
 * `h` must come from a `finjet_scenario_*` constructor and not be used
 * afterwards. Null is ignored.
 */
void finjet_scenario_free(struct FinjetScenario *h);

/**
 * Base dimension of the scenario's model, 0 for a null handle.
 *
 * # Safety
 * `h` must be null or a live handle.
 */
size_t finjet_scenario_dim(const struct FinjetScenario *h);

/**
 * Evaluates a quantity (`F`, `g`, `A`, `omega`, `N`, `chern`, `berwald`,
 * `cartan`, `landsberg`, `sasaki`, `betas`) at `(x, y)`, each of length
 * `n`. Values go to `out` in row-major order; `*len` receives their count.
 * `x` and `y` may be null for `betas`.
 *
 * # Safety
 * `x`, `y` must point to `n` doubles, `out` to `cap` doubles, `len` must be
 * writable.
 */
enum FinjetStatus finjet_eval(const struct FinjetScenario *h,
                              const char *quantity,
                              const double *x,
                              const double *y,
                              size_t n,
                              double *out,
                              size_t cap,
                              size_t *len);

/**
 * Runs verification suites and writes the report JSON to `*report`.
 * `suites` is a comma-separated list, null or empty for all. `seed` is used
 * when `use_seed` is nonzero; a NaN `tol` keeps the per-suite tolerances.
 * Returns `CheckFailed` when the report holds a failing check.
 *
 * # Safety
 * `h` must be live, `suites` null or NUL-terminated, `report` writable.
 */
enum FinjetStatus finjet_verify(const struct FinjetScenario *h,
                                const char *suites,
                                uint64_t seed,
                                int32_t use_seed,
                                double tol,
                                char **report);

/**
 * Compares two report JSON texts. The difference lines go to `*lines`, one
 * per line. Returns `CheckFailed` when a residual regressed.
 *
 * # Safety
 * Both texts must be NUL-terminated, `lines` writable.
 */
enum FinjetStatus finjet_report_diff(const char *baseline, const char *candidate, char **lines);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not be used afterwards.
 */
void finjet_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FINJET_H */
