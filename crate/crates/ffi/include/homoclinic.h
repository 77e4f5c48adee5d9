#ifndef HOMOCLINIC_H
#define HOMOCLINIC_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum {
  HC_STATUS_OK = 0,
  HC_STATUS_NULL_POINTER = 1,
  HC_STATUS_INVALID_UTF8 = 2,
  /**
   * The configuration could not be parsed or failed validation.
   */
  HC_STATUS_CONFIG = 3,
  HC_STATUS_INVALID_ARGUMENT = 4,
  /**
   * The level lies outside `1..=N` of the problem.
   */
  HC_STATUS_OUT_OF_RANGE = 5,
  /**
   * The solver did not certify a solution; see `hc_last_error`.
   */
  HC_STATUS_SOLVER = 6,
  /**
   * The output buffer is too short; the required length is reported.
   */
  HC_STATUS_BUFFER_TOO_SMALL = 7,
  HC_STATUS_PANIC = 8,
} HcStatus;

/**
 * A configured problem instance.
 */
typedef struct HcProblem HcProblem;

/**
 * A certified minimizer at one level.
 */
typedef struct HcSolution HcSolution;

/**
 * Scalar summary of an `HcSolution`.
 */
typedef struct {
  size_t n;
  double eta;
  double norm_x;
  double u_max;
  double residual_inf;
  double pg_norm;
  size_t iterations;
  int64_t window_lo;
  int64_t window_hi;
  /**
   * Nonzero when every certificate holds.
   */
  uint8_t certified;
} HcSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static nul-terminated string.
 */
const char *hc_version(void);

/**
 * Message of the last failed call on this thread, or null. The pointer is
 * valid until the next call into this library from the same thread.
 */
const char *hc_last_error(void);

/**
 * Builds a problem from a JSON run configuration, the same document the
 * command line reads.
 *
 * # Safety
 * `json` must be a nul-terminated string and `out` a valid pointer.
 */
HcStatus hc_problem_from_json(const char *json, HcProblem **out);

/**
 * Releases a problem. Null is ignored.
 *
 * # Safety
 * `problem` must come from `hc_problem_from_json` and not be used again.
 */
void hc_problem_free(HcProblem *problem);

/**
 * Number of levels `N` in the problem's configuration.
 *
 * # Safety
 * `problem` and `out` must be valid pointers.
 */
HcStatus hc_problem_levels(const HcProblem *problem, size_t *out);

/**
 * Energy `J` of the vector with `values[i]` at site `offset + i` and zero
 * elsewhere.
 *
 * # Safety
 * `values` must point to `len` doubles; `problem` and `out` must be valid.
 */
HcStatus hc_energy(const HcProblem *problem,
                   int64_t offset,
                   const double *values,
                   size_t len,
                   double *out);

/**
 * Gradient of `J` at sites `offset - 1 ..= offset + len`, written to `out`,
 * which must hold `len + 2` doubles.
 *
 * # Safety
 * `values` must point to `len` doubles and `out` to `out_len` doubles.
 */
HcStatus hc_gradient(const HcProblem *problem,
                     int64_t offset,
                     const double *values,
                     size_t len,
                     double *out,
                     size_t out_len);

/**
 * Minimizes `J` over the box of level `n` and returns the certified
 * solution. On `HC_STATUS_SOLVER` no solution is returned.
 *
 * # Safety
 * `problem` and `out` must be valid pointers.
 */
HcStatus hc_solve_level(const HcProblem *problem, size_t n, HcSolution **out);

/**
 * Releases a solution. Null is ignored.
 *
 * # Safety
 * `solution` must come from `hc_solve_level` and not be used again.
 */
void hc_solution_free(HcSolution *solution);

/**
 * # Safety
 * `solution` and `out` must be valid pointers.
 */
HcStatus hc_solution_summary(const HcSolution *solution, HcSummary *out);

/**
 * Copies the solution values at sites `window_lo ..= window_hi` into
 * `buf`. `written` receives the number of values, or the required length
 * when the buffer is too small.
 *
 * # Safety
 * `buf` must point to `len` doubles; `solution` and `written` must be valid.
 */
HcStatus hc_solution_values(const HcSolution *solution, double *buf, size_t len, size_t *written);

/**
 * `phi_p(t) = |t|^(p-2) t` for `p > 1`.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
HcStatus hc_phi_p(double t, double p, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HOMOCLINIC_H */
