#ifndef LJET_H
#define LJET_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum LjetStatus {
  LJET_STATUS_OK = 0,
  /**
   * A check ran and failed: not a symmetry, unsolved, residual too large.
   */
  LJET_STATUS_MATH_FAILURE = 1,
  LJET_STATUS_INPUT_ERROR = 2,
  LJET_STATUS_NULL_POINTER = 3,
  LJET_STATUS_INTERNAL = 4,
} LjetStatus;

/**
 * An expression together with the context it was parsed in.
 */
typedef struct LjetExpr LjetExpr;

/**
 * A parsed problem file.
 */
typedef struct LjetProblem LjetProblem;

/**
 * Numeric overrides for [`ljet_run`]; zero fields keep the file's values.
 */
typedef struct LjetOptions {
  /**
   * Nonzero to use `seed`.
   */
  uint8_t has_seed;
  uint64_t seed;
  /**
   * Used when positive.
   */
  double tolerance;
  /**
   * Used when positive.
   */
  uint32_t degree_bound;
} LjetOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failing call on this thread. Valid until the next
 * call into the library on the same thread; never null.
 */
const char *ljet_last_error(void);

/**
 * Parses a problem file.
 *
 * # Safety
 * `json` must be a nul-terminated string and `out` a valid pointer.
 */
enum LjetStatus ljet_problem_from_json(const char *json, struct LjetProblem **out);

/**
 * # Safety
 * `problem` must come from [`ljet_problem_from_json`] or be null.
 */
void ljet_problem_free(struct LjetProblem *problem);

/**
 * Runs `command` (`check`, `cover`, `chi`, `reconstruct`, `reduce` or
 * `verify-solution`) and writes the JSON report to `out_json`. The status
 * mirrors the command-line exit code.
 *
 * # Safety
 * `problem` must be a live handle, `command` a nul-terminated string,
 * `options` null or valid, and `out_json` a valid pointer.
 */
enum LjetStatus ljet_run(const struct LjetProblem *problem,
                         const char *command,
                         const struct LjetOptions *options,
                         char **out_json);

/**
 * Parses `text` over a jet space of the given order with the nonlocal
 * coordinates `w, w1, ...` available.
 *
 * # Safety
 * `text` must be a nul-terminated string and `out` a valid pointer.
 */
enum LjetStatus ljet_expr_parse(const char *text, uint32_t order, struct LjetExpr **out);

/**
 * Parses `text` with the names declared by `problem`.
 *
 * # Safety
 * `problem` must be a live handle, `text` a nul-terminated string and
 * `out` a valid pointer.
 */
enum LjetStatus ljet_expr_parse_in(const struct LjetProblem *problem,
                                   const char *text,
                                   struct LjetExpr **out);

/**
 * Partial derivative with respect to the named coordinate or parameter.
 *
 * # Safety
 * `expr` must be a live handle, `symbol` a nul-terminated string and `out`
 * a valid pointer.
 */
enum LjetStatus ljet_expr_diff(const struct LjetExpr *expr,
                               const char *symbol,
                               struct LjetExpr **out);

/**
 * Total derivative `D = ∂_t + Σ v_{i+1} ∂_{v_i} + Σ w_{i+1} ∂_{w_i}`.
 *
 * # Safety
 * `expr` must be a live handle and `out` a valid pointer.
 */
enum LjetStatus ljet_expr_total_derivative(const struct LjetExpr *expr, struct LjetExpr **out);

/**
 * Canonical text of `expr`, or null when `expr` is null.
 *
 * # Safety
 * `expr` must be a live handle or null.
 */
char *ljet_expr_to_string(const struct LjetExpr *expr);

/**
 * Evaluates `expr` with `names[i] = values[i]`.
 *
 * # Safety
 * `expr` must be a live handle; `names` and `values` must hold `n`
 * entries (they may be null when `n` is 0); `out` must be valid.
 */
enum LjetStatus ljet_expr_eval(const struct LjetExpr *expr,
                               const char *const *names,
                               const double *values,
                               size_t n,
                               double *out);

/**
 * # Safety
 * `expr` must come from this library or be null.
 */
void ljet_expr_free(struct LjetExpr *expr);

/**
 * # Safety
 * `s` must come from this library or be null.
 */
void ljet_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LJET_H */
