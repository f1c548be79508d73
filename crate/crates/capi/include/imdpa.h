#ifndef IMDPA_H
#define IMDPA_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status of a call. Zero means success; anything else leaves a message
 * readable through `imdpa_last_error`.
 */
typedef enum {
  IMDPA_STATUS_OK = 0,
  IMDPA_STATUS_NULL_ARGUMENT = 1,
  IMDPA_STATUS_INVALID_UTF8 = 2,
  IMDPA_STATUS_INVALID_MODEL = 3,
  IMDPA_STATUS_INVALID_FORMULA = 4,
  IMDPA_STATUS_EVAL_FAILED = 5,
} ImdpaStatus;

/**
 * Opaque handle to a parsed chain.
 */
typedef struct ImdpaModel ImdpaModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Parses a chain from JSON and hands back an owned handle.
 *
 * # Safety
 * `json` must be a NUL-terminated string or NULL; `out` must point to
 * writable storage for one pointer. The handle must be released with
 * `imdpa_model_free`.
 */
ImdpaStatus imdpa_model_parse(const char *json, ImdpaModel **out);

/**
 * Releases a handle returned by `imdpa_model_parse`. NULL is ignored.
 *
 * # Safety
 * `model` must be a pointer previously returned by `imdpa_model_parse`
 * and not freed since, or NULL.
 */
void imdpa_model_free(ImdpaModel *model);

/**
 * Number of states, or zero for NULL.
 *
 * # Safety
 * `model` must be a live handle or NULL.
 */
uintptr_t imdpa_model_state_count(const ImdpaModel *model);

/**
 * Number of same-label blocks, or zero for NULL.
 *
 * # Safety
 * `model` must be a live handle or NULL.
 */
uintptr_t imdpa_model_block_count(const ImdpaModel *model);

/**
 * Builds the lumped-chain abstraction with automatically chosen
 * representatives. Writes its JSON to `out_json` and, unless NULL, the
 * radius to `out_epsilon`.
 *
 * # Safety
 * `model` must be a live handle; `out_json` must point to writable
 * storage for one pointer; `out_epsilon` may be NULL. The string must be
 * released with `imdpa_string_free`.
 */
ImdpaStatus imdpa_standard_abstraction(const ImdpaModel *model,
                                       char **out_json,
                                       double *out_epsilon);

/**
 * Builds the interval-valued abstraction. Writes its JSON to `out_json`
 * and, unless NULL, the worst per-block radius to `out_xi_max`.
 *
 * # Safety
 * As for `imdpa_standard_abstraction`.
 */
ImdpaStatus imdpa_interval_abstraction(const ImdpaModel *model,
                                       char **out_json,
                                       double *out_xi_max);

/**
 * Builds the finitely branching abstraction whose rows are the extreme
 * points of the interval rows, and writes its JSON to `out_json`.
 *
 * # Safety
 * As for `imdpa_standard_abstraction`.
 */
ImdpaStatus imdpa_vertex_abstraction(const ImdpaModel *model, char **out_json);

/**
 * Evaluates a numeric query (`P=? [...]`) on the chain and writes the
 * value at `state` (or at the initial state when `state` is NULL).
 *
 * # Safety
 * `model` must be a live handle; `formula` a NUL-terminated string;
 * `state` a NUL-terminated string or NULL; `out_value` non-NULL.
 */
ImdpaStatus imdpa_check_value(const ImdpaModel *model,
                              const char *formula,
                              const char *state,
                              double *out_value);

/**
 * Evaluates a threshold formula on the chain and writes whether `state`
 * (or the initial state) satisfies it.
 *
 * # Safety
 * As for `imdpa_check_value`, with `out_sat` non-NULL.
 */
ImdpaStatus imdpa_check_verdict(const ImdpaModel *model,
                                const char *formula,
                                const char *state,
                                bool *out_sat);

/**
 * Builds the vertex quotient of the chain, evaluates a `Pmin=?` or
 * `Pmax=?` query on it, and writes the value at the initial block plus
 * the propagated error radius.
 *
 * # Safety
 * `model` must be a live handle; `formula` a NUL-terminated string;
 * `out_value` non-NULL; `out_eps` may be NULL.
 */
ImdpaStatus imdpa_mdpa_check(const ImdpaModel *model,
                             const char *formula,
                             double *out_value,
                             double *out_eps);

/**
 * Message of the most recent failure on this thread, or NULL. Valid
 * until the next call into this library from the same thread.
 *
 * # Safety
 * The returned pointer must not be freed or used after a further call.
 */
const char *imdpa_last_error(void);

/**
 * Releases a string returned by this library. NULL is ignored.
 *
 * # Safety
 * `s` must be a pointer previously returned in an `out_json` argument
 * and not freed since, or NULL.
 */
void imdpa_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* IMDPA_H */
