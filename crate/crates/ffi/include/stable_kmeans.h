#ifndef STABLE_KMEANS_H
#define STABLE_KMEANS_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes.
 */
typedef enum SkStatus {
  SK_STATUS_OK = 0,
  SK_STATUS_NULL_ARGUMENT = 1,
  SK_STATUS_INVALID_UTF8 = 2,
  SK_STATUS_INVALID_INPUT = 3,
  SK_STATUS_BUDGET_EXCEEDED = 4,
  SK_STATUS_PANIC = 5,
} SkStatus;

/**
 * Outcome of a chain verification.
 */
typedef enum SkVerdict {
  SK_VERDICT_PASS = 0,
  SK_VERDICT_FAIL = 1,
  SK_VERDICT_INCONCLUSIVE = 2,
} SkVerdict;

/**
 * Opaque instance handle.
 */
typedef struct SkInstance SkInstance;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or NULL. The pointer stays
 * valid until the next failing call on the same thread.
 */
const char *sk_last_error_message(void);

/**
 * Parses an instance from its JSON form.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` a valid pointer.
 */
enum SkStatus sk_instance_from_json(const char *json, struct SkInstance **out);

/**
 * Releases an instance. NULL is ignored.
 *
 * # Safety
 * `inst` must come from [`sk_instance_from_json`] and not be used afterwards.
 */
void sk_instance_free(struct SkInstance *inst);

/**
 * # Safety
 * `inst` must be a live handle or NULL (which yields 0).
 */
size_t sk_instance_n_points(const struct SkInstance *inst);

/**
 * # Safety
 * `inst` must be a live handle or NULL (which yields 0).
 */
size_t sk_instance_n_centres(const struct SkInstance *inst);

/**
 * # Safety
 * `inst` must be a live handle or NULL (which yields 0).
 */
size_t sk_instance_k(const struct SkInstance *inst);

/**
 * Local search from the first `k` centres. With `truncate` set the run stops
 * after the iteration bound. Writes the trace as JSON.
 *
 * # Safety
 * `inst` must be a live handle and `out` a valid pointer.
 */
enum SkStatus sk_solve_json(const struct SkInstance *inst, size_t rho, bool truncate, char **out);

/**
 * Certifies stability at factor `alpha` (e.g. `"21/20"` or `"1.05"`).
 *
 * # Safety
 * `inst` must be a live handle, `alpha` a NUL-terminated string, `out` valid.
 */
enum SkStatus sk_certify_json(const struct SkInstance *inst, const char *alpha, char **out);

/**
 * Runs the whole reduction chain on a DIMACS CNF. `k_override` = 0 keeps the
 * required wheel copy count. Writes the instance and provenance as JSON.
 *
 * # Safety
 * `dimacs` must be a NUL-terminated string and `out` a valid pointer.
 */
enum SkStatus sk_reduce_cnf_json(const char *dimacs, uint32_t k_override, char **out);

/**
 * Verifies the chain on a DIMACS CNF with a node cap per search (0 = default).
 * Writes the report as JSON and the verdict to `verdict`.
 *
 * # Safety
 * `dimacs` must be a NUL-terminated string; `out` and `verdict` valid pointers.
 */
enum SkStatus sk_verify_chain_json(const char *dimacs,
                                   uint32_t k_override,
                                   uint64_t max_nodes,
                                   char **out,
                                   enum SkVerdict *verdict);

/**
 * Releases a string returned by this library. NULL is ignored.
 *
 * # Safety
 * `s` must come from this library and not be used afterwards.
 */
void sk_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* STABLE_KMEANS_H */
