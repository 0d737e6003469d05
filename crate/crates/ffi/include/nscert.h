#ifndef NSCERT_H
#define NSCERT_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible function.
 */
typedef enum NscertStatus {
  NSCERT_STATUS_OK = 0,
  NSCERT_STATUS_NULL_POINTER = 1,
  NSCERT_STATUS_INVALID_UTF8 = 2,
  NSCERT_STATUS_SCHEMA = 3,
  NSCERT_STATUS_IO = 4,
  NSCERT_STATUS_INVALID_INPUT = 5,
  NSCERT_STATUS_SOLVER_UNDECIDED = 6,
  NSCERT_STATUS_HYPOTHESIS_FAILED = 7,
  NSCERT_STATUS_PANIC = 8,
} NscertStatus;

/**
 * Theta-body membership outcome.
 */
typedef enum NscertTheta {
  NSCERT_THETA_FEASIBLE = 0,
  NSCERT_THETA_INFEASIBLE = 1,
  NSCERT_THETA_UNDECIDED = 2,
} NscertTheta;

/**
 * Opaque assemblage handle.
 */
typedef struct NscertAssemblage NscertAssemblage;

/**
 * Opaque box handle.
 */
typedef struct NscertBox NscertBox;

/**
 * Opaque steering functional handle.
 */
typedef struct NscertFunctional NscertFunctional;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. The pointer
 * stays valid until the next call into the library on this thread.
 */
const char *nscert_last_error(void);

/**
 * Library version as a static string.
 */
const char *nscert_version(void);

/**
 * # Safety
 * `s` must be null or a string returned by this library.
 */
void nscert_string_free(char *s);

/**
 * # Safety
 * `json` must be a nul-terminated string and `out` a valid pointer.
 */
enum NscertStatus nscert_box_from_json(const char *json, struct NscertBox **out);

/**
 * The PR box of the CHSH scenario.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum NscertStatus nscert_box_pr(struct NscertBox **out);

/**
 * # Safety
 * `b` must be null or a handle from this library, not yet freed.
 */
void nscert_box_free(struct NscertBox *b);

/**
 * Canonical JSON; release with `nscert_string_free`.
 *
 * # Safety
 * `b` must be a live handle and `out` a valid pointer.
 */
enum NscertStatus nscert_box_to_json(const struct NscertBox *b, char **out);

/**
 * Tight-row rank test.
 *
 * # Safety
 * `b` must be a live handle; `is_vertex` and `rank` valid pointers.
 */
enum NscertStatus nscert_vertex_check(const struct NscertBox *b, bool *is_vertex, size_t *rank);

/**
 * Exact local-polytope membership. When separated, `value` and
 * `classical_bound` describe the certificate; otherwise both are zero.
 *
 * # Safety
 * `b` must be a live rational box; the out-pointers must be valid.
 */
enum NscertStatus nscert_local_check(const struct NscertBox *b,
                                     bool *is_local,
                                     double *value,
                                     double *classical_bound);

/**
 * Theta-body membership with default solver settings, overridden by
 * positive `tol` and nonzero `max_iter`.
 *
 * # Safety
 * `b` must be a live handle; the out-pointers must be valid.
 */
enum NscertStatus nscert_theta_check(const struct NscertBox *b,
                                     double tol,
                                     size_t max_iter,
                                     enum NscertTheta *status,
                                     double *residual);

/**
 * # Safety
 * `json` must be a nul-terminated string and `out` a valid pointer.
 */
enum NscertStatus nscert_assemblage_from_json(const char *json, struct NscertAssemblage **out);

/**
 * The exact GHZ assemblage.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum NscertStatus nscert_assemblage_ghz(struct NscertAssemblage **out);

/**
 * # Safety
 * `s` must be null or a handle from this library, not yet freed.
 */
void nscert_assemblage_free(struct NscertAssemblage *s);

/**
 * # Safety
 * `s` must be a live handle and `out` a valid pointer.
 */
enum NscertStatus nscert_assemblage_to_json(const struct NscertAssemblage *s, char **out);

/**
 * # Safety
 * `s` must be a live handle; `valid` a valid pointer.
 */
enum NscertStatus nscert_assemblage_validate(const struct NscertAssemblage *s, bool *valid);

/**
 * Structural line-type test and exhaustive similarity check.
 *
 * # Safety
 * `s` must be a live handle; the out-pointers must be valid.
 */
enum NscertStatus nscert_assemblage_inflexible(const struct NscertAssemblage *s,
                                               bool *structural,
                                               bool *unique);

/**
 * # Safety
 * `s` must be a live handle and `out` a valid pointer.
 */
enum NscertStatus nscert_functional_build(const struct NscertAssemblage *s,
                                          struct NscertFunctional **out);

/**
 * # Safety
 * `f` must be null or a handle from this library, not yet freed.
 */
void nscert_functional_free(struct NscertFunctional *f);

/**
 * # Safety
 * Both handles must be live and `value` a valid pointer.
 */
enum NscertStatus nscert_functional_evaluate(const struct NscertFunctional *f,
                                             const struct NscertAssemblage *s,
                                             double *value);

/**
 * # Safety
 * `f` must be a live handle and `bound` a valid pointer.
 */
enum NscertStatus nscert_functional_lhs_bound(const struct NscertFunctional *f, double *bound);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NSCERT_H */
