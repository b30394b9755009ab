#ifndef FINAPPROX_H
#define FINAPPROX_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum FaStatus {
  FA_STATUS_OK = 0,
  FA_STATUS_NULL_ARGUMENT = 1,
  FA_STATUS_INVALID_UTF8 = 2,
  FA_STATUS_INVALID_PARAMETER = 3,
  FA_STATUS_PARSE = 4,
  FA_STATUS_LIMIT_EXCEEDED = 5,
  FA_STATUS_MALFORMED = 6,
  FA_STATUS_PREMISE = 7,
  FA_STATUS_UNDECIDABLE = 8,
  FA_STATUS_EVAL = 9,
  FA_STATUS_OTHER = 10,
  FA_STATUS_PANIC = 11,
} FaStatus;

/**
 * Opaque finite algebra.
 */
typedef struct FaAlgebra FaAlgebra;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * The last error message on this thread, or null. Owned by the library;
 * valid until the next call on the same thread.
 */
const char *fa_last_error(void);

/**
 * `K_n = Z/p^n Z`.
 *
 * # Safety
 * `out` must be writable.
 */
enum FaStatus fa_build_kn(uint64_t p, uint32_t n, struct FaAlgebra **out);

/**
 * `H_{m,n}` over `Q_p`.
 *
 * # Safety
 * `out` must be writable.
 */
enum FaStatus fa_build_hmn(uint64_t p, uint32_t m, uint32_t n, struct FaAlgebra **out);

/**
 * Decimal floating point `A_PQ`.
 *
 * # Safety
 * `out` must be writable.
 */
enum FaStatus fa_build_apq(uint32_t big_p, uint32_t big_q, struct FaAlgebra **out);

/**
 * Balanced modular fixed point `A'_{M, eps}`; `eps` is a rational such as
 * `"1/10"`.
 *
 * # Safety
 * `eps` must be a nul-terminated string and `out` writable.
 */
enum FaStatus fa_build_modular(uint64_t m, const char *eps, struct FaAlgebra **out);

/**
 * Read an algebra from its JSON file format.
 *
 * # Safety
 * `json` must be a nul-terminated string and `out` writable.
 */
enum FaStatus fa_algebra_from_json(const char *json, struct FaAlgebra **out);

/**
 * Write an algebra in its JSON file format; free the result with
 * [`fa_string_free`].
 *
 * # Safety
 * `alg` must come from this library and `out` be writable.
 */
enum FaStatus fa_algebra_to_json(const struct FaAlgebra *alg, char **out);

/**
 * Number of carrier elements.
 *
 * # Safety
 * `alg` must come from this library and `out` be writable.
 */
enum FaStatus fa_algebra_size(const struct FaAlgebra *alg, size_t *out);

/**
 * Decide whether `alg` is a `(C, W)`-approximation. `region` uses the
 * formula-bound syntax (`[-1, 1]`, `pball(2, 0)`, unions with `|`); `eps`
 * is the entourage radius. Writes 1 or 0 to `holds`.
 *
 * # Safety
 * Strings must be nul-terminated, `alg` from this library, `holds` writable.
 */
enum FaStatus fa_check_approximation(const struct FaAlgebra *alg,
                                     const char *region,
                                     const char *eps,
                                     int32_t *holds);

/**
 * Search for a violation of `law` (`assoc-add`, `comm-mul`, `distrib`,
 * `cancel-add`, …). Writes a JSON witness to `witness`, or null when the
 * law holds exhaustively.
 *
 * # Safety
 * `law` must be nul-terminated, `alg` from this library, `witness` writable.
 */
enum FaStatus fa_law_search(const struct FaAlgebra *alg, const char *law, char **witness);

/**
 * Evaluate a positive bounded formula. `assignment` is `name=value` pairs
 * separated by commas (may be empty or null); each value maps to the
 * nearest carrier element. Writes 1 or 0 to `value`.
 *
 * # Safety
 * Strings must be nul-terminated (or `assignment` null), `alg` from this
 * library, `value` writable.
 */
enum FaStatus fa_eval(const struct FaAlgebra *alg,
                      const char *formula,
                      const char *assignment,
                      int32_t *value);

/**
 * # Safety
 * `alg` must come from this library (or be null) and not be used after.
 */
void fa_algebra_free(struct FaAlgebra *alg);

/**
 * # Safety
 * `s` must come from this library (or be null) and not be used after.
 */
void fa_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FINAPPROX_H */
