#ifndef RANKSCATTER_H
#define RANKSCATTER_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum RsMode {
  RS_MODE_EXHAUSTIVE = 0,
  RS_MODE_WITNESS_SPAN = 1,
  RS_MODE_SAMPLED = 2,
  RS_MODE_SAMPLED_TUPLES = 3,
} RsMode;

typedef enum RsStatus {
  RS_STATUS_OK = 0,
  RS_STATUS_NULL_POINTER = 1,
  RS_STATUS_INVALID_ARGUMENT = 2,
  /**
   * the system does not span the ambient space
   */
  RS_STATUS_DEGENERATE = 3,
  RS_STATUS_TOO_LARGE = 4,
  RS_STATUS_OUTSIDE_FAMILY = 5,
  RS_STATUS_TOWER_MISMATCH = 6,
  RS_STATUS_IO = 7,
  RS_STATUS_PARSE = 8,
  RS_STATUS_BUFFER_TOO_SMALL = 9,
  RS_STATUS_INTERNAL = 10,
} RsStatus;

typedef enum RsVerdictStatus {
  RS_VERDICT_STATUS_HOLDS = 0,
  RS_VERDICT_STATUS_VIOLATED = 1,
  RS_VERDICT_STATUS_INCONCLUSIVE = 2,
} RsVerdictStatus;

/**
 * A finite field F_{q^n} with q = p^s.
 */
typedef struct RsField RsField;

/**
 * An F_q-subspace of F_{q^n}^k.
 */
typedef struct RsSystem RsSystem;

/**
 * Summary of a verification.
 */
typedef struct RsVerdict {
  enum RsVerdictStatus status;
  /**
   * weight of the witness, 0 without one
   */
  uint64_t witness_weight;
  uint64_t subspaces_checked;
  uint64_t total;
} RsVerdict;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the last error message of this thread into `buf` (NUL-terminated,
 * truncated to `len`). Returns the full message length in bytes.
 *
 * # Safety
 * `buf` must be null or point to `len` writable bytes.
 */
size_t rs_last_error(char *buf, size_t len);

/**
 * Creates F_{p^(s n)} over F_{p^s} with the default modulus.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum RsStatus rs_field_new(uint32_t p, uint32_t s, uint32_t n, struct RsField **out);

/**
 * # Safety
 * `field` must be null or a handle from `rs_field_new` not yet freed.
 */
void rs_field_free(struct RsField *field);

/**
 * Number of elements, 0 for a null handle.
 *
 * # Safety
 * `field` must be null or a live handle.
 */
uint64_t rs_field_order(const struct RsField *field);

/**
 * Index of the generator z of the field.
 *
 * # Safety
 * `field` must be null or a live handle.
 */
uint64_t rs_field_generator(const struct RsField *field);

/**
 * `out = a * b`.
 *
 * # Safety
 * `field` must be a live handle and `out` valid.
 */
enum RsStatus rs_field_mul(const struct RsField *field, uint64_t a, uint64_t b, uint64_t *out);

/**
 * V_{A,h} for alphas given as `m` element indices.
 *
 * # Safety
 * `field` must be live, `alphas` must point to `m` values, `out` valid.
 */
enum RsStatus rs_system_family(const struct RsField *field,
                               uint32_t m,
                               uint32_t h,
                               const uint64_t *alphas,
                               struct RsSystem **out);

/**
 * Whether the alphas of `rs_system_family` lie in the admissible set.
 *
 * # Safety
 * As for `rs_system_family`; `in_a` must be valid.
 */
enum RsStatus rs_family_admissible(const struct RsField *field,
                                   uint32_t m,
                                   uint32_t h,
                                   const uint64_t *alphas,
                                   bool *in_a);

/**
 * {(x, x^q, ..., x^{q^h})}.
 *
 * # Safety
 * `field` must be live and `out` valid.
 */
enum RsStatus rs_system_pseudoregulus(const struct RsField *field,
                                      uint32_t h,
                                      struct RsSystem **out);

/**
 * `copies` copies of the pseudoregulus in block-diagonal position.
 *
 * # Safety
 * `field` must be live and `out` valid.
 */
enum RsStatus rs_system_direct_sum(const struct RsField *field,
                                   uint32_t h,
                                   size_t copies,
                                   struct RsSystem **out);

/**
 * The F_q-expansion of the line through e_1 in F_{q^n}^k.
 *
 * # Safety
 * `field` must be live and `out` valid.
 */
enum RsStatus rs_system_line(const struct RsField *field, size_t k, struct RsSystem **out);

/**
 * # Safety
 * `system` must be null or a live handle.
 */
void rs_system_free(struct RsSystem *system);

/**
 * Ambient dimension k and F_q-dimension t.
 *
 * # Safety
 * `system` must be live; `k` and `t` valid.
 */
enum RsStatus rs_system_dims(const struct RsSystem *system, size_t *k, size_t *t);

/**
 * (hdim, r)-evasiveness. A budget of 0 means none; workers 0 means default.
 *
 * # Safety
 * `field` and `system` must be live and `out` valid.
 */
enum RsStatus rs_verify_evasive(const struct RsField *field,
                                const struct RsSystem *system,
                                size_t hdim,
                                size_t r,
                                enum RsMode mode,
                                uint64_t budget,
                                uint64_t seed,
                                size_t workers,
                                struct RsVerdict *out);

/**
 * h-scatteredness. A system that does not span, but has no heavy
 * subspace, yields `RS_STATUS_DEGENERATE`.
 *
 * # Safety
 * `field` and `system` must be live and `out` valid.
 */
enum RsStatus rs_verify_scattered(const struct RsField *field,
                                  const struct RsSystem *system,
                                  size_t h,
                                  enum RsMode mode,
                                  uint64_t budget,
                                  uint64_t seed,
                                  size_t workers,
                                  struct RsVerdict *out);

/**
 * Exact generalized rank weights d_1..d_k written to `out` (length `len`,
 * at least k).
 *
 * # Safety
 * `field` and `system` must be live; `out` must hold `len` values.
 */
enum RsStatus rs_generalized_weights(const struct RsField *field,
                                     const struct RsSystem *system,
                                     size_t workers,
                                     uint64_t *out,
                                     size_t len);

/**
 * Counts alpha tuples of length m and those in the admissible set.
 *
 * # Safety
 * `field` must be live; `tuples` and `in_a` valid.
 */
enum RsStatus rs_census(const struct RsField *field,
                        uint32_t m,
                        uint32_t h,
                        uint64_t *tuples,
                        uint64_t *in_a);

/**
 * Re-verifies a report file; `confirmed` is false when it is corrupt.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `confirmed` valid.
 */
enum RsStatus rs_recheck_report(const char *path, size_t workers, bool *confirmed);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RANKSCATTER_H */
