#ifndef BP_FFI_H
#define BP_FFI_H

/* Generated by cbindgen; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum BpStatus {
  BP_STATUS_OK = 0,
  BP_STATUS_NULL_POINTER = 1,
  BP_STATUS_INVALID_ARGUMENT = 2,
  BP_STATUS_PARSE_ERROR = 3,
  BP_STATUS_NOT_SEMICOHERENT = 4,
  BP_STATUS_TOO_MANY_COMPONENTS = 5,
  BP_STATUS_COMPONENT_MISMATCH = 6,
  BP_STATUS_METHOD_UNAVAILABLE = 7,
  BP_STATUS_NUMERICAL = 8,
  BP_STATUS_BUFFER_TOO_SMALL = 9,
  BP_STATUS_NOT_A_DISTRIBUTION = 10,
  BP_STATUS_PANIC = 11,
} BpStatus;

typedef enum BpMethod {
  BP_METHOD_AUTO = 0,
  BP_METHOD_EXACT = 1,
  BP_METHOD_QUADRATURE = 2,
  BP_METHOD_CLOSED_FORM = 3,
  BP_METHOD_MONTE_CARLO = 4,
} BpMethod;

/**
 * Opaque joint lifetime model.
 */
typedef struct BpModel BpModel;

/**
 * Opaque structure function.
 */
typedef struct BpStructure BpStructure;

/**
 * Message for the last failed call on this thread, or null. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *bp_last_error_message(void);

/**
 * Parses a formula such as `"x1*x4 | x2*x5"` over `n` components.
 *
 * # Safety
 * `formula` must be a NUL-terminated string; `out` must be writable.
 */
enum BpStatus bp_structure_from_formula(const char *formula, size_t n, struct BpStructure **out);

/**
 * Builds a structure from `2^n` bytes, entry `A` nonzero iff `φ(A) = 1`.
 *
 * # Safety
 * `table` must point to `len` readable bytes; `out` must be writable.
 */
enum BpStatus bp_structure_from_truth_table(const uint8_t *table,
                                            size_t len,
                                            size_t n,
                                            struct BpStructure **out);

/**
 * `kind` is `"series"`, `"parallel"`, `"bridge"` or `"k_out_of_n"`; `k` is
 * read only for the last.
 *
 * # Safety
 * `kind` must be a NUL-terminated string; `out` must be writable.
 */
enum BpStatus bp_structure_standard(const char *kind, size_t k, size_t n, struct BpStructure **out);

/**
 * Number of components, or 0 for a null handle.
 *
 * # Safety
 * `phi` must be null or a live handle.
 */
size_t bp_structure_n(const struct BpStructure *phi);

/**
 * # Safety
 * `phi` must be null or a handle not yet freed.
 */
void bp_structure_free(struct BpStructure *phi);

/**
 * # Safety
 * `out` must be writable.
 */
enum BpStatus bp_model_exchangeable(size_t n, struct BpModel **out);

/**
 * Independent Weibull lifetimes with scales `lambdas[0..n]` and common
 * shape `alpha`.
 *
 * # Safety
 * `lambdas` must point to `n` doubles; `out` must be writable.
 */
enum BpStatus bp_model_weibull(const double *lambdas, size_t n, double alpha, struct BpModel **out);

/**
 * Model from a JSON model block, e.g.
 * `{"model": "order_distribution", "probs": {"12": "1/3", "21": "2/3"}}`.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum BpStatus bp_model_from_json(const char *json, size_t n, struct BpModel **out);

/**
 * # Safety
 * `model` must be null or a handle not yet freed.
 */
void bp_model_free(struct BpModel *model);

/**
 * Writes `I_BP` (n values).
 *
 * # Safety
 * Handles must be live; `out` must hold `len` doubles.
 */
enum BpStatus bp_barlow_proschan(const struct BpStructure *phi,
                                 const struct BpModel *model,
                                 enum BpMethod method,
                                 double *out,
                                 size_t len);

/**
 * Writes the signature `p` (n values).
 *
 * # Safety
 * Handles must be live; `out` must hold `len` doubles.
 */
enum BpStatus bp_signature(const struct BpStructure *phi,
                           const struct BpModel *model,
                           enum BpMethod method,
                           double *out,
                           size_t len);

/**
 * Writes `Pr(T > X_{k:n})` for `k = 0..=n` (n + 1 values).
 *
 * # Safety
 * Handles must be live; `out` must hold `len` doubles.
 */
enum BpStatus bp_tail_signature(const struct BpStructure *phi,
                                const struct BpModel *model,
                                enum BpMethod method,
                                double *out,
                                size_t len);

/**
 * Writes the Shapley-Shubik value `b` (n values).
 *
 * # Safety
 * `phi` must be live; `out` must hold `len` doubles.
 */
enum BpStatus bp_structural_b(const struct BpStructure *phi, double *out, size_t len);

/**
 * Writes the structural signature `s` (n values).
 *
 * # Safety
 * `phi` must be live; `out` must hold `len` doubles.
 */
enum BpStatus bp_structural_signature(const struct BpStructure *phi, double *out, size_t len);

/**
 * Normalized Shannon entropy of `w[0..len]`.
 *
 * # Safety
 * `w` must point to `len` doubles; `out` must be writable.
 */
enum BpStatus bp_symmetry_index(const double *w, size_t len, double *out);

/**
 * Runs a full analysis of a system-spec document and returns the JSON
 * report in `*out`; release it with [`bp_string_free`].
 *
 * # Safety
 * `spec_json` must be a NUL-terminated string; `out` must be writable.
 */
enum BpStatus bp_analyze_json(const char *spec_json, char **out);

/**
 * # Safety
 * `s` must be null or a string returned by this library, not yet freed.
 */
void bp_string_free(char *s);

#endif  /* BP_FFI_H */
