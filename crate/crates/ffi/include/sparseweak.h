#ifndef SPARSEWEAK_H
#define SPARSEWEAK_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes. `SW_STATUS_OK` is zero; the rest mirror the library
 * error classes.
 */
typedef enum SwStatus {
  SW_STATUS_OK = 0,
  SW_STATUS_NULL_POINTER = 1,
  SW_STATUS_INVALID_PARAMETER = 2,
  SW_STATUS_NON_INTEGRABLE = 3,
  SW_STATUS_HYPOTHESIS = 4,
  SW_STATUS_DEGENERATE_FIT = 5,
  SW_STATUS_SPARSENESS = 6,
  SW_STATUS_INTERNAL = 7,
} SwStatus;

typedef struct SwFamily SwFamily;

typedef struct SwFunction SwFunction;

typedef struct SwWeight SwWeight;

/**
 * Exponent tuple `(d, p, q, alpha, nu)`.
 */
typedef struct SwParams {
  uint8_t d;
  double p;
  double q;
  double alpha;
  double nu;
} SwParams;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread (empty after a success).
 * Valid until the next `sw_*` call on the same thread.
 */
const char *sw_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *sw_version(void);

/**
 * Fills `p` from the Sobolev relation `1/p = 1/q + alpha/d`.
 *
 * # Safety
 * `out` must be null or valid for writes.
 */
enum SwStatus sw_params_sobolev(uint8_t d, double q, double alpha, double nu, struct SwParams *out);

/**
 * Power weight `x^beta` on `[0,1)`.
 *
 * # Safety
 * `out` must be null or valid for writes.
 */
enum SwStatus sw_weight_new_power(double beta, struct SwWeight **out);

/**
 * Cell-constant weight from `n = 2^(d depth)` values in row-major order.
 *
 * # Safety
 * `values` must point to `n` doubles; `out` must be null or valid for writes.
 */
enum SwStatus sw_weight_new_grid(uint8_t d,
                                 uint32_t depth,
                                 const double *values,
                                 uintptr_t n,
                                 struct SwWeight **out);

/**
 * # Safety
 * `w` must be null or a handle from `sw_weight_new_*` not yet freed.
 */
void sw_weight_free(struct SwWeight *w);

/**
 * Cell-constant function from `n = 2^(d depth)` values in row-major order.
 *
 * # Safety
 * `values` must point to `n` doubles; `out` must be null or valid for writes.
 */
enum SwStatus sw_function_new(uint8_t d,
                              uint32_t depth,
                              const double *values,
                              uintptr_t n,
                              struct SwFunction **out);

/**
 * Number of cells of `f` (0 for a null handle).
 *
 * # Safety
 * `f` must be null or a live handle.
 */
uintptr_t sw_function_len(const struct SwFunction *f);

/**
 * Copies the cell values into `buf`, which must hold `sw_function_len(f)`
 * doubles (`cap` is checked).
 *
 * # Safety
 * `f` must be a live handle and `buf` valid for `cap` writes.
 */
enum SwStatus sw_function_values(const struct SwFunction *f, double *buf, uintptr_t cap);

/**
 * # Safety
 * `f` must be null or a live handle.
 */
void sw_function_free(struct SwFunction *f);

/**
 * The tower `{[0, 2^-k) : k = 0..=depth}` (d = 1).
 *
 * # Safety
 * `out` must be null or valid for writes.
 */
enum SwStatus sw_family_new_tower(uint32_t depth, struct SwFamily **out);

/**
 * Verified sparse family from `n` cubes: `levels[i]` and the `d` indices
 * `indices[i*d .. i*d+d]`. Fails with `SW_STATUS_SPARSENESS` when some
 * cube has `|E_Q| < gamma |Q|`.
 *
 * # Safety
 * `levels` must point to `n` values and `indices` to `n*d` values.
 */
enum SwStatus sw_family_new(uint8_t d,
                            const uint32_t *levels,
                            const uint64_t *indices,
                            uintptr_t n,
                            double gamma,
                            struct SwFamily **out);

/**
 * Number of cubes (0 for a null handle).
 *
 * # Safety
 * `s` must be null or a live handle.
 */
uintptr_t sw_family_len(const struct SwFamily *s);

/**
 * # Safety
 * `s` must be null or a live handle.
 */
void sw_family_free(struct SwFamily *s);

/**
 * `A_{alpha,nu}^S f` on the cells of `f`; the result is a new handle.
 *
 * # Safety
 * Handles must be live; `prm` and `out` valid.
 */
enum SwStatus sw_sparse_apply(const struct SwFamily *s,
                              const struct SwFunction *f,
                              const struct SwParams *prm,
                              struct SwFunction **out);

/**
 * Two-weight characteristic `[w, sigma]_{A_{p,q}^alpha}` over cubes of
 * level `<= depth`.
 *
 * # Safety
 * Handles must be live; `prm` and `out` valid.
 */
enum SwStatus sw_a_pq_alpha(const struct SwWeight *w,
                            const struct SwWeight *sigma,
                            const struct SwParams *prm,
                            uint32_t depth,
                            double *out);

/**
 * One-weight characteristic `[w]_{A_{p,q}}`.
 *
 * # Safety
 * `w` must be live and `out` valid.
 */
enum SwStatus sw_a_pq(const struct SwWeight *w, double p, double q, uint32_t depth, double *out);

/**
 * Fujii–Wilson `[w]_{A_inf}`.
 *
 * # Safety
 * `w` must be live and `out` valid.
 */
enum SwStatus sw_a_infty(const struct SwWeight *w, uint32_t depth, double *out);

/**
 * `||g||_{L^r(w)}`.
 *
 * # Safety
 * Handles must be live and `out` valid.
 */
enum SwStatus sw_lp_norm(const struct SwFunction *g,
                         const struct SwWeight *w,
                         double r,
                         double *out);

/**
 * `||g||_{L^{r,inf}(w)}`.
 *
 * # Safety
 * Handles must be live and `out` valid.
 */
enum SwStatus sw_weak_norm(const struct SwFunction *g,
                           const struct SwWeight *w,
                           double r,
                           double *out);

/**
 * Testing constant of the family; needs `p > nu` (`SW_STATUS_HYPOTHESIS`
 * otherwise).
 *
 * # Safety
 * Handles must be live; `prm` and `out` valid.
 */
enum SwStatus sw_testing_constant(const struct SwFamily *s,
                                  const struct SwWeight *w,
                                  const struct SwWeight *sigma,
                                  const struct SwParams *prm,
                                  double *out);

/**
 * Closed-form two-weight weak-type bound (the active branch).
 *
 * # Safety
 * Handles must be live; `prm` and `out` valid.
 */
enum SwStatus sw_bound_thm11(const struct SwWeight *w,
                             const struct SwWeight *sigma,
                             const struct SwParams *prm,
                             uint32_t depth,
                             double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SPARSEWEAK_H */
