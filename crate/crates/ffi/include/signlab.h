#ifndef SIGNLAB_H
#define SIGNLAB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SignlabStatus {
  SIGNLAB_STATUS_OK = 0,
  SIGNLAB_STATUS_NULL_POINTER = 1,
  SIGNLAB_STATUS_DOMAIN = 2,
  SIGNLAB_STATUS_RESOURCE = 3,
  SIGNLAB_STATUS_CONFIG = 4,
  SIGNLAB_STATUS_CONTRACT = 5,
  SIGNLAB_STATUS_PANIC = 6,
} SignlabStatus;

typedef enum SignlabMode {
  SIGNLAB_MODE_RANDOM = 0,
  SIGNLAB_MODE_ALL_PLUS = 1,
  SIGNLAB_MODE_ALL_MINUS = 2,
} SignlabMode;

typedef struct SignlabCensus SignlabCensus;

typedef struct SignlabOracle SignlabOracle;

typedef struct SignlabSieve SignlabSieve;

/**
 * A value with an absolute error bound.
 */
typedef struct SignlabValue {
  double value;
  double tail_bound;
} SignlabValue;

typedef struct SignlabCheckpoint {
  uint64_t x;
  double s_x;
  uint64_t crossings_so_far;
  double min;
  double max;
  double rounding_bound;
} SignlabCheckpoint;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. Valid until the
 * next failing call on the same thread.
 */
const char *signlab_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *signlab_version(void);

/**
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
enum SignlabStatus signlab_sieve_new(uint64_t capacity, struct SignlabSieve **out);

/**
 * # Safety
 * `sieve` must be null or a handle from [`signlab_sieve_new`] not yet freed.
 */
void signlab_sieve_free(struct SignlabSieve *sieve);

/**
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
enum SignlabStatus signlab_oracle_new(uint64_t seed,
                                      enum SignlabMode mode,
                                      struct SignlabOracle **out);

/**
 * # Safety
 * `oracle` must be null or a handle from [`signlab_oracle_new`] not yet freed.
 */
void signlab_oracle_free(struct SignlabOracle *oracle);

/**
 * `f(p)` as +1 or -1; fails with `Contract` if `p` is not prime.
 *
 * # Safety
 * Handles must be live; `out` must be writable.
 */
enum SignlabStatus signlab_prime_sign(const struct SignlabOracle *oracle, uint64_t p, int8_t *out);

/**
 * `f(n)` as +1 or -1 for `1 <= n <= capacity`.
 *
 * # Safety
 * Handles must be live; `out` must be writable.
 */
enum SignlabStatus signlab_value(const struct SignlabOracle *oracle,
                                 const struct SignlabSieve *sieve,
                                 uint64_t n,
                                 int8_t *out);

/**
 * Sign-change census of `S_x = sum f(n)/sqrt(n)` up to `x_limit` with
 * power-of-ten checkpoints.
 *
 * # Safety
 * Handles must be live; `out` must be writable.
 */
enum SignlabStatus signlab_census_run(const struct SignlabOracle *oracle,
                                      const struct SignlabSieve *sieve,
                                      uint64_t x_limit,
                                      size_t workers,
                                      struct SignlabCensus **out);

/**
 * # Safety
 * `census` must be null or a handle from [`signlab_census_run`] not yet freed.
 */
void signlab_census_free(struct SignlabCensus *census);

/**
 * Number of crossings, or 0 for a null handle.
 *
 * # Safety
 * `census` must be null or live.
 */
size_t signlab_census_crossing_count(const struct SignlabCensus *census);

/**
 * Copies up to `cap` crossing positions into `buf`; returns the total count.
 *
 * # Safety
 * `census` must be null or live; `buf` must hold `cap` values when `cap > 0`.
 */
size_t signlab_census_crossings(const struct SignlabCensus *census, uint64_t *buf, size_t cap);

/**
 * Final sum and its rounding bound.
 *
 * # Safety
 * `census` must be live; `out` must be writable.
 */
enum SignlabStatus signlab_census_final(const struct SignlabCensus *census,
                                        struct SignlabValue *out);

/**
 * # Safety
 * `census` must be null or live.
 */
size_t signlab_census_checkpoint_count(const struct SignlabCensus *census);

/**
 * # Safety
 * `census` must be live; `out` must be writable.
 */
enum SignlabStatus signlab_census_checkpoint(const struct SignlabCensus *census,
                                             size_t index,
                                             struct SignlabCheckpoint *out);

/**
 * Riemann zeta for real `s > 1`.
 *
 * # Safety
 * `out` must be writable.
 */
enum SignlabStatus signlab_zeta(double s, struct SignlabValue *out);

/**
 * Prime zeta `sum_p p^-s` for real `s > 1`.
 *
 * # Safety
 * `out` must be writable.
 */
enum SignlabStatus signlab_prime_zeta(double s, struct SignlabValue *out);

/**
 * Variance of `R(t)` for `0 < t < 1/2`.
 *
 * # Safety
 * `out` must be writable.
 */
enum SignlabStatus signlab_r_variance(double t, struct SignlabValue *out);

/**
 * Covariance of `R(t1)` and `R(t2)`.
 *
 * # Safety
 * `out` must be writable.
 */
enum SignlabStatus signlab_r_covariance(double t1, double t2, struct SignlabValue *out);

/**
 * `sum_{n <= x_limit} f(n) n^(-1/2-t)`.
 *
 * # Safety
 * Handles must be live; `out` must be writable.
 */
enum SignlabStatus signlab_dirichlet_sum(const struct SignlabOracle *oracle,
                                         const struct SignlabSieve *sieve,
                                         double t,
                                         uint64_t x_limit,
                                         double *out);

/**
 * `int_1^X S_x x^(-1-t) dx` with `X = x_limit`.
 *
 * # Safety
 * Handles must be live; `out` must be writable.
 */
enum SignlabStatus signlab_laplace_transform(const struct SignlabOracle *oracle,
                                             const struct SignlabSieve *sieve,
                                             double t,
                                             uint64_t x_limit,
                                             double *out);

/**
 * `sum_{p <= prime_limit} -log(1 - f(p) p^(-1/2-t))`.
 *
 * # Safety
 * Handles must be live; `out` must be writable.
 */
enum SignlabStatus signlab_euler_product_log(const struct SignlabOracle *oracle,
                                             const struct SignlabSieve *sieve,
                                             double t,
                                             uint64_t prime_limit,
                                             double *out);

/**
 * `R(t)` truncated at `prime_limit`.
 *
 * # Safety
 * Handles must be live; `out` must be writable.
 */
enum SignlabStatus signlab_r_statistic(const struct SignlabOracle *oracle,
                                       const struct SignlabSieve *sieve,
                                       double t,
                                       uint64_t prime_limit,
                                       double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SIGNLAB_H */
