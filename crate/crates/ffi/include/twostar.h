#ifndef TWOSTAR_H
#define TWOSTAR_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum TwostarPhase {
  TWOSTAR_PHASE_UNIQUE = 0,
  TWOSTAR_PHASE_COEXISTENCE = 1,
  TWOSTAR_PHASE_CRITICAL = 2,
} TwostarPhase;

typedef enum TwostarStatus {
  TWOSTAR_STATUS_OK = 0,
  TWOSTAR_STATUS_NULL_POINTER = 1,
  TWOSTAR_STATUS_INVALID_ARGUMENT = 2,
  TWOSTAR_STATUS_CAP_EXCEEDED = 3,
  TWOSTAR_STATUS_UNDEFINED = 4,
  TWOSTAR_STATUS_PANIC = 5,
} TwostarStatus;

/**
 * Opaque exact-enumeration system.
 */
typedef struct TwostarSystem TwostarSystem;

/**
 * Mean-field classification of one `(alpha, h)` point. Absent values are NaN.
 */
typedef struct TwostarPhasePoint {
  size_t n_roots;
  double u_star_1;
  double u_star_2;
  enum TwostarPhase phase;
  double variance;
} TwostarPhasePoint;

/**
 * Glauber run settings. `burn_in` and `thinning` count sweeps.
 */
typedef struct TwostarChainSpec {
  size_t n;
  double alpha;
  double h;
  uint64_t sweeps;
  uint64_t burn_in;
  uint64_t thinning;
  size_t chains;
  uint64_t seed;
} TwostarChainSpec;

typedef struct TwostarChainSummary {
  double density_mean;
  double density_se;
  double edge_probability_mean;
  double edge_probability_se;
  double wedge_count_mean;
  double wedge_count_se;
  double standardized_variance;
  double skewness;
  double excess_kurtosis;
} TwostarChainSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *twostar_last_error(void);

/**
 * Library version as a static nul-terminated string.
 */
const char *twostar_version(void);

/**
 * Creates a scalar two-star system on `n` vertices.
 *
 * # Safety
 * `out` must be valid for a write.
 */
enum TwostarStatus twostar_system_new(size_t n, double alpha, double h, struct TwostarSystem **out);

/**
 * Creates an ERGM system with edge and triangle terms.
 *
 * # Safety
 * `out` must be valid for a write.
 */
enum TwostarStatus twostar_system_new_edge_triangle(size_t n,
                                                    double beta1,
                                                    double beta2,
                                                    struct TwostarSystem **out);

/**
 * Releases a system. Null is ignored.
 *
 * # Safety
 * `sys` must come from a constructor and not be used afterwards.
 */
void twostar_system_free(struct TwostarSystem *sys);

/**
 * Number of edge variables `n(n-1)/2`.
 *
 * # Safety
 * `sys` must be a live handle; `out` must be valid for a write.
 */
enum TwostarStatus twostar_system_edges(const struct TwostarSystem *sys, size_t *out);

/**
 * # Safety
 * `sys` must be a live handle; `out` must be valid for a write.
 */
enum TwostarStatus twostar_system_log_partition(const struct TwostarSystem *sys, double *out);

/**
 * `E[prod_{e in edges} x_e]`. Edge ids are lexicographic pair indices.
 *
 * # Safety
 * `edges` must hold `len` values; `out` must be valid for a write.
 */
enum TwostarStatus twostar_system_expect_monomial(const struct TwostarSystem *sys,
                                                  const size_t *edges,
                                                  size_t len,
                                                  double *out);

/**
 * Ursell function of order `len` (1 to 3) at the given edge ids.
 *
 * # Safety
 * `edges` must hold `len` values; `out` must be valid for a write.
 */
enum TwostarStatus twostar_system_ursell(const struct TwostarSystem *sys,
                                         const size_t *edges,
                                         size_t len,
                                         double *out);

/**
 * Exhaustive GHS check; writes the largest `u3` and whether it is within slack.
 *
 * # Safety
 * `worst` and `pass` must be valid for writes.
 */
enum TwostarStatus twostar_system_verify_ghs(const struct TwostarSystem *sys,
                                             double *worst,
                                             bool *pass);

/**
 * Exhaustive GKS check over subsets of size at most `max_size`.
 *
 * # Safety
 * `worst` and `pass` must be valid for writes.
 */
enum TwostarStatus twostar_system_verify_gks(const struct TwostarSystem *sys,
                                             size_t max_size,
                                             double *worst,
                                             bool *pass);

/**
 * # Safety
 * `out` must be valid for a write.
 */
enum TwostarStatus twostar_meanfield_classify(double alpha,
                                              double h,
                                              struct TwostarPhasePoint *out);

/**
 * Field `q(alpha)` on the coexistence curve, for `alpha > 2`.
 *
 * # Safety
 * `out` must be valid for a write.
 */
enum TwostarStatus twostar_meanfield_critical_curve(double alpha, double *out);

/**
 * Runs independent Glauber chains and summarizes the edge statistics.
 *
 * # Safety
 * `spec` must be readable; `out` must be valid for a write.
 */
enum TwostarStatus twostar_mcmc_run(const struct TwostarChainSpec *spec,
                                    struct TwostarChainSummary *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TWOSTAR_H */
