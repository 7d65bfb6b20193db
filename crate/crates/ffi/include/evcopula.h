#ifndef EVCOPULA_H
#define EVCOPULA_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum EvcStatus {
  EVC_STATUS_OK = 0,
  EVC_STATUS_NULL_POINTER = 1,
  EVC_STATUS_PARAM_OUT_OF_RANGE = 2,
  EVC_STATUS_INVALID_DEPENDENCE = 3,
  EVC_STATUS_NON_CONVERGENT = 4,
  EVC_STATUS_NUMERICAL = 5,
  EVC_STATUS_DEGENERATE_SAMPLE = 6,
  EVC_STATUS_PANIC = 7,
} EvcStatus;

/**
 * Opaque extreme value copula.
 */
typedef struct EvcCopula EvcCopula;

typedef struct EvcCoefficients {
  double rho;
  double tau;
  double lambda;
  double beta;
} EvcCoefficients;

typedef struct EvcInterval {
  double lo;
  double hi;
} EvcInterval;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Static, NUL-terminated description of a status code.
 */
const char *evc_status_message(enum EvcStatus status);

/**
 * Marshall-Olkin copula, `0 <= alpha, beta <= 1`.
 *
 * # Safety
 * `out` must be valid for writing one pointer.
 */
enum EvcStatus evc_copula_mo(double alpha, double beta, struct EvcCopula **out);

/**
 * Gumbel copula, `theta >= 1`.
 *
 * # Safety
 * `out` must be valid for writing one pointer.
 */
enum EvcStatus evc_copula_gumbel(double theta, struct EvcCopula **out);

/**
 * Pareto bound copula `min(u, v, u^(1-a) v^(1-b))`, `a, b >= 0`, `a + b <= 1`.
 *
 * # Safety
 * `out` must be valid for writing one pointer.
 */
enum EvcStatus evc_copula_pareto(double a, double b, struct EvcCopula **out);

/**
 * Copula with piecewise-linear dependence function through the knots
 * `(t[i], a[i])`.
 *
 * # Safety
 * `t` and `a` must each point to `len` readable doubles; `out` must be valid
 * for writing one pointer.
 */
enum EvcStatus evc_copula_piecewise_linear(const double *t,
                                           const double *a,
                                           uintptr_t len,
                                           struct EvcCopula **out);

/**
 * Releases a handle. Null is ignored.
 *
 * # Safety
 * `c` must be null or a handle from an `evc_copula_*` constructor that has
 * not been freed.
 */
void evc_copula_free(struct EvcCopula *c);

/**
 * Dependence function `A(t)`.
 *
 * # Safety
 * `c` must be a live handle and `out` valid for writing.
 */
enum EvcStatus evc_pickands(const struct EvcCopula *c, double t, double *out);

/**
 * `C(u, v)`.
 *
 * # Safety
 * `c` must be a live handle and `out` valid for writing.
 */
enum EvcStatus evc_copula_cdf(const struct EvcCopula *c, double u, double v, double *out);

/**
 * Conditional distribution `dC/du (u, v)`, right-continuous in `v`.
 *
 * # Safety
 * `c` must be a live handle and `out` valid for writing.
 */
enum EvcStatus evc_copula_partial_u(const struct EvcCopula *c, double u, double v, double *out);

/**
 * Spearman's rho, Kendall's tau, upper tail coefficient and Blomqvist's beta.
 *
 * # Safety
 * `c` must be a live handle and `out` valid for writing.
 */
enum EvcStatus evc_coefficients(const struct EvcCopula *c, struct EvcCoefficients *out);

/**
 * Range of Spearman's rho over extreme value copulas with tail coefficient
 * `lambda`.
 *
 * # Safety
 * `out` must be valid for writing.
 */
enum EvcStatus evc_rho_bounds(double lambda, struct EvcInterval *out);

/**
 * Range of Kendall's tau over extreme value copulas with tail coefficient
 * `lambda`.
 *
 * # Safety
 * `out` must be valid for writing.
 */
enum EvcStatus evc_tau_bounds(double lambda, struct EvcInterval *out);

/**
 * Draws `n` pairs by conditional inversion into `u_out[0..n]` and
 * `v_out[0..n]`. Output is reproducible for a given `seed`.
 *
 * # Safety
 * `c` must be a live handle; `u_out` and `v_out` must each be valid for
 * writing `n` doubles and must not overlap.
 */
enum EvcStatus evc_sample(const struct EvcCopula *c,
                          uintptr_t n,
                          uint64_t seed,
                          double *u_out,
                          double *v_out);

/**
 * Exact Marshall-Olkin sampling from exponential shocks; same buffer
 * contract as [`evc_sample`].
 *
 * # Safety
 * `u_out` and `v_out` must each be valid for writing `n` doubles and must
 * not overlap.
 */
enum EvcStatus evc_sample_mo(double alpha,
                             double beta,
                             uintptr_t n,
                             uint64_t seed,
                             double *u_out,
                             double *v_out);

/**
 * Version string of the library, static and NUL-terminated.
 */
const char *evc_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* EVCOPULA_H */
