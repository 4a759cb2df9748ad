#ifndef AWM_H
#define AWM_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Model family selector for `awm_fit`.
 */
typedef enum AwmFamily {
  AWM_FAMILY_SAM = 0,
  AWM_FAMILY_EYSM_REDIST = 1,
  AWM_FAMILY_EYSM_FULL = 2,
  AWM_FAMILY_AWM = 3,
} AwmFamily;

/*
 Result code of every fallible call.
 */
typedef enum AwmStatus {
  AWM_STATUS_OK = 0,
  AWM_STATUS_NULL_POINTER = 1,
  AWM_STATUS_DOMAIN = 2,
  AWM_STATUS_INPUT = 3,
  AWM_STATUS_UNSUPPORTED = 4,
  AWM_STATUS_INFEASIBLE = 5,
  AWM_STATUS_DEGENERATE = 6,
  AWM_STATUS_CONVERGENCE = 7,
  AWM_STATUS_PARSE = 8,
  AWM_STATUS_FIT = 9,
  AWM_STATUS_IO = 10,
  AWM_STATUS_BUFFER_TOO_SMALL = 11,
  AWM_STATUS_PANIC = 12,
} AwmStatus;

/*
 Opaque Lorenz curve.
 */
typedef struct AwmCurve AwmCurve;

/*
 Summary of a fit.
 */
typedef struct AwmFitResult {
  double chi;
  double zeta;
  double kappa;
  double j;
  double fitted_gini;
  double empirical_gini;
  double oligarchy_fraction;
  double mean_local_error;
  size_t evaluations;
  /*
   1 when the fitted state holds an oligarchy, 0 otherwise.
   */
  int32_t supercritical;
} AwmFitResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message describing the calling thread's most recent failure. The pointer
 stays valid until the next failing call on the same thread.
 */
const char *awm_last_error_message(void);

/*
 Steady-state Lorenz curve for θ = (χ, ζ, κ) with default solver settings,
 sampled on `resolution` uniform points.

 # Safety
 `out` must be a valid pointer to writable storage for one handle.
 */
enum AwmStatus awm_model_lorenz(double chi,
                                double zeta,
                                double kappa,
                                size_t resolution,
                                struct AwmCurve **out);

/*
 Analytic single-agent-model Lorenz curve.

 # Safety
 `out` must be a valid pointer to writable storage for one handle.
 */
enum AwmStatus awm_sam_lorenz(double chi, size_t resolution, struct AwmCurve **out);

/*
 Curve from explicit points; the regime is inferred from the last value.

 # Safety
 `f` and `l` must each point to `n` readable doubles; `out` must be writable.
 */
enum AwmStatus awm_curve_from_points(const double *f,
                                     const double *l,
                                     size_t n,
                                     struct AwmCurve **out);

/*
 Canonical Lorenz ordinates of weighted household records.

 # Safety
 `weights` and `networth` must each point to `n` readable doubles; `out`
 must be writable.
 */
enum AwmStatus awm_empirical_lorenz(const double *weights,
                                    const double *networth,
                                    size_t n,
                                    struct AwmCurve **out);

/*
 Releases a curve handle. Passing null is a no-op.

 # Safety
 `curve` must be null or a handle obtained from this library and not yet freed.
 */
void awm_curve_free(struct AwmCurve *curve);

/*
 Number of points of a curve (0 for a null handle).

 # Safety
 `curve` must be null or a live handle.
 */
size_t awm_curve_len(const struct AwmCurve *curve);

/*
 Copies the curve's points into caller buffers of capacity `cap`.

 # Safety
 `curve` must be a live handle; `f_out` and `l_out` must each have room for
 `cap` doubles.
 */
enum AwmStatus awm_curve_points(const struct AwmCurve *curve,
                                double *f_out,
                                double *l_out,
                                size_t cap);

/*
 Lorenz value at f = 1, and whether it marks an oligarchy.

 # Safety
 `curve` must be a live handle; outputs must be writable (either may be null).
 */
enum AwmStatus awm_curve_terminal(const struct AwmCurve *curve,
                                  double *terminal,
                                  int32_t *supercritical);

/*
 Gini coefficient, 1 − 2∫𝓛 df.

 # Safety
 `curve` must be a live handle and `out` writable.
 */
enum AwmStatus awm_gini(const struct AwmCurve *curve, double *out);

/*
 Supercritical curve (χ/ζ)·𝓛 from the subcritical curve at swapped parameters.

 # Safety
 `sub` must be a live handle and `out` writable.
 */
enum AwmStatus awm_dual(const struct AwmCurve *sub, double chi, double zeta, struct AwmCurve **out);

/*
 AWM curve (1+λ)𝓛 − λf from an EYSM curve, with λ = κ/(1−κ).

 # Safety
 `eysm` must be a live handle and `out` writable.
 */
enum AwmStatus awm_shift(const struct AwmCurve *eysm,
                         double chi,
                         double zeta,
                         double kappa,
                         struct AwmCurve **out);

/*
 L1 area between two curves on a uniform grid of `resolution` points.

 # Safety
 `a` and `b` must be live handles and `out` writable.
 */
enum AwmStatus awm_discrepancy(const struct AwmCurve *a,
                               const struct AwmCurve *b,
                               size_t resolution,
                               double *out);

/*
 Oligarch's share of total wealth, (1+λ)(1 − χ/ζ), or 0 when subcritical.

 # Safety
 `out` must be writable.
 */
enum AwmStatus awm_oligarchy_fraction(double chi, double zeta, double kappa, double *out);

/*
 λ = κ/(1−κ).

 # Safety
 `out` must be writable.
 */
enum AwmStatus awm_kappa_to_lambda(double kappa, double *out);

/*
 Regularized upper incomplete gamma function Q(a, z).

 # Safety
 `out` must be writable.
 */
enum AwmStatus awm_reg_gamma_q(double a, double z, double *out);

/*
 z with Q(a, z) = q.

 # Safety
 `out` must be writable.
 */
enum AwmStatus awm_reg_gamma_q_inv(double a, double q, double *out);

/*
 Fits a model family to an empirical curve with the default search settings.

 # Safety
 `empirical` must be a live handle and `out` writable.
 */
enum AwmStatus awm_fit(enum AwmFamily family,
                       const struct AwmCurve *empirical,
                       struct AwmFitResult *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* AWM_H */
