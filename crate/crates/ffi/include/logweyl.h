#ifndef LOGWEYL_H
#define LOGWEYL_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define LW_OK 0

/**
 * A required pointer argument was null.
 */
#define LW_ERR_NULL 1

/**
 * Precondition or domain violation.
 */
#define LW_ERR_INVALID 2

/**
 * An iteration did not converge or a fit was rank deficient.
 */
#define LW_ERR_NUMERIC 3

/**
 * File could not be read, written or parsed.
 */
#define LW_ERR_IO 4

/**
 * The caller's buffer is too small; the required length was written.
 */
#define LW_ERR_BUFFER 5

/**
 * A Rust panic was caught at the boundary.
 */
#define LW_ERR_PANIC 6

#define LW_OPERATOR_MODEL 0

#define LW_OPERATOR_UNIT_WEIGHT 1

#define LW_OPERATOR_HARMONIC 2

/**
 * Opaque handle to a computed or loaded spectrum.
 */
typedef struct LwSpectrum LwSpectrum;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the calling thread's last error message into `buf` (NUL
 * terminated, truncated to `cap`) and returns the full message length.
 */
size_t lw_last_error(char *buf, size_t cap);

/**
 * Closed-form Weyl coefficients of the model operator in dimension `d`.
 */
int32_t lw_gamma_closed(size_t d, double *gamma2, double *gamma1);

int32_t lw_digamma(double x, double *result);

int32_t lw_sphere_volume(size_t d, double *result);

/**
 * Lowest `count` eigenvalues of a grid operator (`LW_OPERATOR_*`).
 * `scheme_order` is 2 or 4.
 */
int32_t lw_spectrum_compute(size_t dimension,
                            double half_width,
                            size_t grid_points,
                            uint32_t scheme_order,
                            int32_t operator_,
                            size_t count,
                            struct LwSpectrum **handle);

/**
 * A spectrum from caller-supplied eigenvalues, taken as complete and
 * fully trusted.
 */
int32_t lw_spectrum_from_values(const double *values, size_t len, struct LwSpectrum **handle);

/**
 * Loads a spectrum CSV written by `lw_spectrum_write` or the CLI.
 */
int32_t lw_spectrum_read(const char *file, struct LwSpectrum **handle);

/**
 * Writes the CSV and its `.json` sidecar.
 */
int32_t lw_spectrum_write(const struct LwSpectrum *handle, const char *file);

/**
 * Releases a handle; null is ignored.
 */
void lw_spectrum_free(struct LwSpectrum *handle);

int32_t lw_spectrum_len(const struct LwSpectrum *handle, size_t *len, size_t *trusted);

/**
 * Copies all eigenvalues into `buf`. If `cap` is too small nothing is
 * copied, `written` receives the required length and `LW_ERR_BUFFER` is
 * returned.
 */
int32_t lw_spectrum_eigenvalues(const struct LwSpectrum *handle,
                                double *buf,
                                size_t cap,
                                size_t *written);

/**
 * Eigenvalues raised to `p` (e.g. 0.5 to pass from `Q` to `P`), as a new
 * handle.
 */
int32_t lw_spectrum_powered(const struct LwSpectrum *handle, double p, struct LwSpectrum **result);

/**
 * `N(λ)`, the number of trusted eigenvalues strictly below `lambda`.
 */
int32_t lw_counting(const struct LwSpectrum *handle, double lambda, size_t *result);

/**
 * `Σ λ_j^{−s}` over the trusted eigenvalues, without tail correction.
 */
int32_t lw_zeta_partial(const struct LwSpectrum *handle, double s, double *result);

/**
 * Minimal return time of `(ω, θ)`: the period, 0 at fixed points, +inf if
 * the state never returns.
 */
int32_t lw_return_time(size_t d, const double *omega, const double *theta, double *result);

/**
 * Moves `(ω, θ)` (each of length `d`) along the corner flow for time `t`,
 * in place. `tol <= 0` selects the closed-form solution, otherwise the
 * adaptive integrator with that tolerance.
 */
int32_t lw_flow(size_t d, double *omega, double *theta, double t, double tol);

/**
 * Whether `(ω, θ)` is a fixed point of the flow (writes 1 or 0).
 */
int32_t lw_is_fixed_point(size_t d, const double *omega, const double *theta, int32_t *result);

/**
 * Number of coefficients a fit with `levels` levels produces.
 */
int32_t lw_fit_size(uint32_t levels, size_t *result);

/**
 * Least-squares fit of `N(λ)` in the basis `λ^{a−k} (log λ)^j`, `k <
 * levels`, `j ∈ {1, 0}`. Coefficients are written in the order
 * `(k=0,j=1), (k=0,j=0), (k=1,j=1), ...`; `coeffs` must hold
 * `lw_fit_size(levels)` values.
 */
int32_t lw_fit(const double *lambdas,
               const double *counts,
               size_t n,
               double exponent,
               uint32_t levels,
               double *coeffs,
               size_t cap,
               double *residual_sup);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LOGWEYL_H */
