#ifndef OU_EPR_H
#define OU_EPR_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum OuStatus {
  OU_STATUS_OK = 0,
  OU_STATUS_NULL_POINTER = 1,
  OU_STATUS_INVALID_ARGUMENT = 2,
  OU_STATUS_DOMAIN = 3,
  OU_STATUS_NO_BRACKET = 4,
  OU_STATUS_COMPUTATION = 5,
  OU_STATUS_PANIC = 6,
} OuStatus;

/**
 * Model handle.
 */
typedef struct OuModel OuModel;

/**
 * Spectrum handle: the leading eigenvalues of the covariance operator.
 */
typedef struct OuSpectrum OuSpectrum;

typedef struct OuDerivedConstants {
  double r;
  double c;
  double ep;
  double lambda_lo;
  double lambda_hi;
} OuDerivedConstants;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or NULL. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *ou_last_error_message(void);

/**
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
enum OuStatus ou_model_new(double theta, struct OuModel **out);

/**
 * # Safety
 * `model` must be NULL or a handle from [`ou_model_new`] not yet freed.
 */
void ou_model_free(struct OuModel *model);

/**
 * # Safety
 * `model` must be a live handle and `out` writable.
 */
enum OuStatus ou_model_constants(const struct OuModel *model, struct OuDerivedConstants *out);

/**
 * Large-time Cramér function `Λ(λ)`; `+inf` outside its domain.
 *
 * # Safety
 * `model` must be a live handle and `out` writable.
 */
enum OuStatus ou_cramer(const struct OuModel *model, double lambda, double *out);

/**
 * `Λ(λ)` by numerical quadrature of the spectral integral.
 *
 * # Safety
 * `model` must be a live handle and `out` writable.
 */
enum OuStatus ou_cramer_quadrature(const struct OuModel *model, double lambda, double *out);

/**
 * Finite-horizon `Λ_T(λ)` from the eigenvalue product; `+inf` when the
 * exponential moment diverges.
 *
 * # Safety
 * `model` must be a live handle and `out` writable.
 */
enum OuStatus ou_lambda_finite_t(const struct OuModel *model,
                                 double lambda,
                                 double horizon,
                                 size_t n_terms,
                                 double *out);

/**
 * Rate function `I(x)` from the explicit formula.
 *
 * # Safety
 * `model` must be a live handle and `out` writable.
 */
enum OuStatus ou_rate(const struct OuModel *model, double x, double *out);

/**
 * Rate function `I(x)` as the numerical Legendre transform of `Λ`.
 *
 * # Safety
 * `model` must be a live handle and `out` writable.
 */
enum OuStatus ou_rate_legendre(const struct OuModel *model, double x, double *out);

/**
 * First `count` eigenvalues of the covariance operator on `[0, horizon]`.
 *
 * # Safety
 * `model` must be a live handle and `out` writable.
 */
enum OuStatus ou_spectrum_new(const struct OuModel *model,
                              double horizon,
                              size_t count,
                              struct OuSpectrum **out);

/**
 * # Safety
 * `spectrum` must be NULL or a handle from [`ou_spectrum_new`] not yet freed.
 */
void ou_spectrum_free(struct OuSpectrum *spectrum);

/**
 * Number of eigenvalues held, or 0 for NULL.
 *
 * # Safety
 * `spectrum` must be NULL or a live handle.
 */
size_t ou_spectrum_len(const struct OuSpectrum *spectrum);

/**
 * Copies `min(len, capacity)` eigenvalues, largest first, into `buf` and
 * stores the number written in `written`.
 *
 * # Safety
 * `spectrum` must be a live handle, `buf` must hold `capacity` doubles and
 * `written` must be writable.
 */
enum OuStatus ou_spectrum_gammas(const struct OuSpectrum *spectrum,
                                 double *buf,
                                 size_t capacity,
                                 size_t *written);

/**
 * Root `ω` generating eigenvalue `j` (1-based).
 *
 * # Safety
 * `spectrum` must be a live handle and `out` writable.
 */
enum OuStatus ou_spectrum_omega(const struct OuSpectrum *spectrum, size_t j, double *out);

/**
 * Total trace estimate: the held eigenvalues plus the analytic tail.
 *
 * # Safety
 * `spectrum` must be a live handle and `out` writable.
 */
enum OuStatus ou_spectrum_trace(const struct OuSpectrum *spectrum, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* OU_EPR_H */
