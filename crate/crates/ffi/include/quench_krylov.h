#ifndef QUENCH_KRYLOV_H
#define QUENCH_KRYLOV_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Energies are post-quench eigenvalues.
#define QK_CONVENTION_HAMILTONIAN 0

// Energies are measured from the pre-quench ground energy.
#define QK_CONVENTION_WORK 1

typedef enum QkStatus {
  QK_STATUS_OK = 0,
  QK_STATUS_NULL_POINTER = 1,
  QK_STATUS_INVALID_ARGUMENT = 2,
  QK_STATUS_DOMAIN = 3,
  QK_STATUS_PRECISION = 4,
  QK_STATUS_DIVERGENCE = 5,
  QK_STATUS_TRUNCATION = 6,
  QK_STATUS_QUADRATURE = 7,
  QK_STATUS_CROSS_CHECK = 8,
  QK_STATUS_BUFFER_TOO_SMALL = 9,
  QK_STATUS_INTERNAL = 10,
  QK_STATUS_PANIC = 11,
} QkStatus;

// Lanczos coefficients a₀..a_{K−1}, b₁..b_{K−1}.
typedef struct QkLanczos QkLanczos;

// Discrete work distribution of a quench.
typedef struct QkSpectrum QkSpectrum;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or NULL. The pointer stays
// valid until the next failing call on the same thread.
const char *qk_last_error_message(void);

void qk_clear_last_error(void);

// Library version as a static NUL-terminated string.
const char *qk_version(void);

// K Lanczos coefficients from Hamiltonian moments h₀ = 1, h₁, … (at least 2K
// of them). The recursion runs at `precision_bits` (0 for the default) and
// doubles the precision when cancellation demands it.
//
// # Safety
// `moments` must point to `count` doubles; `out` must be writable.
enum QkStatus qk_lanczos_from_moments(const double *moments,
                                      size_t count,
                                      size_t k,
                                      uint32_t precision_bits,
                                      struct QkLanczos **out);

// Closed-form coefficients of a single oscillator quenched from `omega0` to
// `omega1`, first `k` sites.
//
// # Safety
// `out` must be writable.
enum QkStatus qk_lanczos_oscillator(double omega0, double omega1, size_t k, struct QkLanczos **out);

// Coefficients given directly; `len_b` must be `len_a − 1`.
//
// # Safety
// `a` and `b` must point to `len_a` and `len_b` doubles; `out` must be
// writable.
enum QkStatus qk_lanczos_from_ab(const double *a,
                                 size_t len_a,
                                 const double *b,
                                 size_t len_b,
                                 bool terminated,
                                 struct QkLanczos **out);

// Number of a-coefficients (0 for NULL).
//
// # Safety
// `lc` must be NULL or a live handle.
size_t qk_lanczos_len(const struct QkLanczos *lc);

// # Safety
// `lc` must be a live handle and `out` writable.
enum QkStatus qk_lanczos_terminated(const struct QkLanczos *lc, bool *out);

// Copies a₀..a_{K−1} into `buf`, which holds `cap` doubles.
//
// # Safety
// `lc` must be a live handle and `buf` valid for `cap` writes.
enum QkStatus qk_lanczos_copy_a(const struct QkLanczos *lc, double *buf, size_t cap);

// Copies b₁..b_{K−1} into `buf`, which holds `cap` doubles.
//
// # Safety
// `lc` must be a live handle and `buf` valid for `cap` writes.
enum QkStatus qk_lanczos_copy_b(const struct QkLanczos *lc, double *buf, size_t cap);

// Spread complexity and survival probability of e₀ evolved on the chain at
// each of the `count` non-decreasing `times`. `survival` may be NULL.
// A chain that is not terminated is truncated adaptively to `tol`.
//
// # Safety
// `lc` must be a live handle; `times`, `complexity` and a non-null
// `survival` must hold `count` doubles.
enum QkStatus qk_lanczos_evolve(const struct QkLanczos *lc,
                                const double *times,
                                size_t count,
                                double tol,
                                double *complexity,
                                double *survival);

// # Safety
// `lc` must be NULL or a handle not yet freed.
void qk_lanczos_free(struct QkLanczos *lc);

// Work spectrum of a single oscillator quenched from `omega0` to `omega1`,
// truncated once less than `tail_tol` of the probability remains.
//
// # Safety
// `out` must be writable.
enum QkStatus qk_spectrum_oscillator(double omega0,
                                     double omega1,
                                     double tail_tol,
                                     uint32_t convention_id,
                                     uint32_t precision_bits,
                                     struct QkSpectrum **out);

// Number of spectral lines (0 for NULL).
//
// # Safety
// `spec` must be NULL or a live handle.
size_t qk_spectrum_len(const struct QkSpectrum *spec);

// Copies line energies and probabilities; both buffers hold `cap` doubles.
//
// # Safety
// `spec` must be a live handle; `energies` and `weights` valid for `cap`
// writes.
enum QkStatus qk_spectrum_copy_lines(const struct QkSpectrum *spec,
                                     double *energies,
                                     double *weights,
                                     size_t cap);

// Mean and variance of the work.
//
// # Safety
// `spec` must be a live handle; `mean` and `variance` writable.
enum QkStatus qk_spectrum_mean_variance(const struct QkSpectrum *spec,
                                        double *mean,
                                        double *variance);

// Characteristic function G(t) = Σ p e^{−iWt} as (re, im).
//
// # Safety
// `spec` must be a live handle; `re` and `im` writable.
enum QkStatus qk_spectrum_characteristic(const struct QkSpectrum *spec,
                                         double t,
                                         double *re,
                                         double *im);

// Survival probability |G(t)|².
//
// # Safety
// `spec` must be a live handle and `out` writable.
enum QkStatus qk_spectrum_survival(const struct QkSpectrum *spec, double t, double *out);

// K Lanczos coefficients from the spectrum's moments, computed at the
// spectrum's precision; `tol` bounds the moment truncation error.
//
// # Safety
// `spec` must be a live handle and `out` writable.
enum QkStatus qk_spectrum_lanczos(const struct QkSpectrum *spec,
                                  size_t k,
                                  double tol,
                                  struct QkLanczos **out);

// # Safety
// `spec` must be NULL or a handle not yet freed.
void qk_spectrum_free(struct QkSpectrum *spec);

// n-th work cumulant per unit volume of a free-boson mass quench m0 → m1 in
// `dim` dimensions with momentum cutoff `cutoff`. `divergent` (may be NULL)
// reports whether the value grows with the cutoff.
//
// # Safety
// `value` must be writable; `divergent` NULL or writable.
enum QkStatus qk_field_cumulant_density(uint32_t dim,
                                        double m0,
                                        double m1,
                                        double cutoff,
                                        uint32_t n,
                                        double *value,
                                        bool *divergent);

// Moments M₀..M_{n_max} from cumulants β₁..β_count. Complex numbers are
// interleaved (re, im); `moments` holds 2·(n_max + 1) doubles. Missing
// cumulants above `count` are zero.
//
// # Safety
// `cumulants` must hold 2·`count` doubles and `moments` 2·(`n_max` + 1).
enum QkStatus qk_moments_from_cumulants(const double *cumulants,
                                        size_t count,
                                        size_t n_max,
                                        double *moments);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QUENCH_KRYLOV_H */
