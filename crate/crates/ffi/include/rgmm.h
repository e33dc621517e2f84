#ifndef RGMM_H
#define RGMM_H

/* Generated with cbindgen:0.29.4 */

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum RgmmStatus {
  RGMM_STATUS_OK = 0,
  RGMM_STATUS_NULL_POINTER = 1,
  // Out-of-domain or inconsistent arguments.
  RGMM_STATUS_INVALID_ARGUMENT = 2,
  RGMM_STATUS_NOT_SPD = 3,
  RGMM_STATUS_CAPACITY = 4,
  RGMM_STATUS_NUMERICAL = 5,
  RGMM_STATUS_INITIALIZATION = 6,
  RGMM_STATUS_IO = 7,
  RGMM_STATUS_PARSE = 8,
  RGMM_STATUS_PANIC = 9,
} RgmmStatus;

typedef enum RgmmMode {
  RGMM_MODE_REPULSIVE = 0,
  RGMM_MODE_IID_BASELINE = 1,
} RgmmMode;

// Opaque fitted model.
typedef struct RgmmFit RgmmFit;

// Settings for [`rgmm_fit_new`]. Start from [`rgmm_fit_options_default`].
typedef struct RgmmFitOptions {
  // An `RgmmMode` value.
  uint32_t mode;
  size_t k;
  size_t burn_in;
  size_t n_saved;
  size_t thin;
  uint64_t seed;
  uint64_t stream_id;
  // Repulsion strength; ignored by the i.i.d. baseline.
  double tau;
  // Diagonal of the inverse-Wishart scale.
  double psi_scale;
  // Inverse-Wishart degrees of freedom; `<= 0` selects `d + 4`.
  double nu;
  // Dirichlet concentration per component; `<= 0` selects `1/k`.
  double alpha;
  // Standardize the data before fitting (1) or not (0).
  uint8_t standardize;
} RgmmFitOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread, or null after a
// success. Valid until the next call into this library on this thread.
const char *rgmm_last_error_message(void);

// Calibrated repulsion strength for dimension `d` and target `(u, p)`.
//
// # Safety
// `out_tau` must be valid for one write.
enum RgmmStatus rgmm_calibrate_tau(size_t d, double u, double p, double *out_tau);

// Exact normalizing constant of `NRep_{k,d}(0, I, tau)` (k <= 7).
//
// # Safety
// `out_value` must be valid for one write.
enum RgmmStatus rgmm_constant_exact(size_t k, size_t d, double tau, double *out_value);

// Monte Carlo normalizing constant and its standard error.
//
// # Safety
// `out_value` and `out_std_error` must be valid for one write each.
enum RgmmStatus rgmm_constant_mc(size_t k,
                                 size_t d,
                                 double tau,
                                 size_t n_draws,
                                 uint64_t seed,
                                 double *out_value,
                                 double *out_std_error);

// Repulsive component of `k` points in `R^d` (row-major) under the
// identity metric.
//
// # Safety
// `points` must be valid for `k * d` reads and `out_value` for one write.
enum RgmmStatus rgmm_repulsive_component(const double *points,
                                         size_t k,
                                         size_t d,
                                         double tau,
                                         double *out_value);

// Repulsive, k = 10, tau = 5.45, Psi = 0.06, B = 5000, S = 10000, T = 20.
//
// # Safety
// `out` must be valid for one write.
enum RgmmStatus rgmm_fit_options_default(struct RgmmFitOptions *out);

// Fits `n` observations in `R^d` (row-major). On success `*out_fit` owns a
// handle to release with [`rgmm_fit_free`]; on failure it is set to null.
//
// # Safety
// `data` must be valid for `n * d` reads, `options` for one read and
// `out_fit` for one write.
enum RgmmStatus rgmm_fit_new(const double *data,
                             size_t n,
                             size_t d,
                             const struct RgmmFitOptions *options,
                             struct RgmmFit **out_fit);

// # Safety
// `fit` must be null or a handle from [`rgmm_fit_new`] not yet freed.
void rgmm_fit_free(struct RgmmFit *fit);

// # Safety
// `fit` must be a live handle and `out_count` valid for one write.
enum RgmmStatus rgmm_fit_num_draws(const struct RgmmFit *fit, size_t *out_count);

// Mean and population sd of the occupied-component count over saved draws.
//
// # Safety
// `fit` must be a live handle; outputs valid for one write each.
enum RgmmStatus rgmm_fit_occupied(const struct RgmmFit *fit, double *out_mean, double *out_sd);

// LPML of the data as fitted (standardized scale when standardizing).
//
// # Safety
// `fit` must be a live handle and `out_lpml` valid for one write.
enum RgmmStatus rgmm_fit_lpml(const struct RgmmFit *fit, double *out_lpml);

// Posterior predictive density at `m` points (row-major, original scale),
// written to `out_density[0..m]`.
//
// # Safety
// `fit` must be a live handle, `points` valid for `m * d` reads and
// `out_density` for `m` writes.
enum RgmmStatus rgmm_fit_predictive(const struct RgmmFit *fit,
                                    const double *points,
                                    size_t m,
                                    double *out_density);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RGMM_H */
