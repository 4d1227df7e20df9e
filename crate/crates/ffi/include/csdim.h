#ifndef CSDIM_H
#define CSDIM_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum CsdimStatus {
  CSDIM_STATUS_OK = 0,
  CSDIM_STATUS_NULL_POINTER = 1,
  CSDIM_STATUS_INVALID_ARGUMENT = 2,
  CSDIM_STATUS_NOT_STANDARDIZED = 3,
  CSDIM_STATUS_CONFIG = 4,
  CSDIM_STATUS_NO_ROOT = 5,
  CSDIM_STATUS_QUADRATURE = 6,
  CSDIM_STATUS_UNSATISFIABLE = 7,
  CSDIM_STATUS_IO = 8,
  CSDIM_STATUS_UTF8 = 9,
  CSDIM_STATUS_PANIC = 10,
} CsdimStatus;

typedef enum CsdimFamily {
  CSDIM_FAMILY_PM = 0,
  CSDIM_FAMILY_PLUS = 1,
  CSDIM_FAMILY_SIMPLE = 2,
} CsdimFamily;

// Opaque input law.
typedef struct CsdimDistribution CsdimDistribution;

typedef struct CsdimReplica {
  size_t n_roots;
  double beta_star;
  double eta;
  double dl_mse;
} CsdimReplica;

typedef struct CsdimDistortion {
  double d_star;
  double d_star_linear;
  double d_l;
} CsdimDistortion;

typedef struct CsdimThreshold {
  double rate;
  // NaN for the simple family.
  double alpha;
} CsdimThreshold;

typedef struct CsdimStateEvolution {
  double alpha;
  double tau_sq;
  double mse;
  // 1 when the fixed-point iteration converged.
  int32_t converged;
} CsdimStateEvolution;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Copies the calling thread's last error message (NUL-terminated, truncated
// to `len`) into `buf` and returns the full message length excluding the
// terminator. Pass a null `buf` to query the length.
//
// # Safety
// `buf` must be null or valid for `len` bytes.
size_t csdim_last_error_message(char *buf, size_t len);

// Static, NUL-terminated version string.
const char *csdim_version(void);

// Standard Gaussian.
struct CsdimDistribution *csdim_dist_gaussian(void);

// Standardized Cantor law.
struct CsdimDistribution *csdim_dist_cantor(void);

// Standardized `(1−γ)δ₀ + γN(0, 1)`.
//
// # Safety
// `out` must be null or writable.
enum CsdimStatus csdim_dist_sparse_gaussian(double gamma, struct CsdimDistribution **out);

// Builds a law from a TOML distribution config.
//
// # Safety
// `toml` must be null or a NUL-terminated string; `out` must be null or
// writable.
enum CsdimStatus csdim_dist_from_toml(const char *toml, struct CsdimDistribution **out);

// Releases a handle; null is ignored.
//
// # Safety
// `h` must be null or a handle from a `csdim_dist_*` constructor that has not
// been freed.
void csdim_dist_free(struct CsdimDistribution *h);

// # Safety
// `h` must be a live handle or null; `out` must be null or writable.
enum CsdimStatus csdim_dist_info_dimension(const struct CsdimDistribution *h, double *out);

// Scalar-channel MMSE of a standardized law.
//
// # Safety
// `h` must be a live handle or null; `out` must be null or writable.
enum CsdimStatus csdim_mmse(const struct CsdimDistribution *h, double snr, double *out);

// Mutual information in nats.
//
// # Safety
// `h` must be a live handle or null; `out` must be null or writable.
enum CsdimStatus csdim_mutual_info(const struct CsdimDistribution *h, double snr, double *out);

// # Safety
// `h` must be a live handle or null; `out` must be null or writable.
enum CsdimStatus csdim_replica(const struct CsdimDistribution *h,
                               double rate,
                               double noise_var,
                               struct CsdimReplica *out);

// # Safety
// `out` must be null or writable.
enum CsdimStatus csdim_gaussian_curves(double rate, double noise_var, struct CsdimDistortion *out);

// # Safety
// `out` must be null or writable.
enum CsdimStatus csdim_threshold(enum CsdimFamily family, double gamma, struct CsdimThreshold *out);

// State evolution with α optimized when `alpha` is negative, fixed otherwise.
// The law must be a mixture.
//
// # Safety
// `h` must be a live handle or null; `out` must be null or writable.
enum CsdimStatus csdim_state_evolution(const struct CsdimDistribution *h,
                                       double rate,
                                       double noise_var,
                                       double alpha,
                                       struct CsdimStateEvolution *out);

// Lipschitz constant of the achievability construction; `entropy` in nats.
//
// # Safety
// `out` must be null or writable.
enum CsdimStatus csdim_lipschitz_constant(double gamma, double entropy, double rate, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CSDIM_H */
