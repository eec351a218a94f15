#ifndef FINSLERLAB_H
#define FINSLERLAB_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum FlStatus {
  FL_STATUS_OK = 0,
  FL_STATUS_NULL_POINTER = 1,
  FL_STATUS_INVALID_INPUT = 2,
  FL_STATUS_DOMAIN = 3,
  FL_STATUS_ZERO_SECTION = 4,
  FL_STATUS_SINGULAR = 5,
  FL_STATUS_BOUNDARY_EXIT = 6,
  FL_STATUS_CONFIG = 7,
  FL_STATUS_PANIC = 8,
} FlStatus;

typedef enum FlFactorKind {
  FL_FACTOR_KIND_POINCARE_DISK = 0,
  FL_FACTOR_KIND_BERGMAN_BALL = 1,
  FL_FACTOR_KIND_FUBINI_STUDY = 2,
  FL_FACTOR_KIND_EUCLIDEAN_FLAT = 3,
} FlFactorKind;

// Opaque handle to `F_{t,k}` on a product manifold.
typedef struct FlMetric FlMetric;

typedef struct FlFactor {
  enum FlFactorKind kind;
  size_t dim;
} FlFactor;

typedef struct FlComplex {
  double re;
  double im;
} FlComplex;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Creates `F_{t,k}` on the product of `n_factors` factors.
//
// # Safety
// `factors` must point to `n_factors` entries and `out` must be writable.
enum FlStatus fl_metric_new(const struct FlFactor *factors,
                            size_t n_factors,
                            double t,
                            uint32_t k,
                            struct FlMetric **out);

// Creates `F_{t,k}` on the polydisk of dimension `n`.
//
// # Safety
// `out` must be writable.
enum FlStatus fl_metric_polydisk(size_t n, double t, uint32_t k, struct FlMetric **out);

// Releases a handle; null is ignored.
//
// # Safety
// `m` must come from `fl_metric_new` or `fl_metric_polydisk` and not be used afterwards.
void fl_metric_free(struct FlMetric *m);

// Complex dimension of the manifold, or 0 for a null handle.
//
// # Safety
// `m` must be null or a live handle.
size_t fl_metric_dim(const struct FlMetric *m);

// `F_{t,k}(z, v)`.
//
// # Safety
// `z` and `v` must point to `n` entries; `out` must be writable.
enum FlStatus fl_metric_value(const struct FlMetric *m,
                              const struct FlComplex *z,
                              const struct FlComplex *v,
                              size_t n,
                              double *out);

// Complex fundamental tensor `G_{αβ̄}` written row-major into `out` (`n * n` entries).
//
// # Safety
// `z` and `v` must point to `n` entries and `out` to `n * n` writable entries.
enum FlStatus fl_complex_tensor(const struct FlMetric *m,
                                const struct FlComplex *z,
                                const struct FlComplex *v,
                                size_t n,
                                struct FlComplex *out);

// Holomorphic sectional curvature at `(z, v)`.
//
// # Safety
// `z` and `v` must point to `n` entries; `out` must be writable.
enum FlStatus fl_sectional_curvature(const struct FlMetric *m,
                                     const struct FlComplex *z,
                                     const struct FlComplex *v,
                                     size_t n,
                                     double *out);

// Range of the holomorphic sectional curvature for `n` factors of curvature `c`.
//
// # Safety
// `lo` and `hi` must be writable.
enum FlStatus fl_curvature_bounds(double c, size_t n, double t, uint32_t k, double *lo, double *hi);

// Invariant distance of `F_{t,k}` between two points of the polydisk.
//
// # Safety
// `z1` and `z2` must point to `n` entries; `out` must be writable.
enum FlStatus fl_polydisk_distance(double t,
                                   uint32_t k,
                                   const struct FlComplex *z1,
                                   const struct FlComplex *z2,
                                   size_t n,
                                   double *out);

// Copies the last error message of this thread into `buf` (NUL-terminated,
// truncated to `len`). Returns the full message length, 0 when there is none.
//
// # Safety
// `buf` must be null or point to `len` writable bytes.
size_t fl_last_error_message(char *buf, size_t len);

// Static description of a status code.
const char *fl_status_string(enum FlStatus status);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FINSLERLAB_H */
