#ifndef CURVKIT_H
#define CURVKIT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum CurvkitStatus {
  CURVKIT_STATUS_OK = 0,
  CURVKIT_STATUS_NULL_POINTER = 1,
  CURVKIT_STATUS_INVALID_METRIC = 2,
  CURVKIT_STATUS_INVALID_ARGUMENT = 3,
  CURVKIT_STATUS_INDEX_OUT_OF_RANGE = 4,
  // A comparison angle or model triangle does not exist.
  CURVKIT_STATUS_UNDEFINED = 5,
  CURVKIT_STATUS_NOT_EQUALITY_CASE = 6,
  CURVKIT_STATUS_NOT_FLAT = 7,
  // A numerical precondition failed, such as an indefinite Gram matrix.
  CURVKIT_STATUS_NUMERICAL = 8,
  CURVKIT_STATUS_BUFFER_TOO_SMALL = 9,
  CURVKIT_STATUS_PANIC = 10,
} CurvkitStatus;

typedef enum CurvkitMaxKappaOutcome {
  CURVKIT_MAX_KAPPA_OUTCOME_BOUNDED = 0,
  CURVKIT_MAX_KAPPA_OUTCOME_VACUITY_LIMITED = 1,
  CURVKIT_MAX_KAPPA_OUTCOME_UNBOUNDED = 2,
  CURVKIT_MAX_KAPPA_OUTCOME_NO_LOWER_BOUND = 3,
} CurvkitMaxKappaOutcome;

typedef enum CurvkitPackingMode {
  CURVKIT_PACKING_MODE_EXHAUSTIVE = 0,
  CURVKIT_PACKING_MODE_HEURISTIC = 1,
  CURVKIT_PACKING_MODE_AUTO = 2,
} CurvkitPackingMode;

// Opaque point configuration in a model space.
typedef struct CurvkitModelConfig CurvkitModelConfig;

// Opaque validated finite metric space.
typedef struct CurvkitSpace CurvkitSpace;

typedef struct CurvkitCertReport {
  double kappa;
  bool passed;
  double tol_defect;
  // NaN when no quadruple was evaluated.
  double worst_defect;
  bool has_witness;
  size_t witness[4];
  uint64_t quadruples_checked;
  uint64_t undefined_skipped;
} CurvkitCertReport;

typedef struct CurvkitMaxKappaReport {
  enum CurvkitMaxKappaOutcome outcome;
  // Supremum estimate for `Bounded` and `VacuityLimited`, the ceiling for
  // `Unbounded`, the bottom of the range for `NoLowerBound`.
  double kappa;
  // Last passing and first failing κ for `Bounded`, NaN otherwise.
  double passing;
  double failing;
  bool has_witness;
  size_t witness[4];
  double worst_defect;
  double precision;
  double kappa_lo;
  double kappa_hi;
  double vacuity_threshold;
  uint64_t evaluations;
} CurvkitMaxKappaReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *curvkit_version(void);

// Message of the last failed call on this thread, or null after a success.
// Valid until the next call into the library on the same thread.
const char *curvkit_last_error(void);

// Validates a row-major `n × n` distance matrix.
//
// # Safety
// `d` must point to `n * n` readable doubles; `out` must be writable.
enum CurvkitStatus curvkit_space_new(const double *d, size_t n, struct CurvkitSpace **out);

// # Safety
// `space` must come from this library and not have been freed; null is ignored.
void curvkit_space_free(struct CurvkitSpace *space);

// Number of points, or 0 for a null handle.
//
// # Safety
// `space` must be null or a live handle.
size_t curvkit_space_len(const struct CurvkitSpace *space);

// # Safety
// `space` must be a live handle and `out` writable.
enum CurvkitStatus curvkit_space_distance(const struct CurvkitSpace *space,
                                          size_t i,
                                          size_t j,
                                          double *out);

// `S_κ(r)` and `C_κ(r)`.
//
// # Safety
// `sn` and `cs` must be writable.
enum CurvkitStatus curvkit_kappa_trig(double k, double r, double *sn, double *cs);

// Comparison angle at `x`. `defined` is false when the perimeter reaches
// the model bound, in which case `angle` is NaN.
//
// # Safety
// `space` must be a live handle; `angle` and `defined` writable.
enum CurvkitStatus curvkit_comparison_angle(double k,
                                            const struct CurvkitSpace *space,
                                            size_t x,
                                            size_t y,
                                            size_t z,
                                            double *angle,
                                            bool *defined);

// # Safety
// `space` must be a live handle and `out` writable.
enum CurvkitStatus curvkit_quadruple_defect(double k,
                                            const struct CurvkitSpace *space,
                                            size_t x,
                                            size_t y,
                                            size_t z,
                                            size_t w,
                                            double *out);

// Sweeps every quadruple at curvature `k`.
//
// # Safety
// `space` must be a live handle and `out` writable.
enum CurvkitStatus curvkit_certify(const struct CurvkitSpace *space,
                                   double k,
                                   double tol_defect,
                                   struct CurvkitCertReport *out);

// Bisects for the largest certified κ. NaN for `lo` or `hi` selects the
// default search range.
//
// # Safety
// `space` must be a live handle and `out` writable.
enum CurvkitStatus curvkit_max_kappa(const struct CurvkitSpace *space,
                                     double precision,
                                     double lo,
                                     double hi,
                                     double tol_defect,
                                     struct CurvkitMaxKappaReport *out);

// LSS form of the star at `p` over `m` points. Null `weights` means unit
// weights.
//
// # Safety
// `points` (and `weights` if non-null) must hold `m` elements; `out` writable.
enum CurvkitStatus curvkit_lss_form(double k,
                                    const struct CurvkitSpace *space,
                                    size_t p,
                                    const size_t *points,
                                    const double *weights,
                                    size_t m,
                                    double *out);

// Embeds a zero-LSS star in the model space. The configuration lists `p`
// first, then the points in order. NaN `tol_zero` selects the default.
//
// # Safety
// As for [`curvkit_lss_form`]; `out` and `max_residual` (if non-null) writable.
enum CurvkitStatus curvkit_embed_star(double k,
                                      const struct CurvkitSpace *space,
                                      size_t p,
                                      const size_t *points,
                                      const double *weights,
                                      size_t m,
                                      double tol_zero,
                                      struct CurvkitModelConfig **out,
                                      double *max_residual);

// Places a flat quadruple in the model plane, in the order `x, y, z, w`.
//
// # Safety
// `space` must be a live handle; `out` and `max_residual` (if non-null) writable.
enum CurvkitStatus curvkit_realize_flat_quadruple(double k,
                                                  const struct CurvkitSpace *space,
                                                  size_t x,
                                                  size_t y,
                                                  size_t z,
                                                  size_t w,
                                                  double tol,
                                                  struct CurvkitModelConfig **out,
                                                  double *max_residual);

// `d(x, w) − d(x̃, w̃)` against the comparison triangle of `x, y, z`.
//
// # Safety
// `space` must be a live handle and `out` writable.
enum CurvkitStatus curvkit_comparison_gap(double k,
                                          const struct CurvkitSpace *space,
                                          size_t x,
                                          size_t y,
                                          size_t z,
                                          size_t w,
                                          double tol,
                                          double *out);

// # Safety
// `cfg` must come from this library and not have been freed; null is ignored.
void curvkit_config_free(struct CurvkitModelConfig *cfg);

// Number of points, or 0 for a null handle.
//
// # Safety
// `cfg` must be null or a live handle.
size_t curvkit_config_len(const struct CurvkitModelConfig *cfg);

// Intrinsic dimension of the model space, or 0 for a null handle.
//
// # Safety
// `cfg` must be null or a live handle.
size_t curvkit_config_dim(const struct CurvkitModelConfig *cfg);

// Coordinates per point in the chart, or 0 for a null handle.
//
// # Safety
// `cfg` must be null or a live handle.
size_t curvkit_config_ambient_dim(const struct CurvkitModelConfig *cfg);

// Copies the chart coordinates of point `i` into `buf`.
//
// # Safety
// `cfg` must be a live handle and `buf` must hold `len` writable doubles.
enum CurvkitStatus curvkit_config_point(const struct CurvkitModelConfig *cfg,
                                        size_t i,
                                        double *buf,
                                        size_t len);

// Model distance between points `i` and `j`.
//
// # Safety
// `cfg` must be a live handle and `out` writable.
enum CurvkitStatus curvkit_config_distance(const struct CurvkitModelConfig *cfg,
                                           size_t i,
                                           size_t j,
                                           double *out);

// Largest `q`-point packing radius. `packer` may be null; otherwise it
// receives the `q` chosen indices.
//
// # Safety
// `space` must be a live handle; `radius`, `certified` writable; `packer`
// null or holding `q` writable elements.
enum CurvkitStatus curvkit_packing_radius(const struct CurvkitSpace *space,
                                          size_t q,
                                          enum CurvkitPackingMode mode,
                                          double *radius,
                                          size_t *packer,
                                          bool *certified);

// `½ arccos(1 / (1 − q))`; NaN for `q < 2`.
double curvkit_packing_bound(size_t q);

// Applies the curvature-raising transform entrywise.
//
// # Safety
// `space` must be a live handle and `out` writable.
enum CurvkitStatus curvkit_metric_transform(const struct CurvkitSpace *space,
                                            double k,
                                            double alpha,
                                            struct CurvkitSpace **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CURVKIT_H */
