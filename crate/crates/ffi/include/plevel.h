#ifndef PLEVEL_H
#define PLEVEL_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum PlevelStatus {
  PLEVEL_STATUS_OK = 0,
  PLEVEL_STATUS_NULL_POINTER = 1,
  PLEVEL_STATUS_INVALID_PARAMETER = 2,
  PLEVEL_STATUS_NUMERICAL = 3,
  PLEVEL_STATUS_HYPOTHESIS = 4,
  PLEVEL_STATUS_CHECK_FAILED = 5,
  PLEVEL_STATUS_PANIC = 6,
} PlevelStatus;

typedef enum PlevelFamilyKind {
  PLEVEL_FAMILY_KIND_SCHWARZSCHILD = 0,
  PLEVEL_FAMILY_KIND_BUMPED = 1,
  PLEVEL_FAMILY_KIND_EUCLIDEAN = 2,
} PlevelFamilyKind;

/**
 * Reference model, both coefficient triples and diagnostics for one `p`.
 */
typedef struct PlevelModel PlevelModel;

/**
 * A warped-product metric.
 */
typedef struct PlevelWarp PlevelWarp;

typedef struct PlevelModelConstants {
  double p;
  /**
   * flux constant of the unit-normalized model potential
   */
  double cs;
  double kp;
  double c_fit;
  double c_tilde;
  /**
   * `W` on the horizon
   */
  double w0;
  /**
   * constant value of the growing quantity on the model
   */
  double q_growing;
} PlevelModelConstants;

typedef struct PlevelModelPoint {
  double r;
  double u;
  double du;
  double t;
  double w;
  double dwdt;
} PlevelModelPoint;

typedef struct PlevelCellSummary {
  double cp;
  double adm;
  /**
   * `m_ADM - 2 (C_p/K_p)^{1/(3-p)}`
   */
  double margin;
  double min_slope_decaying;
  double min_slope_growing;
  bool equality;
  bool passed;
  /**
   * number of checks that failed
   */
  uint32_t failed_checks;
} PlevelCellSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Static, NUL-terminated version string.
 */
const char *plevel_version(void);

/**
 * Message of the last failure on this thread, or NULL. Valid until the next
 * failing call on the same thread.
 */
const char *plevel_last_error(void);

/**
 * Builds the model for `p` with default grids and tolerances.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
enum PlevelStatus plevel_model_new(double p, struct PlevelModel **out);

/**
 * # Safety
 * `model` must be NULL or a handle from [`plevel_model_new`] not yet freed.
 */
void plevel_model_free(struct PlevelModel *model);

/**
 * # Safety
 * `model` must be a live handle and `out` valid for writes.
 */
enum PlevelStatus plevel_model_constants(const struct PlevelModel *model,
                                         struct PlevelModelConstants *out);

/**
 * Model quantities at isotropic radius `r >= 1`.
 *
 * # Safety
 * `model` must be a live handle and `out` valid for writes.
 */
enum PlevelStatus plevel_model_eval(const struct PlevelModel *model,
                                    double r,
                                    struct PlevelModelPoint *out);

/**
 * Builds a warped metric. `scale` is the mass (Schwarzschild, bumped) or
 * the radius (Euclidean); `eps` is read only for the bumped family, whose
 * bump is supported on `[scale, 4 scale]`.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum PlevelStatus plevel_warp_new(enum PlevelFamilyKind kind,
                                  double scale,
                                  double eps,
                                  struct PlevelWarp **out);

/**
 * # Safety
 * `warp` must be NULL or a handle from [`plevel_warp_new`] not yet freed.
 */
void plevel_warp_free(struct PlevelWarp *warp);

/**
 * p-capacity of the inner boundary.
 *
 * # Safety
 * `warp` must be a live handle and `out` valid for writes.
 */
enum PlevelStatus plevel_warp_capacity(const struct PlevelWarp *warp, double p, double *out);

/**
 * # Safety
 * `warp` must be a live handle and `out` valid for writes.
 */
enum PlevelStatus plevel_warp_adm(const struct PlevelWarp *warp, double *out);

/**
 * Runs every check on one metric. A failed check is not an error: the
 * call returns `PLEVEL_STATUS_OK` with `passed = false`; fields that were
 * not reached are NaN.
 *
 * # Safety
 * `model` and `warp` must be live handles and `out` valid for writes.
 */
enum PlevelStatus plevel_verify(const struct PlevelModel *model,
                                const struct PlevelWarp *warp,
                                struct PlevelCellSummary *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PLEVEL_H */
