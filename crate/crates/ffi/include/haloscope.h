#ifndef HALOSCOPE_H
#define HALOSCOPE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum HsStatus {
  HS_STATUS_OK = 0,
  HS_STATUS_NULL_POINTER = 1,
  HS_STATUS_INVALID_ARGUMENT = 2,
  HS_STATUS_PANIC = 3,
  HS_STATUS_INVALID_LASSO = 10,
  HS_STATUS_INVALID_CAMERA = 11,
  HS_STATUS_INVALID_PARAMS = 12,
  HS_STATUS_DIMENSION_MISMATCH = 13,
  HS_STATUS_EMPTY_SELECTION = 14,
  HS_STATUS_OUT_OF_DOMAIN = 15,
  HS_STATUS_DUPLICATE_ID = 20,
  HS_STATUS_BROKEN_LINK = 21,
  HS_STATUS_BAD_LINK = 22,
  HS_STATUS_FOF_VIOLATION = 23,
  HS_STATUS_CYCLE = 24,
  HS_STATUS_NO_SUCH_HALO = 25,
  HS_STATUS_NO_SUCH_CLUSTER = 26,
  HS_STATUS_EMPTY_TRACE = 27,
  HS_STATUS_INVALID_POINT = 30,
  HS_STATUS_INVALID_SPEC = 31,
  HS_STATUS_INCOMPLETE_DATASET = 32,
  HS_STATUS_FORMAT = 40,
  HS_STATUS_IO = 41,
  HS_STATUS_OTHER = 99,
} HsStatus;

typedef enum HsLassoKind {
  HS_LASSO_KIND_CIRCLE = 0,
  HS_LASSO_KIND_POLYGON = 1,
} HsLassoKind;

/**
 * A validated merger forest.
 */
typedef struct HsForest HsForest;

/**
 * The outcome of a lasso selection, including the grid for re-thresholding.
 */
typedef struct HsSelection HsSelection;

/**
 * One particle snapshot.
 */
typedef struct HsSnapshot HsSnapshot;

typedef struct HsParams {
  uint32_t grid_n;
  /**
   * When false the threshold is the mean node density and `rho0` is ignored.
   */
  bool explicit_threshold;
  double rho0;
  /**
   * Standard cloud-in-cell weights instead of the summed ones.
   */
  bool cic_deposition;
  /**
   * Plain 6-connected splitting, ignoring edge tags.
   */
  bool untagged_split;
  uint32_t area_width;
  uint32_t area_height;
} HsParams;

typedef struct HsCamera {
  double eye[3];
  double look_at[3];
  double up[3];
  /**
   * Degrees.
   */
  double vertical_fov;
  double near;
  double far;
  uint32_t width;
  uint32_t height;
} HsCamera;

/**
 * A circle uses `center` and `radius`; a polygon reads `vertex_count`
 * (x, y) pairs from `vertices`.
 */
typedef struct HsLasso {
  enum HsLassoKind kind;
  double center[2];
  double radius;
  const double *vertices;
  size_t vertex_count;
} HsLasso;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. Valid until the
 * next failing call on the same thread.
 */
const char *hs_last_error_message(void);

/**
 * Static NUL-terminated version string.
 */
const char *hs_version(void);

/**
 * Loads and validates a halo catalog.
 */
enum HsStatus hs_forest_load(const char *path, struct HsForest **out_forest);

void hs_forest_free(struct HsForest *forest);

size_t hs_forest_len(const struct HsForest *forest);

/**
 * Halo ids of the subtree rooted at `root`, root first, breadth first.
 */
enum HsStatus hs_forest_subtree(const struct HsForest *forest,
                                uint64_t root,
                                uint64_t *buf,
                                size_t cap,
                                size_t *out_len);

/**
 * Number of invariant violations in a catalog, without failing on the
 * first one. Parse errors still fail.
 */
enum HsStatus hs_catalog_violation_count(const char *path, size_t *out_count);

/**
 * Reads an HSNP snapshot file.
 */
enum HsStatus hs_snapshot_load(const char *path, struct HsSnapshot **out_snapshot);

void hs_snapshot_free(struct HsSnapshot *snapshot);

size_t hs_snapshot_len(const struct HsSnapshot *snapshot);

uint32_t hs_snapshot_timestep(const struct HsSnapshot *snapshot);

/**
 * Fills `out_params` with the library defaults.
 */
enum HsStatus hs_params_default(struct HsParams *out_params);

/**
 * Runs a lasso selection. `params` may be null for the defaults.
 */
enum HsStatus hs_select(const struct HsSnapshot *snapshot,
                        const struct HsCamera *camera,
                        const struct HsLasso *lasso,
                        const struct HsParams *params,
                        struct HsSelection **out_selection);

/**
 * A new selection re-thresholded at `rho0` on the cached grid of `selection`.
 */
enum HsStatus hs_selection_rethreshold(const struct HsSelection *selection,
                                       double rho0,
                                       const struct HsCamera *camera,
                                       struct HsSelection **out_selection);

void hs_selection_free(struct HsSelection *selection);

size_t hs_selection_cluster_count(const struct HsSelection *selection);

/**
 * Primary cluster id, or 0 when there are no clusters.
 */
uint32_t hs_selection_primary(const struct HsSelection *selection);

double hs_selection_threshold(const struct HsSelection *selection);

/**
 * Projected pixel count per cluster, in cluster id order.
 */
enum HsStatus hs_selection_pixel_counts(const struct HsSelection *selection,
                                        uint64_t *buf,
                                        size_t cap,
                                        size_t *out_len);

/**
 * Snapshot indices of the particles in cluster `cluster_id`, ascending.
 */
enum HsStatus hs_selection_members(const struct HsSelection *selection,
                                   uint32_t cluster_id,
                                   uint64_t *buf,
                                   size_t cap,
                                   size_t *out_len);

/**
 * Classical MDS of `n` points (`3n` doubles) into `out_xy` (`2n` doubles).
 */
enum HsStatus hs_mds_project(const double *points, size_t n, double *out_xy);

/**
 * RGB of the time colormap at `t` in [0, 1] (clamped).
 */
enum HsStatus hs_time_colormap(double t, uint8_t *out_rgb);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HALOSCOPE_H */
