#ifndef EDGEFLOW_H
#define EDGEFLOW_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define EDGEFLOW_AXIS_HORIZONTAL 0

#define EDGEFLOW_AXIS_VERTICAL 1

typedef enum EdgeflowStatus {
  EDGEFLOW_STATUS_OK = 0,
  EDGEFLOW_STATUS_NULL_POINTER = 1,
  EDGEFLOW_STATUS_INVALID_ARGUMENT = 2,
  EDGEFLOW_STATUS_DIMENSION_MISMATCH = 3,
  EDGEFLOW_STATUS_TEXTURELESS = 4,
  EDGEFLOW_STATUS_INTERNAL = 5,
} EdgeflowStatus;

/**
 * Opaque estimator handle.
 */
typedef struct EdgeflowEstimator EdgeflowEstimator;

/**
 * Estimator settings. Angles in degrees.
 */
typedef struct EdgeflowConfig {
  double fov_horizontal_deg;
  double fov_vertical_deg;
  uint32_t image_width;
  uint32_t image_height;
  double stereo_baseline;
  uint32_t window_size;
  uint32_t max_search;
  uint32_t max_horizon;
  uint32_t max_disparity;
  uint32_t height_window;
  double frame_rate;
} EdgeflowConfig;

typedef struct EdgeflowRates {
  /**
   * rad/s
   */
  double roll_rate;
  /**
   * rad/s
   */
  double pitch_rate;
} EdgeflowRates;

/**
 * Result of one frame. Velocities and height are NaN until a stereo height
 * is available.
 */
typedef struct EdgeflowVelocity {
  double v_x;
  double v_y;
  double height;
  double flow_x;
  double flow_y;
  double divergence_x;
  double divergence_y;
  uint32_t horizon_x;
  uint32_t horizon_y;
  double timestamp;
  /**
   * Bit set: 1 warmup, 2 textureless x, 4 textureless y, 8 no height.
   */
  uint8_t quality;
} EdgeflowVelocity;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Defaults: 128x96 pixels, 57.4 x 44.5 degree field of view, 6 cm baseline.
 */
struct EdgeflowConfig edgeflow_config_default(void);

/**
 * Creates an estimator. On success `*out` owns a handle that must be
 * released with `edgeflow_estimator_free`.
 *
 * # Safety
 * `config` must point to a valid `EdgeflowConfig` and `out` to writable
 * storage for one pointer.
 */
enum EdgeflowStatus edgeflow_estimator_new(const struct EdgeflowConfig *config,
                                           struct EdgeflowEstimator **out);

/**
 * Releases a handle. Null is ignored.
 *
 * # Safety
 * `handle` must come from `edgeflow_estimator_new` and not be used again.
 */
void edgeflow_estimator_free(struct EdgeflowEstimator *handle);

/**
 * Processes one frame. `right` and `rates` may be null: without `right` no
 * height is measured, without `rates` no de-rotation is applied.
 *
 * # Safety
 * `left` (and `right` when not null) must point to `width * height` bytes,
 * row-major. `rates` must be null or valid; `out` must be writable.
 */
enum EdgeflowStatus edgeflow_estimator_push(struct EdgeflowEstimator *handle,
                                            const uint8_t *left,
                                            const uint8_t *right,
                                            uint32_t width,
                                            uint32_t height,
                                            double timestamp,
                                            const struct EdgeflowRates *rates,
                                            struct EdgeflowVelocity *out);

/**
 * Edge histogram of one 8-bit frame: `width` column sums for
 * `EDGEFLOW_AXIS_HORIZONTAL`, `height` row sums for `EDGEFLOW_AXIS_VERTICAL`.
 *
 * # Safety
 * `pixels` must point to `width * height` bytes and `out_bins` to `out_len`
 * writable values.
 */
enum EdgeflowStatus edgeflow_edge_histogram(const uint8_t *pixels,
                                            uint32_t width,
                                            uint32_t height,
                                            uint32_t axis,
                                            uint64_t *out_bins,
                                            size_t out_len);

/**
 * Message for the last failed call on this thread, or null. Valid until the
 * next call into this library on the same thread.
 */
const char *edgeflow_last_error_message(void);

/**
 * Static description of a status code. Takes a plain integer so values
 * outside the enum are safe to pass.
 */
const char *edgeflow_status_string(int32_t status);

/**
 * Library version, static string.
 */
const char *edgeflow_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* EDGEFLOW_H */
