#ifndef DEFORMSYNTH_H
#define DEFORMSYNTH_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Labels are passed as `int32_t`: 1 = deformed (positive), 0 = intact.
 */
#define DS_LABEL_NON_DEFORMED 0

#define DS_LABEL_DEFORMED 1

typedef enum DsStatus {
  DS_STATUS_OK = 0,
  DS_STATUS_NULL_POINTER = 1,
  DS_STATUS_INVALID_ARGUMENT = 2,
  DS_STATUS_CONFIG = 3,
  DS_STATUS_IO = 4,
  DS_STATUS_PARSE = 5,
  DS_STATUS_DATA = 6,
  DS_STATUS_IMAGE = 7,
  DS_STATUS_GEOMETRY = 8,
  DS_STATUS_PANIC = 9,
} DsStatus;

typedef enum DsBackground {
  DS_BACKGROUND_BLACK = 0,
  DS_BACKGROUND_POOL = 1,
} DsBackground;

typedef enum DsMorphOp {
  DS_MORPH_OP_ERODE = 0,
  DS_MORPH_OP_DILATE = 1,
  DS_MORPH_OP_OPEN = 2,
  DS_MORPH_OP_CLOSE = 3,
  /**
   * The dataset clean-up chain configured in a `DsConfig`.
   */
  DS_MORPH_OP_REFINE = 4,
} DsMorphOp;

typedef struct DsConfig DsConfig;

typedef struct DsManifest DsManifest;

typedef struct DsMesh DsMesh;

typedef struct DsConfusion {
  uint64_t true_positive;
  uint64_t false_positive;
  uint64_t false_negative;
  uint64_t true_negative;
} DsConfusion;

typedef struct DsMetrics {
  double accuracy;
  double f1;
  double recall;
  double precision;
  /**
   * Set when a denominator was zero and some metric was reported as 0.
   */
  bool degenerate;
} DsMetrics;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. Valid until the
 * next `ds_*` call on the same thread.
 */
const char *ds_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *ds_version(void);

struct DsConfig *ds_config_default(void);

/**
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum DsStatus ds_config_load(const char *path, struct DsConfig **out);

/**
 * Parses TOML text with the same rules as config files.
 *
 * # Safety
 * `text` must be a NUL-terminated string; `out` must be writable.
 */
enum DsStatus ds_config_from_toml(const char *text, struct DsConfig **out);

/**
 * # Safety
 * `cfg` must come from a `ds_config_*` constructor or be null.
 */
void ds_config_free(struct DsConfig *cfg);

/**
 * # Safety
 * `cfg` must be a live config handle.
 */
uint64_t ds_config_seed(const struct DsConfig *cfg);

/**
 * # Safety
 * `cfg` must be a live config handle.
 */
enum DsStatus ds_config_set_seed(struct DsConfig *cfg, uint64_t seed);

/**
 * Writes the 64-hex-digit config digest plus NUL into `buf`.
 *
 * # Safety
 * `cfg` must be a live handle and `buf` must hold `cap` bytes.
 */
enum DsStatus ds_config_hash(const struct DsConfig *cfg, char *buf, size_t cap);

/**
 * Builds the parametric can described by `cfg`.
 *
 * # Safety
 * `cfg` must be a live handle; `out` must be writable.
 */
enum DsStatus ds_mesh_generate_can(const struct DsConfig *cfg, struct DsMesh **out);

/**
 * # Safety
 * `mesh` must be a live handle or null.
 */
size_t ds_mesh_vertex_count(const struct DsMesh *mesh);

/**
 * # Safety
 * `mesh` must be a live handle or null.
 */
size_t ds_mesh_face_count(const struct DsMesh *mesh);

/**
 * Copies `3 · vertex_count` coordinates (x, y, z per vertex) into `out`.
 *
 * # Safety
 * `out` must hold `cap` doubles.
 */
enum DsStatus ds_mesh_positions(const struct DsMesh *mesh, double *out, size_t cap);

/**
 * Writes OBJ plus its `.groups` sidecar.
 *
 * # Safety
 * `mesh` must be live; `path` NUL-terminated.
 */
enum DsStatus ds_mesh_save_obj(const struct DsMesh *mesh, const char *path);

/**
 * # Safety
 * `mesh` must come from `ds_mesh_generate_can` or be null.
 */
void ds_mesh_free(struct DsMesh *mesh);

/**
 * Renders `n` samples into `out_dir` (see the `generate` command).
 * `jobs` = 0 uses every core.
 *
 * # Safety
 * `cfg` must be live, `out_dir` NUL-terminated; `out` may be null when
 * the manifest is not needed.
 */
enum DsStatus ds_generate(const struct DsConfig *cfg,
                          uint64_t n,
                          enum DsBackground background,
                          const char *out_dir,
                          uint32_t jobs,
                          struct DsManifest **out);

/**
 * # Safety
 * `path` NUL-terminated; `out` writable.
 */
enum DsStatus ds_manifest_load(const char *path, struct DsManifest **out);

/**
 * # Safety
 * `m` must be live or null.
 */
size_t ds_manifest_len(const struct DsManifest *m);

/**
 * Label of entry `i` as `DS_LABEL_*`.
 *
 * # Safety
 * `m` must be live; `label` writable.
 */
enum DsStatus ds_manifest_label(const struct DsManifest *m, size_t i, int32_t *label);

/**
 * Image path of entry `i`, or null when out of range. Owned by the
 * manifest handle.
 *
 * # Safety
 * `m` must be live or null.
 */
const char *ds_manifest_image_path(const struct DsManifest *m, size_t i);

/**
 * Re-hashes every listed file; `mismatches` receives the number of
 * missing or modified files.
 *
 * # Safety
 * `m` must be live; `mismatches` writable.
 */
enum DsStatus ds_manifest_verify(const struct DsManifest *m, size_t *mismatches);

/**
 * # Safety
 * `m` must come from a `ds_*` constructor or be null.
 */
void ds_manifest_free(struct DsManifest *m);

/**
 * Tallies `n` label/prediction pairs (`DS_LABEL_*` values).
 *
 * # Safety
 * `labels` and `predictions` must each hold `n` values.
 */
enum DsStatus ds_confusion(const int32_t *labels,
                           const int32_t *predictions,
                           size_t n,
                           struct DsConfusion *out);

/**
 * Accuracy, F1, recall and precision with deformed as positive class.
 *
 * # Safety
 * `out` must be writable.
 */
enum DsStatus ds_metrics(struct DsConfusion cm, struct DsMetrics *out);

/**
 * Square-element morphology on a row-major `width × height` mask
 * (nonzero = set). Writes 0/1 bytes into `out`, which may alias `mask`.
 * `cfg` is only read for `DS_MORPH_OP_REFINE` and may otherwise be null.
 *
 * # Safety
 * `mask` and `out` must each hold `width · height` bytes.
 */
enum DsStatus ds_morphology(const uint8_t *mask,
                            uint32_t width,
                            uint32_t height,
                            enum DsMorphOp op,
                            uint32_t radius,
                            const struct DsConfig *cfg,
                            uint8_t *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DEFORMSYNTH_H */
