#ifndef CPM_FFI_H
#define CPM_FFI_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum CpmStatus {
  CPM_STATUS_OK = 0,
  CPM_STATUS_NULL_POINTER = 1,
  CPM_STATUS_INVALID_ARGUMENT = 2,
  CPM_STATUS_IO = 3,
  CPM_STATUS_BAD_MAGIC = 4,
  CPM_STATUS_UNSUPPORTED_VERSION = 5,
  CPM_STATUS_TRUNCATED = 6,
  CPM_STATUS_TRAILING_DATA = 7,
  CPM_STATUS_INVALID_DIMENSIONS = 8,
  CPM_STATUS_INVALID_FIELD = 9,
  CPM_STATUS_DIMENSION_MISMATCH = 10,
  CPM_STATUS_EMPTY_DISTRIBUTION = 11,
  CPM_STATUS_BUFFER_TOO_SMALL = 12,
  CPM_STATUS_PANIC = 13,
  CPM_STATUS_OTHER = 14,
} CpmStatus;

/**
 * A running simulation together with its parameters.
 */
typedef struct CpmSim CpmSim;

/**
 * Fixed-size header fields of a snapshot file.
 */
typedef struct CpmSnapshotInfo {
  uint32_t width;
  uint32_t height;
  uint64_t mcs;
  uint64_t seed;
} CpmSnapshotInfo;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread. Valid until the next
 * failing call on the same thread.
 */
const char *cpm_last_error(void);

/**
 * Creates a simulation from a TOML parameter string (null for defaults),
 * seeded with `cell_count` cells from the parameters.
 *
 * # Safety
 * `toml` must be null or a NUL-terminated string; `out` must be writable.
 */
enum CpmStatus cpm_sim_new(const char *toml, uint64_t seed, struct CpmSim **out);

/**
 * Loads a simulation from a snapshot; the stream continues exactly as the
 * run that wrote it, given the same parameters.
 *
 * # Safety
 * `path` must be a NUL-terminated string, `toml` null or NUL-terminated,
 * and `out` writable.
 */
enum CpmStatus cpm_sim_import(const char *path, const char *toml, struct CpmSim **out);

/**
 * # Safety
 * `sim` must be null or a handle from this library not yet freed.
 */
void cpm_sim_free(struct CpmSim *sim);

/**
 * Advances by `steps` Monte-Carlo steps.
 *
 * # Safety
 * `sim` must be a live handle.
 */
enum CpmStatus cpm_sim_run(struct CpmSim *sim, uint64_t steps);

/**
 * # Safety
 * `sim` must be a live handle and `out` writable.
 */
enum CpmStatus cpm_sim_info(const struct CpmSim *sim, struct CpmSnapshotInfo *out);

/**
 * Copies the row-major cell ids into `buf` of `len` entries.
 *
 * # Safety
 * `sim` must be a live handle and `buf` valid for `len` writes.
 */
enum CpmStatus cpm_sim_copy_cell_ids(const struct CpmSim *sim, uint32_t *buf, size_t len);

/**
 * Copies the row-major field into `buf` of `len` entries.
 *
 * # Safety
 * `sim` must be a live handle and `buf` valid for `len` writes.
 */
enum CpmStatus cpm_sim_copy_field(const struct CpmSim *sim, double *buf, size_t len);

/**
 * Writes the current state as a snapshot file.
 *
 * # Safety
 * `sim` must be a live handle and `path` NUL-terminated.
 */
enum CpmStatus cpm_sim_export(const struct CpmSim *sim, const char *path);

/**
 * Validates a snapshot file fully and returns its header.
 *
 * # Safety
 * `path` must be NUL-terminated and `out` null or writable.
 */
enum CpmStatus cpm_snapshot_validate(const char *path, struct CpmSnapshotInfo *out);

/**
 * Dice coefficient of two 0/1 masks of `width * height` bytes.
 *
 * # Safety
 * `a` and `b` must be valid for `width * height` reads; `out` writable.
 */
enum CpmStatus cpm_dice(const uint8_t *a,
                        const uint8_t *b,
                        size_t width,
                        size_t height,
                        double *out);

/**
 * 1-D earth mover's distance between two samples.
 *
 * # Safety
 * `a` and `b` must be valid for `na` and `nb` reads; `out` writable.
 */
enum CpmStatus cpm_emd_1d(const double *a, size_t na, const double *b, size_t nb, double *out);

/**
 * Sorted areas of the closed medium regions of a periodic vessel mask
 * (nonzero bytes are vessel). `connectivity` is 4 or 8. `*count` receives
 * the number of areas; if it exceeds `cap`, nothing is written and
 * `BufferTooSmall` is returned.
 *
 * # Safety
 * `mask` must be valid for `width * height` reads, `buf` for `cap` writes
 * (or null when `cap` is 0), and `count` writable.
 */
enum CpmStatus cpm_lacunae_areas(const uint8_t *mask,
                                 size_t width,
                                 size_t height,
                                 uint32_t connectivity,
                                 size_t min_area,
                                 uint64_t *buf,
                                 size_t cap,
                                 size_t *count);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CPM_FFI_H */
