#ifndef MESHLET_CODEC_H
#define MESHLET_CODEC_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum MlcCodec {
  MLC_CODEC_BASIC = 0,
  MLC_CODEC_GTS = 1,
  MLC_CODEC_GTS_REUSE = 2,
} MlcCodec;

typedef enum MlcSolver {
  MLC_SOLVER_ETA = 0,
  MLC_SOLVER_EXACT = 1,
} MlcSolver;

typedef enum MlcStatus {
  MLC_STATUS_OK = 0,
  MLC_STATUS_NULL_POINTER = 1,
  MLC_STATUS_INVALID_ARGUMENT = 2,
  MLC_STATUS_IO = 3,
  MLC_STATUS_PARSE = 4,
  MLC_STATUS_INVALID_MESH = 5,
  MLC_STATUS_ENCODE = 6,
  MLC_STATUS_CONTAINER = 7,
  MLC_STATUS_BUFFER_TOO_SMALL = 8,
  MLC_STATUS_PANIC = 9,
} MlcStatus;

/**
 * Opaque container handle.
 */
typedef struct MlcContainer MlcContainer;

/**
 * Opaque mesh handle.
 */
typedef struct MlcMesh MlcMesh;

typedef struct MlcCompressOptions {
  enum MlcCodec codec;
  enum MlcSolver solver;
  uint32_t max_vertices;
  uint32_t max_triangles;
  uint8_t bits;
  double time_budget_seconds;
} MlcCompressOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread; empty after a success.
 * Valid until the next call into this library on the same thread.
 */
const char *mlc_last_error_message(void);

struct MlcCompressOptions mlc_compress_options_default(void);

/**
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid pointer.
 */
enum MlcStatus mlc_mesh_load_obj(const char *path, struct MlcMesh **out);

/**
 * Builds a position-only mesh.
 *
 * # Safety
 * `positions` must hold `3 * vertex_count` floats and `indices`
 * `3 * triangle_count` values; `out` must be valid.
 */
enum MlcStatus mlc_mesh_from_positions(const float *positions,
                                       size_t vertex_count,
                                       const uint32_t *indices,
                                       size_t triangle_count,
                                       struct MlcMesh **out);

/**
 * # Safety
 * `mesh` must be null or a live handle.
 */
size_t mlc_mesh_triangle_count(const struct MlcMesh *mesh);

/**
 * # Safety
 * `mesh` must be null or a live handle.
 */
size_t mlc_mesh_vertex_count(const struct MlcMesh *mesh);

/**
 * # Safety
 * `mesh` must be null or a handle not yet freed.
 */
void mlc_mesh_free(struct MlcMesh *mesh);

/**
 * Compresses `mesh`. `options` may be null for defaults. When
 * `report_json` is non-null it receives the run report, to be released
 * with [`mlc_string_free`].
 *
 * # Safety
 * Pointers must be valid or null where allowed.
 */
enum MlcStatus mlc_compress(const struct MlcMesh *mesh,
                            const struct MlcCompressOptions *options,
                            struct MlcContainer **out,
                            char **report_json);

/**
 * # Safety
 * `container` must be a live handle and `path` NUL-terminated.
 */
enum MlcStatus mlc_container_write(const struct MlcContainer *container, const char *path);

/**
 * # Safety
 * `path` must be NUL-terminated and `out` valid.
 */
enum MlcStatus mlc_container_read(const char *path, struct MlcContainer **out);

/**
 * # Safety
 * `container` must be null or a live handle.
 */
size_t mlc_container_meshlet_count(const struct MlcContainer *container);

/**
 * Writes the non-degenerate triangles of meshlet `index` as global vertex
 * ids into `triangles` (3 values per triangle). `count` receives the
 * triangle count; if `capacity` triangles are too few nothing is written
 * and `MLC_STATUS_BUFFER_TOO_SMALL` is returned.
 *
 * # Safety
 * `triangles` must hold `3 * capacity` values (may be null if `capacity` is 0).
 */
enum MlcStatus mlc_container_decode_meshlet(const struct MlcContainer *container,
                                            size_t index,
                                            uint32_t *triangles,
                                            size_t capacity,
                                            size_t *count);

/**
 * Runs the full decode and quantization checks. `passed` receives the verdict.
 *
 * # Safety
 * Handles must be live and `passed` valid.
 */
enum MlcStatus mlc_verify(const struct MlcContainer *container,
                          const struct MlcMesh *mesh,
                          bool *passed);

/**
 * # Safety
 * `container` must be null or a handle not yet freed.
 */
void mlc_container_free(struct MlcContainer *container);

/**
 * # Safety
 * `s` must be null or a string returned by this library.
 */
void mlc_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MESHLET_CODEC_H */
