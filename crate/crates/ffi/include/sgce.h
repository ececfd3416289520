#ifndef SGCE_H
#define SGCE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SgceEvalMode {
  SGCE_EVAL_MODE_METRICAL = 0,
  SGCE_EVAL_MODE_NON_METRICAL = 1,
} SgceEvalMode;

/**
 * Status codes; the non-zero values match the `sgce` CLI exit codes.
 */
typedef enum SgceStatus {
  SGCE_STATUS_OK = 0,
  SGCE_STATUS_NULL_POINTER = 1,
  SGCE_STATUS_INVALID_ARGUMENT = 2,
  SGCE_STATUS_NUMERIC = 3,
  SGCE_STATUS_TOPOLOGY_MISMATCH = 4,
  SGCE_STATUS_IO = 5,
  SGCE_STATUS_PANIC = 6,
} SgceStatus;

/**
 * Opaque triangle mesh.
 */
typedef struct SgceMesh SgceMesh;

/**
 * Opaque trained network.
 */
typedef struct SgceNetwork SgceNetwork;

typedef struct SgceLossWeights {
  double lambda_2d;
  double lambda_3d;
  double lambda_1;
  double lambda_2;
} SgceLossWeights;

typedef struct SgceLossReport {
  double total;
  double l_3d;
  double l_2d;
  double l_vertices;
  double l_3d_id;
} SgceLossReport;

typedef struct SgceDistanceStats {
  double median;
  double mean;
  double std;
  size_t count;
} SgceDistanceStats;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread; empty after a success.
 * The pointer stays valid until the next `sgce_*` call on this thread.
 */
const char *sgce_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *sgce_version(void);

/**
 * Loads an OBJ or PLY mesh.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid pointer.
 */
enum SgceStatus sgce_mesh_load(const char *path, struct SgceMesh **out);

/**
 * Builds a mesh from `n_vertices × 3` coordinates and `n_faces × 3` indices.
 *
 * # Safety
 * The arrays must hold the stated number of elements; `out` must be valid.
 */
enum SgceStatus sgce_mesh_from_arrays(const double *vertices,
                                      size_t n_vertices,
                                      const uint32_t *faces,
                                      size_t n_faces,
                                      struct SgceMesh **out);

/**
 * # Safety
 * `mesh` must come from this library and not be used afterwards.
 */
void sgce_mesh_free(struct SgceMesh *mesh);

/**
 * # Safety
 * `mesh` must be null or a live handle.
 */
size_t sgce_mesh_vertex_count(const struct SgceMesh *mesh);

/**
 * # Safety
 * `mesh` must be null or a live handle.
 */
size_t sgce_mesh_face_count(const struct SgceMesh *mesh);

/**
 * FNV-1a hash of the face list; 0 for a null handle.
 *
 * # Safety
 * `mesh` must be null or a live handle.
 */
uint64_t sgce_mesh_topology_hash(const struct SgceMesh *mesh);

/**
 * Copies the `vertex_count × 3` coordinates into `out`.
 *
 * # Safety
 * `out` must have room for `len` doubles.
 */
enum SgceStatus sgce_mesh_vertices(const struct SgceMesh *mesh, double *out, size_t len);

/**
 * Loads an SGCE checkpoint file.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid pointer.
 */
enum SgceStatus sgce_network_load(const char *path, struct SgceNetwork **out);

/**
 * Loads a checkpoint from memory.
 *
 * # Safety
 * `data` must hold `len` bytes and `out` must be valid.
 */
enum SgceStatus sgce_network_from_bytes(const uint8_t *data, size_t len, struct SgceNetwork **out);

/**
 * # Safety
 * `net` must come from this library and not be used afterwards.
 */
void sgce_network_free(struct SgceNetwork *net);

/**
 * # Safety
 * `net` must be null or a live handle.
 */
size_t sgce_network_latent_dim(const struct SgceNetwork *net);

/**
 * # Safety
 * `net` must be null or a live handle.
 */
size_t sgce_network_vertex_count(const struct SgceNetwork *net);

/**
 * Writes the latent vector of `mesh` into `out` (`len` must equal the
 * latent dimension).
 *
 * # Safety
 * Handles must be live and `out` must have room for `len` doubles.
 */
enum SgceStatus sgce_encode(const struct SgceNetwork *net,
                            const struct SgceMesh *mesh,
                            double *out,
                            size_t len);

/**
 * Default loss weights (0.4, 0.6, 0.5, 0.5).
 */
struct SgceLossWeights sgce_loss_weights_default(void);

/**
 * Evaluates the full loss. `mask` may be null for uniform weights,
 * otherwise it holds one weight per vertex. `weights` may be null for the
 * defaults.
 *
 * # Safety
 * Handles must be live; non-null pointers must be valid.
 */
enum SgceStatus sgce_loss(const struct SgceNetwork *net,
                          const struct SgceMesh *pred,
                          const struct SgceMesh *gt,
                          const double *mask,
                          double l_2d,
                          const struct SgceLossWeights *weights,
                          struct SgceLossReport *out);

/**
 * Aligns `pred` to `gt` and measures ground-truth vertices against the
 * aligned surface. `pairs` holds `n_pairs` `(pred, gt)` index pairs
 * flattened; pass null/0 for identity correspondence.
 *
 * # Safety
 * Handles must be live; `pairs` must hold `2·n_pairs` values when non-null.
 */
enum SgceStatus sgce_evaluate(const struct SgceMesh *pred,
                              const struct SgceMesh *gt,
                              const size_t *pairs,
                              size_t n_pairs,
                              enum SgceEvalMode mode,
                              struct SgceDistanceStats *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SGCE_H */
