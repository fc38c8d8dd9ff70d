#ifndef NECKSTACK_H
#define NECKSTACK_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes.
 */
typedef enum NsStatus {
  NS_STATUS_OK = 0,
  /**
   * Null pointer, bad UTF-8, or an index out of range.
   */
  NS_STATUS_INVALID_ARGUMENT = 1,
  /**
   * Input rejected by the library (malformed JSON, wrong shapes, unknown builtin).
   */
  NS_STATUS_INVALID_INPUT = 2,
  /**
   * Coincident points.
   */
  NS_STATUS_DEGENERATE = 3,
  /**
   * Newton or quadrature failed to converge, or a Jacobian was singular.
   */
  NS_STATUS_NO_CONVERGENCE = 4,
  /**
   * Any other numerical failure (poles, t out of range, gluing mismatch).
   */
  NS_STATUS_NUMERICAL = 5,
  NS_STATUS_IO = 6,
  /**
   * A caller-provided buffer is too short; the required length is reported.
   */
  NS_STATUS_BUFFER_TOO_SMALL = 7,
  /**
   * Internal panic caught at the boundary.
   */
  NS_STATUS_PANIC = 8,
} NsStatus;

/**
 * Opaque finite block.
 */
typedef struct NsBlock NsBlock;

/**
 * Opaque configuration of points per level.
 */
typedef struct NsConfiguration NsConfiguration;

/**
 * Opaque triangulated surface.
 */
typedef struct NsMesh NsMesh;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *ns_version(void);

/**
 * Message of the last failure on this thread. Pass a null `buf` to query the size.
 *
 * # Safety
 * `buf` must be null or valid for `len` bytes; `needed` null or writable.
 */
enum NsStatus ns_last_error_message(char *buf, size_t len, size_t *needed);

/**
 * Frees a string returned by this library.
 *
 * # Safety
 * `s` must come from this library and not be freed twice.
 */
void ns_string_free(char *s);

/**
 * Configuration from JSON `{"levels": [{"k": int, "points": [[re, im], ...]}, ...]}`.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `result` writable.
 */
enum NsStatus ns_configuration_from_json(const char *json, struct NsConfiguration **result);

/**
 * Configuration from level sizes and interleaved points, levels `first ..`.
 *
 * # Safety
 * `sizes` must hold `num_levels` entries and `points` `2 Σ sizes` doubles.
 */
enum NsStatus ns_configuration_new(int64_t first,
                                   const size_t *sizes,
                                   size_t num_levels,
                                   const double *points,
                                   struct NsConfiguration **result);

/**
 * # Safety
 * `cfg` must be null or come from this library and not be freed twice.
 */
void ns_configuration_free(struct NsConfiguration *cfg);

/**
 * First level index and number of levels.
 *
 * # Safety
 * `cfg` must be a live handle; outputs writable.
 */
enum NsStatus ns_configuration_levels(const struct NsConfiguration *cfg,
                                      int64_t *first,
                                      size_t *count);

/**
 * Number of points on level `k`.
 *
 * # Safety
 * `cfg` must be a live handle; `n` writable.
 */
enum NsStatus ns_configuration_level_size(const struct NsConfiguration *cfg, int64_t k, size_t *n);

/**
 * Forces of level `k` as `2 n_k` interleaved doubles.
 *
 * # Safety
 * `cfg` must be a live handle; `forces` valid for `len` doubles.
 */
enum NsStatus ns_configuration_forces(const struct NsConfiguration *cfg,
                                      int64_t k,
                                      double *forces,
                                      size_t len);

/**
 * Largest |F| over levels with neighbours on both sides.
 *
 * # Safety
 * `cfg` must be a live handle; `value` writable.
 */
enum NsStatus ns_configuration_max_interior_force(const struct NsConfiguration *cfg, double *value);

/**
 * Largest deviation of the residue limit of the balancing periods from 4πi F.
 *
 * # Safety
 * `cfg` must be a live handle; `deviation` writable.
 */
enum NsStatus ns_configuration_limit_balance(const struct NsConfiguration *cfg, double *deviation);

/**
 * JSON form of the configuration; free with [`ns_string_free`].
 *
 * # Safety
 * `cfg` must be a live handle; `json` writable.
 */
enum NsStatus ns_configuration_to_json(const struct NsConfiguration *cfg, char **json);

/**
 * Builtin block: `fan:n=3`, `ladder22`, `chain:a=1,b=0,h=2`.
 *
 * # Safety
 * `spec` must be a NUL-terminated string; `result` writable.
 */
enum NsStatus ns_block_builtin(const char *spec, struct NsBlock **result);

/**
 * # Safety
 * `block` must be null or come from this library and not be freed twice.
 */
void ns_block_free(struct NsBlock *block);

/**
 * Residual force F_C of the block.
 *
 * # Safety
 * `block` must be a live handle; outputs writable.
 */
enum NsStatus ns_block_residual_force(const struct NsBlock *block, double *re, double *im);

/**
 * |det| and smallest singular value of the non-degeneracy matrix.
 *
 * # Safety
 * `block` must be a live handle; outputs writable.
 */
enum NsStatus ns_block_certify(const struct NsBlock *block, double *det_abs, double *sigma_min);

/**
 * Shifts the interior points by `perturb (1 + i)` and rebalances with the
 * endpoints fixed. Writes the new block and the Newton iteration count.
 *
 * # Safety
 * `block` must be a live handle; outputs writable.
 */
enum NsStatus ns_block_rebalance(const struct NsBlock *block,
                                 double perturb,
                                 struct NsBlock **result,
                                 size_t *iterations);

/**
 * Copy of the block's points as a configuration handle.
 *
 * # Safety
 * `block` must be a live handle; `result` writable.
 */
enum NsStatus ns_block_configuration(const struct NsBlock *block, struct NsConfiguration **result);

/**
 * Builds the first-order mesh of `cfg` at `t` (grid points per side, gluing
 * radius `epsilon`). Slab overlap is not an error here; it shows up through
 * [`ns_mesh_info`].
 *
 * # Safety
 * `cfg` must be a live handle; `result` writable.
 */
enum NsStatus ns_mesh_build(const struct NsConfiguration *cfg,
                            double t,
                            double epsilon,
                            size_t grid,
                            struct NsMesh **result);

/**
 * # Safety
 * `mesh` must be null or come from this library and not be freed twice.
 */
void ns_mesh_free(struct NsMesh *mesh);

/**
 * Vertex and triangle counts, genus after capping boundaries, and the
 * embeddedness verdict (1 or 0). Any output pointer may be null.
 *
 * # Safety
 * `mesh` must be a live handle.
 */
enum NsStatus ns_mesh_info(const struct NsMesh *mesh,
                           size_t *vertices,
                           size_t *triangles,
                           int64_t *genus,
                           int32_t *embedded);

/**
 * Writes the mesh as OBJ.
 *
 * # Safety
 * `mesh` must be a live handle; `path` a NUL-terminated string.
 */
enum NsStatus ns_mesh_write_obj(const struct NsMesh *mesh, const char *path);

/**
 * Runs the closed-form and identity suite. `passed` receives 1 or 0; `json`
 * (optional) receives the full report, to be freed with [`ns_string_free`].
 *
 * # Safety
 * `passed` writable; `json` null or writable.
 */
enum NsStatus ns_verify_paper(uint64_t seed, size_t cases, int32_t *passed, char **json);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NECKSTACK_H */
