#ifndef DIFFUSENSE_H
#define DIFFUSENSE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result codes returned by every fallible entry point.
typedef enum DfsStatus {
  DFS_STATUS_OK = 0,
  DFS_STATUS_NULL_POINTER = 1,
  // Malformed data: wrong lengths, non-finite or asymmetric matrices.
  DFS_STATUS_INVALID_INPUT = 2,
  // An argument outside the domain of the operation.
  DFS_STATUS_DOMAIN = 3,
  // A scenario document violates one of its invariants.
  DFS_STATUS_CONFIG = 4,
  // A document could not be parsed.
  DFS_STATUS_FORMAT = 5,
  DFS_STATUS_NO_CONVERGENCE = 6,
  // The caller's output buffer is shorter than required.
  DFS_STATUS_BUFFER_TOO_SMALL = 7,
  DFS_STATUS_IO = 8,
  DFS_STATUS_PANIC = 9,
} DfsStatus;

typedef enum DfsEstimator {
  DFS_ESTIMATOR_COMEDIE = 0,
  DFS_ESTIMATOR_DIRAC = 1,
  DFS_ESTIMATOR_THIELE_GOVER = 2,
} DfsEstimator;

// Opaque SH signal block handle.
typedef struct DfsBlock DfsBlock;

// Opaque covariance matrix handle.
typedef struct DfsCovariance DfsCovariance;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *dfs_version(void);

// Message describing the last failed call on this thread, or NULL after a
// successful call. The pointer stays valid until the next call returning a
// [`DfsStatus`] on the same thread.
const char *dfs_last_error_message(void);

// `(L+1)²`, the number of SH channels up to order `order`.
size_t dfs_channel_count(size_t order);

// Writes the `(order+1)²` real N3D harmonics (ACN order) at the direction
// given in radians.
//
// # Safety
// `out` must point to `capacity` writable doubles.
enum DfsStatus dfs_sh_vector(size_t order,
                             double azimuth,
                             double elevation,
                             double *out,
                             size_t capacity);

// Wraps a row-major `(order+1)² × (order+1)²` symmetric matrix.
//
// # Safety
// `data` must point to `len` readable doubles; `out` must be writable.
enum DfsStatus dfs_covariance_from_matrix(size_t order,
                                          const double *data,
                                          size_t len,
                                          struct DfsCovariance **out);

// Sample covariance `B·Bᵀ/T` of channel-major SH signals with `samples`
// samples per channel.
//
// # Safety
// `data` must point to `len` readable doubles; `out` must be writable.
enum DfsStatus dfs_covariance_from_signals(size_t order,
                                           size_t samples,
                                           const double *data,
                                           size_t len,
                                           struct DfsCovariance **out);

// Model covariance of the scenario described by a TOML document (the same
// schema the command-line tool reads).
//
// # Safety
// `toml` must be a NUL-terminated string; `out` must be writable.
enum DfsStatus dfs_covariance_analytic_from_config(const char *toml, struct DfsCovariance **out);

// Sample covariance of a signal block.
//
// # Safety
// `block` must be a live handle; `out` must be writable.
enum DfsStatus dfs_covariance_from_block(const struct DfsBlock *block, struct DfsCovariance **out);

// Releases a covariance handle. NULL is ignored.
//
// # Safety
// `handle` must come from this library and not have been freed.
void dfs_covariance_free(struct DfsCovariance *handle);

// SH order of a covariance handle, or `SIZE_MAX` for NULL.
//
// # Safety
// `handle` must be NULL or a live handle.
size_t dfs_covariance_order(const struct DfsCovariance *handle);

// Copies the row-major matrix into `out`.
//
// # Safety
// `handle` must be a live handle; `out` must point to `capacity` doubles.
enum DfsStatus dfs_covariance_data(const struct DfsCovariance *handle,
                                   double *out,
                                   size_t capacity);

// Eigenvalues in decreasing order, `(L+1)²` of them.
//
// # Safety
// `handle` must be a live handle; `out` must point to `capacity` doubles.
enum DfsStatus dfs_eigenvalues(const struct DfsCovariance *handle, double *out, size_t capacity);

// COMEDIE diffuseness in `[0, 1]`.
//
// # Safety
// `handle` must be a live handle; `out` must be writable.
enum DfsStatus dfs_comedie(const struct DfsCovariance *handle, double *out);

// DirAC diffuseness from the order-0/1 block.
//
// # Safety
// `handle` must be a live handle; `out` must be writable.
enum DfsStatus dfs_dirac(const struct DfsCovariance *handle, double *out);

// Thiele-Gover diffuseness on the default beam grid for the covariance order.
//
// # Safety
// `handle` must be a live handle; `out` must be writable.
enum DfsStatus dfs_thiele_gover(const struct DfsCovariance *handle, double *out);

// Diffuse-field mismatch of the covariance.
//
// # Safety
// `handle` must be a live handle; `out` must be writable.
enum DfsStatus dfs_mismatch_xi(const struct DfsCovariance *handle, double *out);

// Order-1 through order-L diffuseness profile, `L` values.
//
// # Safety
// `handle` must be a live handle; `out` must point to `capacity` doubles.
enum DfsStatus dfs_profile(const struct DfsCovariance *handle,
                           enum DfsEstimator estimator,
                           double *out,
                           size_t capacity);

// Relative diffuse level `β` for a direct-to-reverberant ratio in dB.
double dfs_drr_to_beta(double drr_db);

// Synthesizes the SH signal block of a TOML scenario.
//
// # Safety
// `toml` must be a NUL-terminated string; `out` must be writable.
enum DfsStatus dfs_block_synthesize(const char *toml, struct DfsBlock **out);

// Releases a block handle. NULL is ignored.
//
// # Safety
// `handle` must come from this library and not have been freed.
void dfs_block_free(struct DfsBlock *handle);

// Channel and sample counts of a block.
//
// # Safety
// `handle` must be a live handle; both outputs must be writable.
enum DfsStatus dfs_block_shape(const struct DfsBlock *handle, size_t *channels, size_t *samples);

// Borrowed view of the channel-major samples. The pointer stays valid until
// the block is freed.
//
// # Safety
// `handle` must be a live handle; both outputs must be writable.
enum DfsStatus dfs_block_data(const struct DfsBlock *handle, const double **data, size_t *len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DIFFUSENSE_H */
