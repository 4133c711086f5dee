/* SPDX-License-Identifier: Apache-2.0 */

#ifndef QCONFINE_H
#define QCONFINE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stddef.h>
#include <stdint.h>

#define QC_FLAG_EPS_LOW_CLAMPED 1

#define QC_FLAG_EPS_HIGH_CLAMPED (1 << 1)

#define QC_FLAG_EPS_HIGH_UNDEFINED (1 << 2)

#define QC_FLAG_EDGE_CLAMPED (1 << 3)

#define QC_FLAG_NO_OSCILLATION (1 << 4)

/**
 * Result of every fallible call.
 */
typedef enum QcStatus {
  QC_STATUS_OK = 0,
  QC_STATUS_NULL_POINTER = 1,
  QC_STATUS_NON_HERMITIAN = 2,
  QC_STATUS_INVALID_DIMENSION = 3,
  QC_STATUS_MALFORMED = 4,
  QC_STATUS_RADICAND_NEGATIVE = 5,
  QC_STATUS_OUT_OF_RANGE_PEAKS = 6,
  QC_STATUS_UNKNOWN_FAMILY = 7,
  QC_STATUS_NON_UNIFORM_SAMPLING = 8,
  QC_STATUS_TOO_SHORT = 9,
  QC_STATUS_INVALID_PLAN = 10,
  QC_STATUS_SINGULAR_RESOLVENT = 11,
  QC_STATUS_REGIME_VIOLATION = 12,
  QC_STATUS_DEGENERATE_TARGET = 13,
  QC_STATUS_IO = 14,
  QC_STATUS_PANIC = 15,
} QcStatus;

/**
 * Opaque Hermitian operator.
 */
typedef struct QcHamiltonian QcHamiltonian;

/**
 * Opaque sampled Rabi trace.
 */
typedef struct QcTrace QcTrace;

/**
 * Leakage bounds with one-sigma uncertainties. `eps_high` and
 * `d_eps_high` are NaN when `QC_FLAG_EPS_HIGH_UNDEFINED` is set.
 */
typedef struct QcEstimate {
  double eps_low;
  double eps_high;
  double d_eps_low;
  double d_eps_high;
  double h0;
  double h01;
  double noise_sd;
  /**
   * Samples kept by phase matching; zero for height-only estimates.
   */
  size_t kept;
  /**
   * `QC_FLAG_*` bits.
   */
  uint32_t flags;
} QcEstimate;

/**
 * Longest-record limit for a target leakage under a given linewidth.
 */
typedef struct QcResolution {
  /**
   * Angular channel width.
   */
  double delta_omega;
  /**
   * Ordinary-frequency channel width.
   */
  double delta_f;
  double t_ob;
} QcResolution;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or NULL. The pointer
 * stays valid until the next `qc_*` call on the same thread.
 */
const char *qc_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *qc_version(void);

/**
 * Builds an operator from row-major `dim*dim` arrays. `imag` may be NULL
 * for a real matrix.
 *
 * # Safety
 * `real` (and `imag` when non-null) must point to `dim*dim` doubles;
 * `out` must be writable.
 */
enum QcStatus qc_hamiltonian_new(const double *real,
                                 const double *imag,
                                 size_t dim,
                                 struct QcHamiltonian **out);

/**
 * Named trial Hamiltonian (`Hm`, `Hn`, `Ha`, `Hb`, `H3`..`H10`).
 *
 * # Safety
 * `name` must be a NUL-terminated string; `out` must be writable.
 */
enum QcStatus qc_hamiltonian_family(const char *name, double gamma, struct QcHamiltonian **out);

/**
 * # Safety
 * `h` must come from this library and not be used afterwards. NULL is a no-op.
 */
void qc_hamiltonian_free(struct QcHamiltonian *h);

/**
 * Dimension of `h`, or 0 for NULL.
 *
 * # Safety
 * `h` must be NULL or a live handle.
 */
size_t qc_hamiltonian_dim(const struct QcHamiltonian *h);

/**
 * Exact leakage out of the qubit subspace.
 *
 * # Safety
 * `h` must be a live handle; `out` must be writable.
 */
enum QcStatus qc_exact_leakage(const struct QcHamiltonian *h, double *out);

/**
 * Lower and upper bounds from the exact peak heights of `h`.
 *
 * # Safety
 * `h` must be a live handle; `lo` and `hi` must be writable.
 */
enum QcStatus qc_analytic_bounds(const struct QcHamiltonian *h, double *lo, double *hi);

/**
 * Lower and upper bounds from a DC height and a Rabi-line height.
 *
 * # Safety
 * `lo` and `hi` must be writable.
 */
enum QcStatus qc_bounds(double h0, double h01, double *lo, double *hi);

/**
 * Simulates `num_samples` points spaced `dt`, each measured
 * `ensemble_size` times; zero gives the noiseless trace.
 *
 * # Safety
 * `h` must be a live handle; `out` must be writable.
 */
enum QcStatus qc_trace_simulate(const struct QcHamiltonian *h,
                                double dt,
                                size_t num_samples,
                                uint64_t ensemble_size,
                                uint64_t seed,
                                struct QcTrace **out);

/**
 * Wraps measured data. `ensemble_size` 0 marks it noiseless.
 *
 * # Safety
 * `times` and `populations` must point to `len` doubles; `out` must be
 * writable.
 */
enum QcStatus qc_trace_new(const double *times,
                           const double *populations,
                           size_t len,
                           uint64_t ensemble_size,
                           struct QcTrace **out);

/**
 * # Safety
 * `t` must come from this library and not be used afterwards. NULL is a no-op.
 */
void qc_trace_free(struct QcTrace *t);

/**
 * Number of samples, or 0 for NULL.
 *
 * # Safety
 * `t` must be NULL or a live handle.
 */
size_t qc_trace_len(const struct QcTrace *t);

/**
 * Copies up to `cap` populations into `buf`; `written` receives the count.
 *
 * # Safety
 * `t` must be a live handle; `buf` must hold `cap` doubles; `written` must
 * be writable.
 */
enum QcStatus qc_trace_populations(const struct QcTrace *t,
                                   double *buf,
                                   size_t cap,
                                   size_t *written);

/**
 * Full pipeline on a trace: phase match, transform, bounds.
 *
 * # Safety
 * `t` must be a live handle; `out` must be writable.
 */
enum QcStatus qc_estimate_trace(const struct QcTrace *t,
                                size_t guard_channels,
                                struct QcEstimate *out);

/**
 * Bounds and uncertainties from peak heights and the off-peak spread.
 *
 * # Safety
 * `out` must be writable.
 */
enum QcStatus qc_estimate_heights(double h0, double h01, double noise_sd, struct QcEstimate *out);

/**
 * Coarsest resolution keeping the upper bound at or below `zeta`.
 *
 * # Safety
 * `out` must be writable.
 */
enum QcStatus qc_max_resolution(double gamma, double zeta, struct QcResolution *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QCONFINE_H */
