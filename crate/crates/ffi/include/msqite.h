#ifndef MSQITE_H
#define MSQITE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum MsqStatus {
  MSQ_STATUS_OK = 0,
  MSQ_STATUS_NULL_POINTER = 1,
  MSQ_STATUS_INVALID_UTF8 = 2,
  /**
   * Malformed config, Hamiltonian text or other input.
   */
  MSQ_STATUS_INVALID_INPUT = 3,
  MSQ_STATUS_IO = 4,
  /**
   * Numerical failure or violated contract during a run.
   */
  MSQ_STATUS_NUMERICAL = 5,
  /**
   * System too large for the exact oracle.
   */
  MSQ_STATUS_TOO_LARGE = 6,
  MSQ_STATUS_OUT_OF_RANGE = 7,
  MSQ_STATUS_PANIC = 8,
} MsqStatus;

/**
 * Parsed qubit Hamiltonian.
 */
typedef struct MsqHamiltonian MsqHamiltonian;

/**
 * Outcome of a completed run.
 */
typedef struct MsqResult MsqResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread; empty if none. The
 * pointer stays valid until the next failing call on this thread.
 */
const char *msq_last_error_message(void);

/**
 * Parse a Hamiltonian text file.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid pointer.
 */
enum MsqStatus msq_hamiltonian_from_file(const char *path, struct MsqHamiltonian **out);

/**
 * Parse Hamiltonian text held in memory.
 *
 * # Safety
 * `text` must be a NUL-terminated string and `out` a valid pointer.
 */
enum MsqStatus msq_hamiltonian_from_text(const char *text, struct MsqHamiltonian **out);

/**
 * # Safety
 * `h` must come from `msq_hamiltonian_from_*`; `out` must be valid.
 */
enum MsqStatus msq_hamiltonian_n_qubits(const struct MsqHamiltonian *h, size_t *out);

/**
 * # Safety
 * `h` must come from `msq_hamiltonian_from_*` or be null.
 */
void msq_hamiltonian_free(struct MsqHamiltonian *h);

/**
 * Exact eigenvalues in ascending order. Writes at most `capacity` values
 * to `values` (and, if `spins` is non-null, the matching `<S^2>` labels)
 * and the full spectrum size to `total`.
 *
 * # Safety
 * `values` and `spins` must hold `capacity` doubles; `total` must be valid.
 */
enum MsqStatus msq_spectrum(const struct MsqHamiltonian *h,
                            double *values,
                            double *spins,
                            size_t capacity,
                            size_t *total);

/**
 * Execute a run described by a JSON config. Nothing is written to disk;
 * the `output` field is ignored. Relative paths resolve against the
 * process working directory.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` a valid pointer.
 */
enum MsqStatus msq_run_config_json(const char *json, struct MsqResult **out);

/**
 * Number of final energies, or 0 for a null handle.
 *
 * # Safety
 * `r` must come from `msq_run_config_json` or be null.
 */
size_t msq_result_n_energies(const struct MsqResult *r);

/**
 * # Safety
 * `r` must come from `msq_run_config_json`; `out` must be valid.
 */
enum MsqStatus msq_result_energy(const struct MsqResult *r, size_t index, double *out);

/**
 * Trajectory CSV; owned by the handle.
 *
 * # Safety
 * `r` must come from `msq_run_config_json` or be null.
 */
const char *msq_result_trajectory_csv(const struct MsqResult *r);

/**
 * JSON summary; owned by the handle.
 *
 * # Safety
 * `r` must come from `msq_run_config_json` or be null.
 */
const char *msq_result_summary_json(const struct MsqResult *r);

/**
 * # Safety
 * `r` must come from `msq_run_config_json` or be null.
 */
void msq_result_free(struct MsqResult *r);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MSQITE_H */
