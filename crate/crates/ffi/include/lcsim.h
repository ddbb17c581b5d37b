/* Copyright 2026 The lcsim Developers */
/* SPDX-License-Identifier: Apache-2.0 */

#ifndef LCSIM_H
#define LCSIM_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes. Values 1 to 12 match the library error kinds.
 */
typedef enum LcsimStatus {
  LCSIM_STATUS_OK = 0,
  LCSIM_STATUS_SIZE = 1,
  LCSIM_STATUS_VALIDITY = 2,
  LCSIM_STATUS_SHAPE = 3,
  LCSIM_STATUS_DOMAIN = 4,
  LCSIM_STATUS_INDEX = 5,
  LCSIM_STATUS_CONDITIONING = 6,
  LCSIM_STATUS_NORMALIZATION = 7,
  LCSIM_STATUS_PARSE = 8,
  LCSIM_STATUS_INTEGRATION = 9,
  LCSIM_STATUS_OPTIMIZATION = 10,
  LCSIM_STATUS_TOMOGRAPHY = 11,
  LCSIM_STATUS_IO = 12,
  LCSIM_STATUS_NULL_POINTER = 13,
  LCSIM_STATUS_INVALID_STRING = 14,
  LCSIM_STATUS_PANIC = 15,
} LcsimStatus;

typedef enum LcsimGateSet {
  LCSIM_GATE_SET_CZ = 0,
  LCSIM_GATE_SET_CX = 1,
} LcsimGateSet;

/**
 * Opaque outcome distribution.
 */
typedef struct LcsimDist LcsimDist;

/**
 * Opaque per-qubit readout model.
 */
typedef struct LcsimReadout LcsimReadout;

/**
 * Opaque statevector.
 */
typedef struct LcsimState LcsimState;

/**
 * Certification summary.
 */
typedef struct LcsimWitnessResult {
  size_t n_qubits;
  double fidelity_bound;
  double sigma_shot;
  double sigma_transition;
  double sigma_total;
  double n_sigma_above_half;
  double ci95_low;
  double ci95_high;
  double z;
  bool gme_certified;
} LcsimWitnessResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL. Valid until the next
 * failing call on the same thread.
 */
const char *lcsim_last_error(void);

void lcsim_clear_error(void);

/**
 * Static, NUL-terminated version string.
 */
const char *lcsim_version(void);

/**
 * Prepares the ideal linear cluster state on `n_qubits` qubits.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
enum LcsimStatus lcsim_state_new_lc(size_t n_qubits,
                                    enum LcsimGateSet gate_set,
                                    struct LcsimState **out);

/**
 * # Safety
 * `state` must be NULL or a handle from this library that has not been freed.
 */
void lcsim_state_free(struct LcsimState *state);

/**
 * # Safety
 * `state` must be a live handle; `out` must be writable.
 */
enum LcsimStatus lcsim_state_n_qubits(const struct LcsimState *state, size_t *out);

/**
 * Outcome distribution after rotating each qubit into the basis named by `basis`, a
 * word over `X` and `Z` written for qubit 0 first.
 *
 * # Safety
 * `state` must be a live handle, `basis` a NUL-terminated string, `out` writable.
 */
enum LcsimStatus lcsim_state_measure(const struct LcsimState *state,
                                     const char *basis,
                                     struct LcsimDist **out);

/**
 * Distribution over `2^n_qubits` outcomes; `probs` must sum to one.
 *
 * # Safety
 * `probs` must point to `len` readable doubles; `out` must be writable.
 */
enum LcsimStatus lcsim_dist_new(size_t n_qubits,
                                const double *probs,
                                size_t len,
                                struct LcsimDist **out);

/**
 * Ideal distributions of the two witness settings.
 *
 * # Safety
 * `out_xz` and `out_zx` must be writable.
 */
enum LcsimStatus lcsim_ideal_distributions(size_t n_qubits,
                                           struct LcsimDist **out_xz,
                                           struct LcsimDist **out_zx);

/**
 * # Safety
 * `dist` must be NULL or a live handle.
 */
void lcsim_dist_free(struct LcsimDist *dist);

/**
 * Number of outcomes, `2^n`.
 *
 * # Safety
 * `dist` must be a live handle; `out` writable.
 */
enum LcsimStatus lcsim_dist_len(const struct LcsimDist *dist, size_t *out);

/**
 * Copies the probabilities into `buf`, which must hold exactly `2^n` entries.
 *
 * # Safety
 * `dist` must be a live handle; `buf` must point to `len` writable doubles.
 */
enum LcsimStatus lcsim_dist_copy(const struct LcsimDist *dist, double *buf, size_t len);

/**
 * Draws `shots` outcomes; `counts` receives `2^n` tallies.
 *
 * # Safety
 * `dist` must be a live handle; `counts` must point to `len` writable integers.
 */
enum LcsimStatus lcsim_dist_sample(const struct LcsimDist *dist,
                                   uint64_t shots,
                                   uint64_t seed,
                                   uint64_t *counts,
                                   size_t len);

/**
 * Readout model from per-qubit assignment fidelities.
 *
 * # Safety
 * `f00` and `f11` must each point to `n_qubits` readable doubles; `out` writable.
 */
enum LcsimStatus lcsim_readout_new(size_t n_qubits,
                                   const double *f00,
                                   const double *f11,
                                   struct LcsimReadout **out);

/**
 * Readout model for device qubits `[offset, offset + n_qubits)` of a calibration TOML.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` writable.
 */
enum LcsimStatus lcsim_readout_from_device(const char *path,
                                           size_t offset,
                                           size_t n_qubits,
                                           struct LcsimReadout **out);

/**
 * # Safety
 * `readout` must be NULL or a live handle.
 */
void lcsim_readout_free(struct LcsimReadout *readout);

/**
 * Distribution reported by the noisy detector.
 *
 * # Safety
 * Handles must be live; `out` writable.
 */
enum LcsimStatus lcsim_apply_readout_noise(const struct LcsimDist *dist,
                                           const struct LcsimReadout *readout,
                                           struct LcsimDist **out);

/**
 * Inverse readout; entries may come out negative.
 *
 * # Safety
 * Handles must be live; `out` writable.
 */
enum LcsimStatus lcsim_mitigate(const struct LcsimDist *dist,
                                const struct LcsimReadout *readout,
                                struct LcsimDist **out);

/**
 * Fidelity lower bound from the (mitigated) XZ and ZX distributions.
 *
 * # Safety
 * Handles must be live; `out` writable.
 */
enum LcsimStatus lcsim_fidelity_bound(const struct LcsimDist *xz,
                                      const struct LcsimDist *zx,
                                      double *out);

/**
 * Shot-noise sigma of the mitigated bound, from the raw measured distributions.
 *
 * # Safety
 * Handles must be live; `out` writable.
 */
enum LcsimStatus lcsim_shot_noise_sigma(const struct LcsimDist *raw_xz,
                                        const struct LcsimDist *raw_zx,
                                        const struct LcsimReadout *readout,
                                        uint64_t shots,
                                        double *out);

/**
 * Certifies genuine multipartite entanglement when `bound - z * sigma_total > 0.5`.
 *
 * # Safety
 * `out` must be writable.
 */
enum LcsimStatus lcsim_certify(size_t n_qubits,
                               double bound,
                               double sigma_shot,
                               double sigma_transition,
                               double z,
                               struct LcsimWitnessResult *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LCSIM_H */
