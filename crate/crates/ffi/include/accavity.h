#ifndef ACCAVITY_H
#define ACCAVITY_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Status codes returned by every fallible call.
typedef enum AccStatus {
  ACC_STATUS_OK = 0,
  ACC_STATUS_NULL_POINTER = 1,
  ACC_STATUS_INVALID_ARGUMENT = 2,
  ACC_STATUS_INVALID_CONFIG = 3,
  ACC_STATUS_CUTOFF = 4,
  ACC_STATUS_SPECIAL_FUNCTION = 5,
  ACC_STATUS_SOLVER = 6,
  ACC_STATUS_INDEX_OUT_OF_RANGE = 7,
  ACC_STATUS_PANIC = 8,
} AccStatus;

// Physical configuration. Opaque.
typedef struct AccConfig AccConfig;

// Energies of one channel from the exact solver, ascending. Opaque.
typedef struct AccSpectrum AccSpectrum;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread, or null. Valid until
// the next call into this library from the same thread.
const char *acc_last_error_message(void);

// Validates and stores a configuration.
//
// # Safety
// `out` must be null or valid for writing one pointer.
enum AccStatus acc_config_new(double m,
                              double mu,
                              double rho,
                              double r_a,
                              double r_b,
                              struct AccConfig **out);

// # Safety
// `cfg` must be null or a handle from [`acc_config_new`] not yet freed.
void acc_config_free(struct AccConfig *cfg);

// Missing phase for spin `s` (+1 or -1).
//
// # Safety
// `cfg` must be a live handle; `out` valid for writing.
enum AccStatus acc_missing_phase(const struct AccConfig *cfg, int32_t s, double *out);

// All exact levels of channel (`ell`, `s`) below `e_max`.
//
// # Safety
// `cfg` must be a live handle; `out` valid for writing one pointer.
enum AccStatus acc_spectrum_solve(const struct AccConfig *cfg,
                                  int64_t ell,
                                  int32_t s,
                                  double phi_override,
                                  double e_max,
                                  struct AccSpectrum **out);

// Number of levels; 0 for a null handle.
//
// # Safety
// `spec` must be null or a live handle.
size_t acc_spectrum_len(const struct AccSpectrum *spec);

// # Safety
// `spec` must be a live handle; `out` valid for writing.
enum AccStatus acc_spectrum_energy(const struct AccSpectrum *spec, size_t n, double *out);

// # Safety
// `spec` must be null or a handle from [`acc_spectrum_solve`] not yet freed.
void acc_spectrum_free(struct AccSpectrum *spec);

// Landau-like level for a vanishing cavity.
//
// # Safety
// `cfg` must be a live handle; `out` valid for writing.
enum AccStatus acc_energy_case2(const struct AccConfig *cfg,
                                int64_t ell,
                                int32_t s,
                                double phi_override,
                                size_t n,
                                double *out);

// Large-phase closed form; `branch` is +1 or -1. Fails with
// [`AccStatus::Cutoff`] above the largest admissible `n`.
//
// # Safety
// `cfg` must be a live handle; `out` valid for writing.
enum AccStatus acc_energy_case1(const struct AccConfig *cfg,
                                int64_t ell,
                                int32_t s,
                                double phi_override,
                                int32_t branch,
                                size_t n,
                                double *out);

// Tricomi's U(a, b; x) for x > 0.
//
// # Safety
// `out` must be valid for writing.
enum AccStatus acc_tricomi_u(double a, double b, double x, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ACCAVITY_H */
