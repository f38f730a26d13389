#ifndef HERMITE_VLASOV_H
#define HERMITE_VLASOV_H

/* Generated by cbindgen. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every call.
 */
typedef enum {
  HV_STATUS_OK = 0,
  HV_STATUS_NULL_POINTER = 1,
  HV_STATUS_INVALID_UTF8 = 2,
  HV_STATUS_CONFIG = 3,
  HV_STATUS_INVALID_ARGUMENT = 4,
  /**
   * Non-finite state, singular field solve or similar solver failure.
   */
  HV_STATUS_NUMERICAL = 5,
  HV_STATUS_BUFFER_TOO_SMALL = 6,
  HV_STATUS_PANIC = 7,
} HvStatus;

/**
 * Opaque simulation handle.
 */
typedef struct HvSimulation HvSimulation;

/**
 * Invariants and field norms at the current time. Deviations are relative
 * to `t = 0`; the momentum deviation is scaled by initial mass times `v_th`.
 */
typedef struct {
  double t;
  uint64_t step_index;
  double mass;
  double momentum;
  double energy;
  double mass_dev;
  double momentum_dev;
  double energy_dev;
  double e_l2;
  double e_max;
} HvDiagnostics;

/**
 * Sizes needed to copy coefficients out of a handle.
 */
typedef struct {
  size_t n_modes;
  size_t n_cells;
  /**
   * Legendre coefficients per cell (degree + 1).
   */
  size_t n_basis;
} HvLayout;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Creates a simulation from NUL-terminated TOML text and stores the handle
 * in `*out`. Runs single-threaded.
 *
 * # Safety
 * `config_toml` must be a valid C string and `out` a valid pointer.
 */
HvStatus hv_simulation_create(const char *config_toml, HvSimulation **out);

/**
 * Releases a handle. Null is ignored.
 *
 * # Safety
 * `sim` must come from [`hv_simulation_create`] and not be used afterwards.
 */
void hv_simulation_free(HvSimulation *sim);

/**
 * Takes one step of size `dt`; `dt <= 0` uses the CFL step.
 *
 * # Safety
 * `sim` must be a live handle.
 */
HvStatus hv_simulation_step(HvSimulation *sim, double dt);

/**
 * Advances to exactly `t_end`.
 *
 * # Safety
 * `sim` must be a live handle.
 */
HvStatus hv_simulation_advance_to(HvSimulation *sim, double t_end);

/**
 * # Safety
 * `sim` must be a live handle and `out` a valid pointer.
 */
HvStatus hv_simulation_time(const HvSimulation *sim, double *out);

/**
 * # Safety
 * `sim` must be a live handle and `out` a valid pointer.
 */
HvStatus hv_simulation_diagnostics(const HvSimulation *sim, HvDiagnostics *out);

/**
 * # Safety
 * `sim` must be a live handle and `out` a valid pointer.
 */
HvStatus hv_simulation_layout(const HvSimulation *sim, HvLayout *out);

/**
 * Copies the coefficients of Hermite mode `mode` (cell-major,
 * `n_cells * n_basis` values) into `buf`.
 *
 * # Safety
 * `sim` must be a live handle and `buf` valid for `len` writes.
 */
HvStatus hv_simulation_copy_mode(const HvSimulation *sim, size_t mode, double *buf, size_t len);

/**
 * Message for the last failed call on this thread, or null. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *hv_last_error_message(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HERMITE_VLASOV_H */
