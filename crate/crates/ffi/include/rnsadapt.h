#ifndef RNSADAPT_H
#define RNSADAPT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes.
 */
typedef enum RnsStatus {
  RNS_STATUS_OK = 0,
  /**
   * The simulation has already emitted its final row.
   */
  RNS_STATUS_FINISHED = 1,
  RNS_STATUS_NULL_POINTER = 2,
  RNS_STATUS_INVALID_ARGUMENT = 3,
  RNS_STATUS_CONFIG = 4,
  RNS_STATUS_INVALID_MODEL = 5,
  RNS_STATUS_SINGULARITY = 6,
  RNS_STATUS_DIVERGENCE = 7,
  RNS_STATUS_IO = 8,
  RNS_STATUS_PANIC = 9,
} RnsStatus;

/**
 * Opaque simulation handle.
 */
typedef struct RnsSimulation RnsSimulation;

/**
 * One trace row; see the CSV column list for meanings and units.
 */
typedef struct RnsRow {
  double t;
  double theta_b;
  double attitude_error;
  double omega_b;
  double phi[3];
  double phi_dot_cmd[3];
  double x[2];
  double x_d[2];
  double dx[2];
  double dx_dot[2];
  double s_b;
  double s_x[2];
  double y1;
  double y2[2];
  double a_d_hat[11];
  double a_k_hat[6];
  double hb_hat;
  double momentum_drift;
  double linear_momentum_drift;
  double cm_drift;
  uint64_t guard_hb;
  uint64_t guard_hbm;
} RnsRow;

typedef struct RnsState {
  double theta_b;
  double base_cm_pos[2];
  double phi[3];
  double omega_b;
  double base_cm_vel[2];
  double phi_dot[3];
} RnsState;

/**
 * Conserved momenta of a run.
 */
typedef struct RnsMomenta {
  /**
   * Angular momentum about the system CM, kg m^2/s.
   */
  double p0;
  /**
   * System CM velocity, m/s.
   */
  double v0[2];
  /**
   * Linear momentum, kg m/s.
   */
  double linear[2];
} RnsMomenta;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Creates a simulation from a preset (`reference`, `paper-fig2-4`, `theorem1`,
 * `zero-reaction`). `run_index` picks the run for presets with several.
 *
 * # Safety
 * `name` must be a valid NUL-terminated string and `out` a valid pointer.
 */
enum RnsStatus rns_simulation_new_preset(const char *name,
                                         size_t run_index,
                                         struct RnsSimulation **out);

/**
 * Creates a simulation from TOML scenario text.
 *
 * # Safety
 * `toml` must be a valid NUL-terminated string and `out` a valid pointer.
 */
enum RnsStatus rns_simulation_new_toml(const char *toml, struct RnsSimulation **out);

/**
 * Emits the next row into `row` (may be null). Returns `RNS_STATUS_FINISHED`
 * once the final row has been emitted.
 *
 * # Safety
 * `sim` must come from one of the constructors; `row` must be null or valid.
 */
enum RnsStatus rns_simulation_step(struct RnsSimulation *sim, struct RnsRow *row);

/**
 * Steps to the end. Writes the number of rows emitted to `rows` and the last
 * row to `last`; both may be null.
 *
 * # Safety
 * As for `rns_simulation_step`; `rows` must be null or valid.
 */
enum RnsStatus rns_simulation_run(struct RnsSimulation *sim, uint64_t *rows, struct RnsRow *last);

/**
 * Current pose and velocities.
 *
 * # Safety
 * `sim` must come from one of the constructors and `out` be valid.
 */
enum RnsStatus rns_simulation_state(const struct RnsSimulation *sim, struct RnsState *out);

/**
 * Time of the next row, s.
 *
 * # Safety
 * `sim` must come from one of the constructors and `out` be valid.
 */
enum RnsStatus rns_simulation_time(const struct RnsSimulation *sim, double *out);

/**
 * Momenta fixed by the initial state.
 *
 * # Safety
 * `sim` must come from one of the constructors and `out` be valid.
 */
enum RnsStatus rns_simulation_momenta(const struct RnsSimulation *sim, struct RnsMomenta *out);

/**
 * Releases a simulation. Null is ignored.
 *
 * # Safety
 * `sim` must be null or come from one of the constructors, and must not be
 * used afterwards.
 */
void rns_simulation_free(struct RnsSimulation *sim);

/**
 * Message of the calling thread's most recent failure, or null. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *rns_last_error(void);

/**
 * Library version, static string.
 */
const char *rns_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RNSADAPT_H */
