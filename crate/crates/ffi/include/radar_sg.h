#ifndef RADAR_SG_H
#define RADAR_SG_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result of every call. Zero is success.
typedef enum RsgStatus {
  RSG_STATUS_OK = 0,
  RSG_STATUS_NULL_POINTER = 1,
  // Malformed JSON or a field the schema does not know.
  RSG_STATUS_SCHEMA = 2,
  // A parameter outside its domain.
  RSG_STATUS_INVALID_ARGUMENT = 3,
  // Quadrature, inversion or root finding failed.
  RSG_STATUS_NUMERICAL = 4,
  RSG_STATUS_IO = 5,
  // A Rust panic was caught at the boundary.
  RSG_STATUS_PANIC = 6,
} RsgStatus;

// Opaque scenario handle.
typedef struct RsgScenario RsgScenario;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or NULL. The pointer
// stays valid until the next call on the same thread.
const char *rsg_last_error_message(void);

// Parses a scenario from NUL-terminated JSON (same schema as the CLI).
//
// # Safety
// `json` must be a valid C string and `out` a valid pointer.
enum RsgStatus rsg_scenario_from_json(const char *json, struct RsgScenario **out);

// The bundled reference scenario.
//
// # Safety
// `out` must be a valid pointer.
enum RsgStatus rsg_scenario_reference(struct RsgScenario **out);

// Releases a handle. NULL is ignored.
//
// # Safety
// `s` must come from this library and not be used afterwards.
void rsg_scenario_free(struct RsgScenario *s);

// E[I] [W].
//
// # Safety
// Pointers must be valid.
enum RsgStatus rsg_mean_interference(const struct RsgScenario *s, double *out);

// F_I at `n` strictly increasing points `x` [W]. `tolerance` (may be NULL)
// receives the accuracy claimed for each value.
//
// # Safety
// `x` and `cdf` must hold `n` values.
enum RsgStatus rsg_interference_cdf(const struct RsgScenario *s,
                                    const double *x,
                                    size_t n,
                                    double *cdf,
                                    double *tolerance);

// Ranging success probability at `n` ranges [m]. `tolerance` (may be
// NULL) receives the absolute accuracy of the values.
//
// # Safety
// `ranges` and `out` must hold `n` values.
enum RsgStatus rsg_p_success(const struct RsgScenario *s,
                             const double *ranges,
                             size_t n,
                             double *out,
                             double *tolerance);

// Duty cycle maximizing spatial success on the first lane at range `r` [m].
//
// # Safety
// Pointers must be valid.
enum RsgStatus rsg_optimal_duty_cycle(const struct RsgScenario *s, double range_m, double *xi_star);

// Root z₀ of erfc(z) = 2z e^{-z²}/√π.
//
// # Safety
// `out` must be valid.
enum RsgStatus rsg_z0(double tol, double *out);

// Monte-Carlo aggregate interference, one sample per replicate, written to
// `samples[0..replicates]`. `threads == 0` uses every core; the samples do
// not depend on it.
//
// # Safety
// `samples` must hold `replicates` values.
enum RsgStatus rsg_mc_interference(const struct RsgScenario *s,
                                   size_t replicates,
                                   uint64_t seed,
                                   double window_m,
                                   size_t threads,
                                   double *samples);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RADAR_SG_H */
