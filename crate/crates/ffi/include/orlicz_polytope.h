#ifndef ORLICZ_POLYTOPE_H
#define ORLICZ_POLYTOPE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stddef.h>
#include <stdint.h>

/**
 * Result code of every fallible call.
 */
typedef enum OpStatus {
  OP_STATUS_OK = 0,
  OP_STATUS_DOMAIN = 1,
  OP_STATUS_ACCURACY = 2,
  OP_STATUS_DEGENERATE_PARAMETER = 3,
  OP_STATUS_RANGE = 4,
  OP_STATUS_PRECONDITION = 5,
  OP_STATUS_ESTIMATION = 6,
  OP_STATUS_NULL_POINTER = 7,
  OP_STATUS_PANIC = 8,
} OpStatus;

/**
 * Opaque handle to a body `B_p^n` or `D_p^n`.
 */
typedef struct OpBody OpBody;

/**
 * Opaque handle to an Orlicz function.
 */
typedef struct OpOrlicz OpOrlicz;

/**
 * Monte Carlo summary of `max_i |<X_i, θ>|` over independent polytopes.
 */
typedef struct OpMcSummary {
  double mean;
  double sd;
  double ci_low;
  double ci_high;
  size_t trials;
} OpMcSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *op_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *op_version(void);

enum OpStatus op_log_gamma(double x, double *out);

/**
 * Volume of the unit ball `B_p^n`.
 */
enum OpStatus op_ball_volume(double p, size_t n, double *out);

/**
 * `B_p^n`, or the volume-one `D_p^n` when `normalized` is nonzero.
 */
enum OpStatus op_body_new(double p, size_t n, int32_t normalized, struct OpBody **out);

void op_body_free(struct OpBody *body);

/**
 * `h_K(θ)` for `θ` of length `len`, normalized internally.
 */
enum OpStatus op_support_function(const struct OpBody *body,
                                  const double *theta,
                                  size_t len,
                                  double *out);

/**
 * `t ↦ t^q`.
 */
enum OpStatus op_orlicz_power(double q, struct OpOrlicz **out);

/**
 * Coordinate Orlicz function of `D_p^n` (first closed form, `n >= 2`).
 */
enum OpStatus op_orlicz_pball(double p, size_t n, struct OpOrlicz **out);

/**
 * Average over the sphere of the Orlicz functions of `<θ, e_1>`.
 */
enum OpStatus op_orlicz_spherical(size_t n, struct OpOrlicz **out);

/**
 * Orlicz function of the empirical law of `|values|`.
 */
enum OpStatus op_orlicz_empirical(const double *values, size_t len, struct OpOrlicz **out);

void op_orlicz_free(struct OpOrlicz *m);

enum OpStatus op_orlicz_eval(const struct OpOrlicz *m, double t, double *out);

/**
 * The least `s > 0` with `M(1/s) <= 1/N`, the Orlicz estimate of
 * `E max_{i<=N} |X_i|`.
 */
enum OpStatus op_orlicz_invert(const struct OpOrlicz *m, uint64_t n_points, double *out);

enum OpStatus op_luxemburg_norm(const double *x, size_t len, const struct OpOrlicz *m, double *out);

/**
 * Orlicz estimate of `E h_{K_N}(θ)`.
 */
enum OpStatus op_expected_support_orlicz(const struct OpBody *body,
                                         const double *theta,
                                         size_t len,
                                         uint64_t n_points,
                                         double *out);

/**
 * Monte Carlo value of `E h_{K_N}(θ)` from `trials` seeded polytopes.
 */
enum OpStatus op_expected_support_mc(const struct OpBody *body,
                                     const double *theta,
                                     size_t len,
                                     uint64_t n_points,
                                     size_t trials,
                                     uint64_t seed,
                                     struct OpMcSummary *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ORLICZ_POLYTOPE_H */
