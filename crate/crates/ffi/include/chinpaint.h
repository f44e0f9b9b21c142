#ifndef CHINPAINT_H
#define CHINPAINT_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum ChStatus {
  CH_STATUS_OK = 0,
  /**
   * A required pointer was null or a string was not UTF-8.
   */
  CH_STATUS_NULL_POINTER = 1,
  CH_STATUS_INVALID_ARGUMENT = 2,
  CH_STATUS_DIMENSION_MISMATCH = 3,
  CH_STATUS_NON_FINITE = 4,
  CH_STATUS_IO = 5,
  CH_STATUS_FORMAT = 6,
  /**
   * The run finished its step budget above `tol`; outputs are still set.
   */
  CH_STATUS_NOT_CONVERGED = 7,
  CH_STATUS_PANIC = 8,
} ChStatus;

typedef enum ChNoise {
  CH_NOISE_GAUSSIAN = 0,
  CH_NOISE_UNIFORM = 1,
} ChNoise;

typedef struct ChField ChField;

typedef struct ChModeStack ChModeStack;

/**
 * Time-stepping parameters. Non-positive `c1`/`c2` select the defaults
 * `3/eps` and `lambda0`.
 */
typedef struct ChSolverParams {
  double dt;
  double c1;
  double c2;
  size_t max_steps;
  double tol;
} ChSolverParams;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. Valid until
 * the next failing call on the same thread.
 */
const char *ch_last_error(void);

struct ChSolverParams ch_solver_params_default(void);

/**
 * Copies `width * height` row-major values into a new field.
 *
 * # Safety
 * `values` must point to `width * height` readable doubles.
 */
enum ChStatus ch_field_new(size_t width, size_t height, const double *values, struct ChField **out);

/**
 * # Safety
 * `field` must come from this library and not be freed twice.
 */
void ch_field_free(struct ChField *field);

/**
 * # Safety
 * `field` must be a live field or null.
 */
size_t ch_field_width(const struct ChField *field);

/**
 * # Safety
 * `field` must be a live field or null.
 */
size_t ch_field_height(const struct ChField *field);

/**
 * Copies the values out; `len` must equal `width * height`.
 *
 * # Safety
 * `out` must point to `len` writable doubles.
 */
enum ChStatus ch_field_values(const struct ChField *field, double *out, size_t len);

/**
 * # Safety
 * `path` must be a NUL-terminated string.
 */
enum ChStatus ch_load_image(const char *path, struct ChField **out);

/**
 * Loads a mask for an image of the given size: pixel 0 is unknown.
 *
 * # Safety
 * `path` must be a NUL-terminated string.
 */
enum ChStatus ch_load_mask(const char *path, size_t width, size_t height, struct ChField **out);

/**
 * Writes a binary PGM clamped to `[0, 1]`, 16-bit when `sixteen_bit` is nonzero.
 *
 * # Safety
 * `path` must be a NUL-terminated string.
 */
enum ChStatus ch_write_image(const struct ChField *field, const char *path, int sixteen_bit);

/**
 * # Safety
 * `path` must be a NUL-terminated string.
 */
enum ChStatus ch_write_dump(const struct ChField *field, const char *path);

/**
 * # Safety
 * `path` must be a NUL-terminated string.
 */
enum ChStatus ch_read_dump(const char *path, struct ChField **out);

/**
 * Deterministic inpainting from `u = f`. On `NotConverged` the result is
 * still stored in `out`.
 *
 * # Safety
 * Pointers must be live objects from this library; `steps` may be null.
 */
enum ChStatus ch_inpaint(const struct ChField *f,
                         const struct ChField *mask,
                         double lambda0,
                         double eps,
                         const struct ChSolverParams *params,
                         struct ChField **out,
                         size_t *steps);

/**
 * Stochastic Galerkin run for `u⁰ = f + Z`, `Z ~ N(0, sigma²)`.
 *
 * # Safety
 * Pointers must be live objects from this library.
 */
enum ChStatus ch_galerkin(const struct ChField *f,
                          const struct ChField *mask,
                          double lambda0,
                          double eps,
                          double sigma,
                          size_t order,
                          const struct ChSolverParams *params,
                          struct ChModeStack **out);

/**
 * # Safety
 * `stack` must come from this library and not be freed twice.
 */
void ch_mode_stack_free(struct ChModeStack *stack);

/**
 * Number of modes `N + 1`, or 0 for null.
 *
 * # Safety
 * `stack` must be a live stack or null.
 */
size_t ch_mode_stack_len(const struct ChModeStack *stack);

/**
 * Copy of mode `k`.
 *
 * # Safety
 * `stack` must be a live stack.
 */
enum ChStatus ch_mode_stack_mode(const struct ChModeStack *stack, size_t k, struct ChField **out);

/**
 * Mean and variance fields of the expansion; either out-pointer may be null.
 *
 * # Safety
 * `stack` must be a live stack.
 */
enum ChStatus ch_mode_stack_moments(const struct ChModeStack *stack,
                                    struct ChField **mean,
                                    struct ChField **variance);

/**
 * First-order perturbation run for `Z ~ U(0, delta)`: mean
 * `u₀ + (δ/2)u₁` and first-order variance.
 *
 * # Safety
 * Pointers must be live objects from this library; `variance` may be null.
 */
enum ChStatus ch_perturbation(const struct ChField *f,
                              const struct ChField *mask,
                              double lambda0,
                              double eps,
                              double delta,
                              const struct ChSolverParams *params,
                              struct ChField **mean,
                              struct ChField **variance);

/**
 * Monte Carlo over `samples` noisy initial images, each advanced exactly
 * `steps` steps. `scale` is σ for Gaussian noise and δ for uniform.
 *
 * # Safety
 * Pointers must be live objects from this library; `variance` may be null.
 */
enum ChStatus ch_monte_carlo(const struct ChField *f,
                             const struct ChField *mask,
                             double lambda0,
                             double eps,
                             enum ChNoise noise,
                             double scale,
                             size_t samples,
                             uint64_t seed,
                             const struct ChSolverParams *params,
                             size_t steps,
                             struct ChField **mean,
                             struct ChField **variance);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CHINPAINT_H */
