#ifndef RUINLAB_H
#define RUINLAB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum RlConstantMode {
  RL_CONSTANT_MODE_PAPER_VERBATIM = 0,
  RL_CONSTANT_MODE_HALF_CORRECTION = 1,
} RlConstantMode;

typedef enum RlEstimator {
  RL_ESTIMATOR_DIRECT = 0,
  RL_ESTIMATOR_LADDER = 1,
  RL_ESTIMATOR_WORKLOAD = 2,
} RlEstimator;

/**
 * Result code of every call.
 */
typedef enum RlStatus {
  RL_STATUS_OK = 0,
  RL_STATUS_NULL_POINTER = 1,
  RL_STATUS_INVALID_ARGUMENT = 2,
  RL_STATUS_NET_PROFIT = 3,
  RL_STATUS_UNSUPPORTED_FAMILY = 4,
  RL_STATUS_NUMERIC = 5,
  RL_STATUS_STEP_CAP = 6,
  RL_STATUS_PANIC = 7,
} RlStatus;

/**
 * Opaque risk model: claim law plus Poisson rate, unit premium.
 */
typedef struct RlModel RlModel;

/**
 * Terms of the second-order expansion.
 */
typedef struct RlApprox {
  double term1;
  double term2;
  double term3;
  double total;
  double psi_u;
} RlApprox;

typedef struct RlMcConfig {
  uint64_t n;
  uint64_t seed;
  uint32_t workers;
} RlMcConfig;

/**
 * Bernoulli Monte Carlo estimate. `has_wilson` is nonzero when the
 * estimate is below 1e-5 and `wilson_lo`/`wilson_hi` hold a 95% interval;
 * otherwise both are zero.
 */
typedef struct RlEstimate {
  double value;
  double std_error;
  uint64_t n;
  int32_t has_wilson;
  double wilson_lo;
  double wilson_hi;
  double residual_bound;
} RlEstimate;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failing call on this thread, or NULL. Valid until
 * the next failing call on the same thread.
 */
const char *rl_last_error_message(void);

/**
 * Static description of a status code.
 */
const char *rl_status_string(enum RlStatus status);

/**
 * Lomax(alpha, theta) claims with Poisson rate `lambda`. Requires
 * `alpha > 2` and `lambda * theta / (alpha - 1) < 1`.
 */
enum RlStatus rl_model_new_lomax(double alpha, double theta, double lambda, struct RlModel **out);

/**
 * Exponential(rate) claims. Simulation only; the asymptotic functions
 * return `UnsupportedFamily`.
 */
enum RlStatus rl_model_new_exponential(double rate, double lambda, struct RlModel **out);

/**
 * Releases a model. NULL is a no-op.
 *
 * # Safety
 * `model` must come from an `rl_model_new_*` call and not be freed twice.
 */
void rl_model_free(struct RlModel *model);

/**
 * `ρ = λμ`.
 *
 * # Safety
 * `model` must be a live handle and `out` writable.
 */
enum RlStatus rl_model_rho(const struct RlModel *model, double *out);

/**
 * Claim survival function `F̄(x)`.
 *
 * # Safety
 * `model` must be a live handle and `out` writable.
 */
enum RlStatus rl_claim_tail(const struct RlModel *model, double x, double *out);

/**
 * Integrated-tail survival function `F̄₀(x)`.
 *
 * # Safety
 * `model` must be a live handle and `out` writable.
 */
enum RlStatus rl_integrated_tail(const struct RlModel *model, double x, double *out);

/**
 * Laplace exponent `κ(s) = s + λ(F̂(s) − 1)` for real `s >= 0`.
 *
 * # Safety
 * `model` must be a live handle and `out` writable.
 */
enum RlStatus rl_kappa(const struct RlModel *model, double s, double *out);

/**
 * Inverse of `κ` on `[0, ∞)`.
 *
 * # Safety
 * `model` must be a live handle and `out` writable.
 */
enum RlStatus rl_kappa_inverse(const struct RlModel *model, double s, double *out);

/**
 * First-order approximation of `ψ(u, xu)`.
 *
 * # Safety
 * `model` must be a live handle and `out` writable.
 */
enum RlStatus rl_first_order_psi(const struct RlModel *model, double u, double x, double *out);

/**
 * `ρF̄₀(u)/(1−ρ)`.
 *
 * # Safety
 * `model` must be a live handle and `out` writable.
 */
enum RlStatus rl_infinite_ruin_asymptotic(const struct RlModel *model, double u, double *out);

/**
 * Busy-period Laplace transform at `s = re + i·im`, `re >= 0`.
 *
 * # Safety
 * `model` must be a live handle; `out_re` and `out_im` writable.
 */
enum RlStatus rl_busy_period_transform(const struct RlModel *model,
                                       double re,
                                       double im,
                                       double *out_re,
                                       double *out_im);

/**
 * Second-order expansion terms. A finite `psi_u` is used as the `ψ(u)`
 * plug-in; NaN selects the asymptotic plug-in `ρF̄₀(u)/(1−ρ)`.
 *
 * # Safety
 * `model` must be a live handle and `out` writable.
 */
enum RlStatus rl_second_order_psi(const struct RlModel *model,
                                  double u,
                                  double x,
                                  enum RlConstantMode constant_mode,
                                  double psi_u,
                                  struct RlApprox *out);

/**
 * Monte Carlo estimate of the finite-horizon ruin probability `ψ(u, t)`.
 *
 * # Safety
 * `model` and `config` must be valid; `out` writable.
 */
enum RlStatus rl_estimate_finite_ruin(const struct RlModel *model,
                                      double u,
                                      double t,
                                      enum RlEstimator estimator,
                                      const struct RlMcConfig *config,
                                      struct RlEstimate *out);

/**
 * Monte Carlo estimate of the infinite-horizon ruin probability `ψ(u)`.
 *
 * # Safety
 * `model` and `config` must be valid; `out` writable.
 */
enum RlStatus rl_estimate_infinite_ruin(const struct RlModel *model,
                                        double u,
                                        const struct RlMcConfig *config,
                                        struct RlEstimate *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RUINLAB_H */
