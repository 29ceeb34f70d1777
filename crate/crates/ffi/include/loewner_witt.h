#ifndef LOEWNER_WITT_H
#define LOEWNER_WITT_H

#include <stddef.h>
#include <stdint.h>

/*
 Status codes returned by every fallible call.
 */
typedef enum LwStatus {
  LW_STATUS_OK = 0,
  LW_STATUS_NULL_POINTER = 1,
  LW_STATUS_INVALID_ARGUMENT = 2,
  LW_STATUS_NUMERICAL = 3,
  LW_STATUS_OUT_OF_RANGE = 4,
  LW_STATUS_PANIC = 5,
} LwStatus;

/*
 Trajectory of the coefficient flow.
 */
typedef struct LwTrajectory LwTrajectory;

/*
 Summary of a Monte-Carlo martingale run.
 */
typedef struct LwMartingaleSummary {
  /*
   `|mean F(k_T) - F(z0)|` in standard errors at the final time.
   */
  double final_deviation;
  /*
   Largest deviation over all checkpoints, in standard errors.
   */
  double max_deviation;
  double swallowed_fraction;
  double mean_re;
  double mean_im;
  double std_error;
} LwMartingaleSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Copies the calling thread's last error message into `buf`, truncated and
 NUL-terminated. Returns the full message length in bytes, excluding the
 terminator.

 # Safety
 `buf` must be null or point to `cap` writable bytes.
 */
size_t lw_last_error(char *buf, size_t cap);

/*
 Library version as a static NUL-terminated string.
 */
const char *lw_version(void);

/*
 Integrates the coefficient flow from the identity map with the constant
 driving function `p(z) = Σ p_k z^k` (`p_0` must be 1) using RK4.

 # Safety
 `p_re` and `p_im` must point to `p_len` doubles; `out` must be writable.
 */
enum LwStatus lw_evolve_constant(size_t n,
                                 const double *p_re,
                                 const double *p_im,
                                 size_t p_len,
                                 double dt,
                                 double t_end,
                                 struct LwTrajectory **out);

/*
 Number of stored samples, or 0 for a null handle.

 # Safety
 `h` must be null or a live handle.
 */
size_t lw_trajectory_len(const struct LwTrajectory *h);

/*
 Number of coefficients per sample, or 0 for a null handle.

 # Safety
 `h` must be null or a live handle.
 */
size_t lw_trajectory_dim(const struct LwTrajectory *h);

/*
 Copies sample `i`: its time and `c_1..c_n` into arrays of length `n`.

 # Safety
 `h` must be a live handle; the output pointers must be writable for the
 stated lengths.
 */
enum LwStatus lw_trajectory_sample(const struct LwTrajectory *h,
                                   size_t i,
                                   double *t,
                                   double *c_re,
                                   double *c_im,
                                   size_t n);

/*
 Releases a trajectory. Null is ignored.

 # Safety
 `h` must be null or a handle not yet freed.
 */
void lw_trajectory_free(struct LwTrajectory *h);

/*
 Largest residual of `[L_m, L_k] - (k-m) L_{m+k}` over all pairs with
 `m + k <= n`. Zero when the identity holds exactly.

 # Safety
 `max_residual` must be writable.
 */
enum LwStatus lw_witt_check(size_t n, double *max_residual);

/*
 Central charge and conformal weight attached to `kappa`.

 # Safety
 `c` and `h` must be writable.
 */
enum LwStatus lw_charge_weight(double kappa, double *c, double *h);

/*
 Closed-form chordal map `sqrt(z^2 + 4t)` on the upper branch.

 # Safety
 `g_re` and `g_im` must be writable.
 */
enum LwStatus lw_chordal_map(double z_re, double z_im, double t, double *g_re, double *g_im);

/*
 Runs the martingale test for `F(z) = Σ a_j z^{α_j}` along chordal SLE
 started at `z0`. Fails with `InvalidArgument` when `F` is not drift-less.
 Results do not depend on the number of worker threads.

 # Safety
 The coefficient and power arrays must hold `terms` doubles each; `out`
 must be writable.
 */
enum LwStatus lw_sle_martingale(double kappa,
                                double dt,
                                double horizon,
                                size_t n_paths,
                                uint64_t seed,
                                double z0_re,
                                double z0_im,
                                const double *coeff_re,
                                const double *coeff_im,
                                const double *powers,
                                size_t terms,
                                struct LwMartingaleSummary *out);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* LOEWNER_WITT_H */
