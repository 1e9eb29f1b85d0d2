#ifndef WAVEBENCH_H
#define WAVEBENCH_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define WB_OK 0

#define WB_ERR_NULL 1

#define WB_ERR_INVALID 2

#define WB_ERR_SINGULAR 3

#define WB_ERR_NUMERICAL 4

#define WB_ERR_IO 5

#define WB_ERR_FORMAT 6

#define WB_ERR_PANIC 7

#define WB_IC_POLYNOMIAL 0

#define WB_IC_MOLLIFIER 1

#define WB_IC_SINGLE_MODE 2

#define WB_IC_ZERO 3

#define WB_CN_CENTERED 0

#define WB_CN_LAGGED 1

#define WB_START_TAYLOR 0

#define WB_START_IMPLICIT 1

#define WB_TIME_LINEAR 0

#define WB_TIME_HOLD 1

/**
 * Fitted surrogate.
 */
typedef struct WbModel WbModel;

/**
 * Coarse finite element trajectory.
 */
typedef struct WbTrajectory WbTrajectory;

/**
 * Rectangle `[0, l1] x [0, l2]`, wave speed `c`, final time `t_final`, and a `WB_IC_*` code.
 */
typedef struct {
  double l1;
  double l2;
  double c;
  double t_final;
  int32_t ic;
} WbProblem;

/**
 * Matched coarse resolution.
 */
typedef struct {
  size_t n;
  size_t nt;
  uint64_t dof_cn;
  double dt;
  double mismatch;
  double root;
} WbMatch;

typedef struct {
  size_t n_modes;
  double lambda;
  double edof;
  double gcv_score;
} WbModelInfo;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *wb_version(void);

/**
 * Message for the most recent failure on this thread; empty if none.
 * The pointer stays valid until the next failing call on this thread.
 */
const char *wb_last_error(void);

/**
 * Unit square, `c = 1`, `T = 1`.
 */
WbProblem wb_problem_unit_square(int32_t ic);

/**
 * Coarse resolution whose DoF best matches `dof_ep`.
 */
int32_t wb_match_dof(double dof_ep, double t_final, WbMatch *out);

/**
 * Fits the surrogate to the initial condition of `problem` from `samples`
 * Latin hypercube points. A negative `lambda` selects it by GCV over the
 * default grid.
 */
int32_t wb_model_fit(const WbProblem *problem,
                     size_t n_modes,
                     size_t samples,
                     uint64_t seed,
                     double lambda,
                     WbModel **out);

/**
 * Loads a model from its JSON form.
 */
int32_t wb_model_from_json(const char *json, WbModel **out);

/**
 * Writes the model's JSON form into `buf` (NUL-terminated) when it fits.
 * `needed` always receives the required size including the terminator.
 */
int32_t wb_model_to_json(const WbModel *model, char *buf, size_t len, size_t *needed);

int32_t wb_model_info(const WbModel *model, WbModelInfo *out);

int32_t wb_model_predict(const WbModel *model, double x, double y, double t, double *out);

/**
 * Evaluates `count` points `(xs[i], ys[i], ts[i])` into `out[i]`.
 */
int32_t wb_model_predict_many(const WbModel *model,
                              const double *xs,
                              const double *ys,
                              const double *ts,
                              size_t count,
                              double *out);

void wb_model_free(WbModel *model);

/**
 * Solves on an `n x n` mesh with `nt` steps up to `problem.t_final`.
 * `variant` is a `WB_CN_*` code and `start` a `WB_START_*` code.
 */
int32_t wb_fem_solve(const WbProblem *problem,
                     size_t n,
                     size_t nt,
                     int32_t variant,
                     int32_t start,
                     WbTrajectory **out);

/**
 * Number of stored time levels (`nt + 1`).
 */
int32_t wb_trajectory_levels(const WbTrajectory *traj, size_t *out);

/**
 * Value at `(x, y, t)`; `sampling` is a `WB_TIME_*` code.
 */
int32_t wb_trajectory_eval(const WbTrajectory *traj,
                           double x,
                           double y,
                           double t,
                           int32_t sampling,
                           double *out);

void wb_trajectory_free(WbTrajectory *traj);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* WAVEBENCH_H */
