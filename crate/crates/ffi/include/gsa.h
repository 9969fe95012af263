#ifndef GSA_H
#define GSA_H

#include <stddef.h>
#include <stdint.h>

typedef enum GsaStatus {
  GSA_STATUS_OK = 0,
  GSA_STATUS_INVALID_ARGUMENT = 1,
  GSA_STATUS_DEGENERATE = 2,
  GSA_STATUS_NUMERICAL = 3,
  GSA_STATUS_NULL_POINTER = 4,
  GSA_STATUS_PANIC = 5,
} GsaStatus;

/*
 Toy case selector for `gsa_toycase_game`.
 */
typedef enum GsaToyCase {
  /*
   `Y = X1 + X2`; `X3` correlated to `X1` but unused. `param` is ignored.
   */
  GSA_TOY_CASE_EXOGENOUS = 0,
  /*
   `Y = X1 + param·X2 + X3`; `X2` and `X3` correlated.
   */
  GSA_TOY_CASE_UNBALANCED = 1,
  /*
   `Y = X1 + (1 − param)X2 + X1X2`, `param` in [0, 1].
   */
  GSA_TOY_CASE_INTERACTION = 2,
  /*
   `Y = X1`; `X2` correlated to `X1`. `param` is ignored.
   */
  GSA_TOY_CASE_JOKE = 3,
} GsaToyCase;

/*
 Opaque game handle.
 */
typedef struct GsaGame GsaGame;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Text of the last error on this thread, or an empty string.
 */
const char *gsa_last_error(void);

/*
 Creates a game over `d` players from `len = 2^d` values indexed by
 coalition bitmask. `values[0]` must be 0.

 # Safety
 `values` must point to `len` readable doubles; `out` must be writable.
 */
enum GsaStatus gsa_game_new(size_t d, const double *values, size_t len, struct GsaGame **out);

/*
 Releases a handle. Null is accepted.

 # Safety
 `game` must come from this library and not be freed twice.
 */
void gsa_game_free(struct GsaGame *game);

/*
 # Safety
 `game` must be a live handle and `out` writable.
 */
enum GsaStatus gsa_game_dim(const struct GsaGame *game, size_t *out);

/*
 Value of the coalition with bitmask `coalition`.

 # Safety
 `game` must be a live handle and `out` writable.
 */
enum GsaStatus gsa_game_value(const struct GsaGame *game, uint32_t coalition, double *out);

/*
 New handle holding the dual game `w(A) = v(D) − v(D∖A)`.

 # Safety
 `game` must be a live handle and `out` writable.
 */
enum GsaStatus gsa_game_dual(const struct GsaGame *game, struct GsaGame **out);

/*
 Shapley values into `out[0..d]`.

 # Safety
 `game` must be a live handle and `out` must hold `len` doubles.
 */
enum GsaStatus gsa_shapley(const struct GsaGame *game, double *out, size_t len);

/*
 Proportional values of a game with positive values.

 # Safety
 `game` must be a live handle and `out` must hold `len` doubles.
 */
enum GsaStatus gsa_proportional_values(const struct GsaGame *game, double *out, size_t len);

/*
 Proportional values extended to nonnegative games; values `<= tau` are null.

 # Safety
 `game` must be a live handle and `out` must hold `len` doubles.
 */
enum GsaStatus gsa_pv0(const struct GsaGame *game, double tau, double *out, size_t len);

/*
 Proportional marginal effects of a total index table.

 # Safety
 `game` must be a live handle and `out` must hold `len` doubles.
 */
enum GsaStatus gsa_pme(const struct GsaGame *game, double tau, double *out, size_t len);

/*
 Bitmask of the inputs detected as exogenous in a total index table.

 # Safety
 `game` must be a live handle and `out` writable.
 */
enum GsaStatus gsa_detect_exogenous(const struct GsaGame *game, double tau, uint32_t *out);

/*
 Exact total Sobol' index table of a toy case.

 # Safety
 `out` must be writable.
 */
enum GsaStatus gsa_toycase_game(enum GsaToyCase case_,
                                double rho,
                                double param,
                                struct GsaGame **out);

/*
 Nearest-neighbour estimate of the total index table from `n` observations.
 `x` is row-major `n × d`, `y` has `n` entries. Estimates are clamped to
 `[0, 1]`; a constant output gives the all-zero table.

 # Safety
 `x` must hold `n·d` doubles, `y` `n` doubles, and `out` must be writable.
 */
enum GsaStatus gsa_estimate_knn(const double *x,
                                const double *y,
                                size_t n,
                                size_t d,
                                size_t k,
                                struct GsaGame **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GSA_H */
