#ifndef RSGAME_H
#define RSGAME_H

/* Generated by cbindgen; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes; the nonzero CLI exit codes keep their meaning.
 */
typedef enum RsgStatus {
  RSG_STATUS_OK = 0,
  RSG_STATUS_IO = 1,
  RSG_STATUS_VALIDATION = 2,
  RSG_STATUS_PRECONDITION = 3,
  RSG_STATUS_NON_CONVERGENCE = 4,
  RSG_STATUS_NULL_POINTER = 10,
  RSG_STATUS_INVALID_ARGUMENT = 11,
  RSG_STATUS_PANIC = 12,
} RsgStatus;

/**
 * Opaque game model.
 */
typedef struct RsgGame RsgGame;

/**
 * Opaque saddle-point result.
 */
typedef struct RsgSaddle RsgSaddle;

typedef struct RsgSmartGridParams {
  uint32_t n_s;
  uint32_t n_c;
  uint32_t n_p;
  uint32_t m;
  double gen_mean;
  double gen_std;
  double theta;
} RsgSmartGridParams;

typedef struct RsgIrreducibility {
  double gamma;
  double eta;
  size_t i_star;
  double m_c;
  /**
   * `INFINITY` when unbounded.
   */
  double theta_max;
  bool irreducible;
} RsgIrreducibility;

typedef struct RsgValueBracket {
  double lower;
  double upper;
  double rho_tilde;
  uint32_t n_outer;
  uint64_t applications;
} RsgValueBracket;

typedef struct RsgCertificate {
  double rho_lower;
  double rho_upper;
  double slack_player1;
  double slack_player2;
  double certified_eps;
  double tolerance;
  bool passes;
} RsgCertificate;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. Valid until the
 * next call into this library from the same thread.
 */
const char *rsg_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *rsg_version(void);

/**
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid pointer.
 */
enum RsgStatus rsg_game_load(const char *path, struct RsgGame **out);

/**
 * # Safety
 * `json` must be a NUL-terminated string and `out` a valid pointer.
 */
enum RsgStatus rsg_game_from_json(const char *json, struct RsgGame **out);

/**
 * # Safety
 * `params` and `out` must be valid pointers.
 */
enum RsgStatus rsg_smartgrid_new(const struct RsgSmartGridParams *params, struct RsgGame **out);

/**
 * Defaults of the built-in smart-grid example.
 */
struct RsgSmartGridParams rsg_smartgrid_default_params(void);

/**
 * # Safety
 * `game` must come from this library and not be used afterwards.
 */
void rsg_game_free(struct RsgGame *game);

/**
 * Number of states, or 0 for a null handle.
 *
 * # Safety
 * `game` must be null or a live handle.
 */
size_t rsg_game_n_states(const struct RsgGame *game);

/**
 * # Safety
 * `game` must be a live handle and `out` a valid pointer.
 */
enum RsgStatus rsg_analyze(const struct RsgGame *game, struct RsgIrreducibility *out);

/**
 * # Safety
 * `game` must be a live handle and `out` a valid pointer.
 */
enum RsgStatus rsg_approximate_value(const struct RsgGame *game,
                                     double eps,
                                     uint32_t max_outer,
                                     struct RsgValueBracket *out);

/**
 * # Safety
 * `game` must be a live handle and `out` a valid pointer.
 */
enum RsgStatus rsg_compute_saddle(const struct RsgGame *game, double eps, struct RsgSaddle **out);

/**
 * # Safety
 * `saddle` must come from this library and not be used afterwards.
 */
void rsg_saddle_free(struct RsgSaddle *saddle);

/**
 * Value estimate of the saddle computation, NaN for a null handle.
 *
 * # Safety
 * `saddle` must be null or a live handle.
 */
double rsg_saddle_rho(const struct RsgSaddle *saddle);

/**
 * # Safety
 * `saddle` must be a live handle and the outputs valid pointers.
 */
enum RsgStatus rsg_saddle_counts(const struct RsgSaddle *saddle,
                                 uint64_t *k_eps,
                                 uint64_t *n_eps,
                                 bool *constant_cost);

/**
 * Copies the strategy of `player` (1 or 2) at `state` into `buf`. With
 * `buf` null or too short only `*len` is set to the number of actions.
 *
 * # Safety
 * `saddle` must be a live handle, `len` valid, and `buf` null or valid for
 * `*len` writes on entry.
 */
enum RsgStatus rsg_saddle_strategy(const struct RsgSaddle *saddle,
                                   uint32_t player,
                                   size_t state,
                                   double *buf,
                                   size_t *len);

/**
 * Certifies the pair held by `saddle` on `game`.
 *
 * # Safety
 * Both handles must be live and `out` a valid pointer.
 */
enum RsgStatus rsg_verify_saddle(const struct RsgGame *game,
                                 const struct RsgSaddle *saddle,
                                 double eps,
                                 struct RsgCertificate *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RSGAME_H */
