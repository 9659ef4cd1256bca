#ifndef BINPACK_H
#define BINPACK_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum BpStatus {
  BP_STATUS_OK = 0,
  BP_STATUS_NULL_ARGUMENT = 1,
  BP_STATUS_INVALID_UTF8 = 2,
  BP_STATUS_PARSE_ERROR = 3,
  BP_STATUS_INVALID_INSTANCE = 4,
  BP_STATUS_INVALID_ARGUMENT = 5,
  BP_STATUS_SOLVER_ERROR = 6,
  BP_STATUS_REMOTE_ERROR = 7,
  BP_STATUS_OUT_OF_RANGE = 8,
  BP_STATUS_NO_SOLUTION = 9,
  BP_STATUS_PANIC = 10,
} BpStatus;

typedef enum BpBackend {
  BP_BACKEND_ANNEAL = 0,
  BP_BACKEND_EXACT1D = 1,
  BP_BACKEND_EXACT_SMALL = 2,
} BpBackend;

typedef struct BpInstance BpInstance;

typedef struct BpResult BpResult;

typedef struct BpBudget {
  /**
   * Seconds.
   */
  double time_limit;
  uint64_t max_iterations;
  uint32_t restarts;
  uint64_t seed;
  bool deterministic;
} BpBudget;

typedef struct BpPlacement {
  size_t bin;
  uint8_t orientation;
  /**
   * Global coordinates; unused axes are 0.
   */
  double position[3];
  uint32_t extents[3];
} BpPlacement;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Parses a JSON instance.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` a valid pointer.
 */
enum BpStatus bp_instance_from_json(const char *json, struct BpInstance **out);

/**
 * Parses a text instance.
 *
 * # Safety
 * `txt` must be a NUL-terminated string and `out` a valid pointer.
 */
enum BpStatus bp_instance_from_txt(const char *txt, struct BpInstance **out);

/**
 * # Safety
 * `instance` must come from this library and not be used afterwards. Null is ignored.
 */
void bp_instance_free(struct BpInstance *instance);

/**
 * Number of items, 0 for a null handle.
 *
 * # Safety
 * `instance` must be null or a live handle.
 */
size_t bp_instance_item_count(const struct BpInstance *instance);

/**
 * # Safety
 * `instance` must be null or a live handle.
 */
size_t bp_instance_bin_count(const struct BpInstance *instance);

/**
 * 1, 2 or 3; 0 for a null handle.
 *
 * # Safety
 * `instance` must be null or a live handle.
 */
uint8_t bp_instance_dimensionality(const struct BpInstance *instance);

struct BpBudget bp_budget_default(void);

/**
 * Solves with a local backend. A null `budget` uses the defaults. An
 * infeasible outcome still succeeds; query it with [`bp_result_feasible`].
 *
 * # Safety
 * `instance` must be a live handle, `budget` null or valid, `out` valid.
 */
enum BpStatus bp_solve(const struct BpInstance *instance,
                       enum BpBackend backend,
                       const struct BpBudget *budget,
                       struct BpResult **out);

/**
 * Solves through a remote HTTP endpoint.
 *
 * # Safety
 * As [`bp_solve`]; `endpoint` must be a NUL-terminated string.
 */
enum BpStatus bp_solve_remote(const struct BpInstance *instance,
                              const char *endpoint,
                              const struct BpBudget *budget,
                              struct BpResult **out);

/**
 * # Safety
 * `result` must come from this library and not be used afterwards. Null is ignored.
 */
void bp_result_free(struct BpResult *result);

/**
 * # Safety
 * `result` must be null or a live handle.
 */
bool bp_result_feasible(const struct BpResult *result);

/**
 * Objective of the best solution, NaN when there is none.
 *
 * # Safety
 * `result` must be null or a live handle.
 */
double bp_result_objective(const struct BpResult *result);

/**
 * # Safety
 * `result` must be null or a live handle.
 */
size_t bp_result_bins_used(const struct BpResult *result);

/**
 * Placement of `item` in the best solution.
 *
 * # Safety
 * `result` must be a live handle and `out` valid.
 */
enum BpStatus bp_result_placement(const struct BpResult *result,
                                  size_t item,
                                  struct BpPlacement *out);

/**
 * Writes the solution document as JSON.
 *
 * # Safety
 * `result` must be a live handle and `out` valid.
 */
enum BpStatus bp_result_to_json(const struct BpResult *result, char **out);

/**
 * Draws the best solution as SVG.
 *
 * # Safety
 * `result` must be a live handle and `out` valid.
 */
enum BpStatus bp_result_render_svg(const struct BpResult *result, char **out);

/**
 * Checks a solution document against `instance`. Writes the violation
 * report as JSON to `report` and feasibility to `feasible`; either may be null.
 *
 * # Safety
 * `instance` must be a live handle, `solution_json` a NUL-terminated string.
 */
enum BpStatus bp_check_json(const struct BpInstance *instance,
                            const char *solution_json,
                            char **report,
                            bool *feasible);

/**
 * # Safety
 * `s` must be null or a string returned by this library.
 */
void bp_string_free(char *s);

/**
 * Message of the last failed call on this thread, empty after a success.
 * Valid until the next call into the library on the same thread.
 */
const char *bp_last_error_message(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BINPACK_H */
