#ifndef POLYCYCLE_H
#define POLYCYCLE_H

/* Generated by cbindgen from crates/ffi/src. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum PcStatus {
  PC_STATUS_OK = 0,
  PC_STATUS_NULL_POINTER = 1,
  PC_STATUS_INVALID_UTF8 = 2,
  PC_STATUS_INVALID_ARGUMENT = 3,
  PC_STATUS_MAP_ERROR = 4,
  PC_STATUS_NOT_A_CYCLE = 5,
  PC_STATUS_UNSUPPORTED_MAP = 6,
  PC_STATUS_NOT_FOUND = 7,
  PC_STATUS_PANIC = 8,
} PcStatus;

typedef enum PcBranch {
  PC_BRANCH_DIVISIBLE = 0,
  PC_BRANCH_NON_DIVISIBLE = 1,
} PcBranch;

typedef enum PcCheck {
  PC_CHECK_ROTATION = 0,
  PC_CHECK_SUM = 1,
  PC_CHECK_EQ1 = 2,
  PC_CHECK_INVERSE_IDENTITY = 3,
  PC_CHECK_INVERSE_INEQUALITY = 4,
} PcCheck;

typedef enum PcOutcome {
  PC_OUTCOME_PASS = 0,
  PC_OUTCOME_FAIL = 1,
  PC_OUTCOME_NOT_APPLICABLE = 2,
  PC_OUTCOME_UNRESOLVED = 3,
} PcOutcome;

/**
 * Opaque cycle handle (canonical rotation).
 */
typedef struct PcCycle PcCycle;

/**
 * Opaque map handle.
 */
typedef struct PcMap PcMap;

/**
 * Opaque search result handle.
 */
typedef struct PcSearchResult PcSearchResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or NULL. The pointer is
 * valid until the next failing call on the same thread.
 */
const char *pc_last_error(void);

/**
 * # Safety
 * `s` must be NULL or a string returned by this library, not yet freed.
 */
void pc_string_free(char *s);

/**
 * Looks up `collatz` or `inverse-collatz`.
 *
 * # Safety
 * `name` must be a valid C string; `out` must be writable.
 */
enum PcStatus pc_map_builtin(const char *name, struct PcMap **out);

/**
 * Parses the map file format (`p = ...`, `divisible = ...`, `otherwise = ...`).
 *
 * # Safety
 * `text` must be a valid C string; `out` must be writable.
 */
enum PcStatus pc_map_parse(const char *text, struct PcMap **out);

/**
 * # Safety
 * `map` must be NULL or a handle from this library, not yet freed.
 */
void pc_map_free(struct PcMap *map);

/**
 * Canonical file text of a piecewise map.
 *
 * # Safety
 * `map` must be a live handle; `out` must be writable.
 */
enum PcStatus pc_map_to_string(const struct PcMap *map, char **out);

/**
 * Evaluates the map once. `out_branch` may be NULL.
 *
 * # Safety
 * `map` must be a live handle, `x` a valid C string, `out_value` writable.
 */
enum PcStatus pc_map_eval(const struct PcMap *map,
                          const char *x,
                          char **out_value,
                          enum PcBranch *out_branch);

/**
 * Builds a canonical cycle from comma-separated members.
 *
 * # Safety
 * `map` must be a live handle, `members` a valid C string, `out` writable.
 */
enum PcStatus pc_cycle_new(const struct PcMap *map, const char *members, struct PcCycle **out);

/**
 * Detects the cycle reached from `seed`; `PC_STATUS_NOT_FOUND` when the
 * orbit does not repeat within `max_steps` (0 selects the default).
 *
 * # Safety
 * `map` must be a live handle, `seed` a valid C string, `out` writable.
 */
enum PcStatus pc_cycle_detect(const struct PcMap *map,
                              const char *seed,
                              uint64_t max_steps,
                              struct PcCycle **out);

/**
 * # Safety
 * `cycle` must be NULL or a live handle.
 */
size_t pc_cycle_len(const struct PcCycle *cycle);

/**
 * Member `index` of the canonical rotation, as a decimal string.
 *
 * # Safety
 * `cycle` must be a live handle; `out` must be writable.
 */
enum PcStatus pc_cycle_member(const struct PcCycle *cycle, size_t index, char **out);

/**
 * # Safety
 * `cycle` must be NULL or a handle from this library, not yet freed.
 */
void pc_cycle_free(struct PcCycle *cycle);

/**
 * Runs one certificate. `out_json` may be NULL; otherwise it receives the
 * full report as JSON.
 *
 * # Safety
 * `map` and `cycle` must be live handles; `out_outcome` must be writable.
 */
enum PcStatus pc_verify(const struct PcMap *map,
                        const struct PcCycle *cycle,
                        enum PcCheck check,
                        enum PcOutcome *out_outcome,
                        char **out_json);

/**
 * Correspondence residual of `n` modulo `p^precision` as a decimal string;
 * `"0"` when the correspondence holds.
 *
 * # Safety
 * `map` must be a live handle, `n` a valid C string, `out` writable.
 */
enum PcStatus pc_padic_residual(const struct PcMap *map,
                                const char *n,
                                uint32_t precision,
                                char **out);

/**
 * Orbit identity for the Collatz orbit of `n` down to 2.
 *
 * # Safety
 * `n` must be a valid C string; `out_outcome` must be writable.
 */
enum PcStatus pc_orbit_identity(const char *n, enum PcOutcome *out_outcome);

/**
 * Searches seeds `lo..=hi`. `max_steps == 0` selects the default.
 *
 * # Safety
 * `map` must be a live handle; `out` must be writable.
 */
enum PcStatus pc_search(const struct PcMap *map,
                        int64_t lo,
                        int64_t hi,
                        size_t workers,
                        uint64_t max_steps,
                        struct PcSearchResult **out);

/**
 * # Safety
 * `result` must be NULL or a live handle.
 */
size_t pc_search_result_cycle_count(const struct PcSearchResult *result);

/**
 * # Safety
 * `result` must be NULL or a live handle.
 */
uint64_t pc_search_result_unresolved(const struct PcSearchResult *result);

/**
 * Copies cycle `index` into a new handle (free with `pc_cycle_free`).
 *
 * # Safety
 * `result` must be a live handle; `out` must be writable.
 */
enum PcStatus pc_search_result_cycle(const struct PcSearchResult *result,
                                     size_t index,
                                     struct PcCycle **out);

/**
 * The whole result, including certificates, as JSON.
 *
 * # Safety
 * `result` must be a live handle; `out` must be writable.
 */
enum PcStatus pc_search_result_to_json(const struct PcSearchResult *result, char **out);

/**
 * # Safety
 * `result` must be NULL or a handle from this library, not yet freed.
 */
void pc_search_result_free(struct PcSearchResult *result);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* POLYCYCLE_H */
