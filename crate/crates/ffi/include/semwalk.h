#ifndef SEMWALK_H
#define SEMWALK_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes. Values other than `Ok`, `NullPointer`, `InvalidUtf8` and
 * `Panic` correspond one to one with the library's error kinds.
 */
typedef enum SwStatus {
  SW_STATUS_OK = 0,
  SW_STATUS_NULL_POINTER = 1,
  SW_STATUS_INVALID_UTF8 = 2,
  SW_STATUS_PARSE = 3,
  SW_STATUS_NOT_FOUND = 4,
  SW_STATUS_MISSING_WORDS = 5,
  SW_STATUS_INVALID_ARGUMENT = 6,
  SW_STATUS_UNDEFINED = 7,
  SW_STATUS_NO_NEIGHBORS = 8,
  SW_STATUS_NO_CONVERGENCE = 9,
  SW_STATUS_IO = 10,
  SW_STATUS_JSON = 11,
  SW_STATUS_CSV = 12,
  SW_STATUS_CONFIG = 13,
  SW_STATUS_PANIC = 14,
} SwStatus;

/**
 * Incremental word learner.
 */
typedef struct SwLearner SwLearner;

/**
 * Semantic network.
 */
typedef struct SwNetwork SwNetwork;

/**
 * Ensemble of walk records.
 */
typedef struct SwWalks SwWalks;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failure on this thread, or NULL. The pointer stays
 * valid until the next failing call on the same thread.
 */
const char *sw_last_error(void);

/**
 * Releases a string returned by this library.
 *
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void sw_string_free(char *s);

/**
 * New learner with empty meanings.
 */
struct SwLearner *sw_learner_new(void);

/**
 * # Safety
 * `learner` must come from `sw_learner_new` and not have been freed.
 */
void sw_learner_free(struct SwLearner *learner);

/**
 * Parses `corpus` (`U:`/`S:` records) and processes every pair in order.
 *
 * # Safety
 * Pointers must be valid; `corpus` must be NUL-terminated.
 */
enum SwStatus sw_learner_process(struct SwLearner *learner, const char *corpus);

/**
 * Number of pairs processed so far.
 *
 * # Safety
 * Pointers must be valid.
 */
enum SwStatus sw_learner_time(const struct SwLearner *learner, uint64_t *out);

/**
 * `P(feature | word)` for a stored cell; `NotFound` otherwise.
 *
 * # Safety
 * Pointers must be valid; strings must be NUL-terminated.
 */
enum SwStatus sw_learner_prob(const struct SwLearner *learner,
                              const char *word,
                              const char *feature,
                              double *out);

/**
 * Learned meanings as JSON (`{t, meanings: {word: {feature: prob}}}`).
 *
 * # Safety
 * Pointers must be valid. Free the result with `sw_string_free`.
 */
enum SwStatus sw_learner_meanings_json(const struct SwLearner *learner, char **out);

/**
 * Batch network over the words in `norms` (`word,category` lines) plus the
 * cue "animal", thresholded at `rho` and at `rho_animal` for cue edges.
 *
 * # Safety
 * Pointers must be valid; `norms` must be NUL-terminated. Free the result
 * with `sw_network_free`.
 */
enum SwStatus sw_network_build(const struct SwLearner *learner,
                               const char *norms,
                               double rho,
                               double rho_animal,
                               struct SwNetwork **out);

/**
 * Reads a network from its JSON form.
 *
 * # Safety
 * Pointers must be valid; `json` must be NUL-terminated.
 */
enum SwStatus sw_network_from_json(const char *json, struct SwNetwork **out);

/**
 * # Safety
 * Pointers must be valid. Free the result with `sw_string_free`.
 */
enum SwStatus sw_network_to_json(const struct SwNetwork *net, char **out);

/**
 * # Safety
 * Pointers must be valid.
 */
enum SwStatus sw_network_size(const struct SwNetwork *net, size_t *nodes, size_t *edges);

/**
 * Clustering coefficient and average path length (largest component).
 * Returns `Undefined` for a network without edges.
 *
 * # Safety
 * Pointers must be valid.
 */
enum SwStatus sw_network_metrics(const struct SwNetwork *net,
                                 double *clustering,
                                 double *path_length);

/**
 * # Safety
 * `net` must come from this library and not have been freed.
 */
void sw_network_free(struct SwNetwork *net);

/**
 * Runs `n_walks` walks of `steps` steps from `start`. Walk `i` is seeded
 * from `seed` and `i`, so results do not depend on the thread count.
 *
 * # Safety
 * Pointers must be valid; `start` must be NUL-terminated. Free the result
 * with `sw_walks_free`.
 */
enum SwStatus sw_walks_run(const struct SwNetwork *net,
                           const char *start,
                           size_t steps,
                           size_t n_walks,
                           uint64_t seed,
                           struct SwWalks **out);

/**
 * Number of walks in the ensemble, 0 for NULL.
 *
 * # Safety
 * `walks` must be NULL or valid.
 */
size_t sw_walks_count(const struct SwWalks *walks);

/**
 * Number of distinct words retrieved by walk `index`.
 *
 * # Safety
 * Pointers must be valid.
 */
enum SwStatus sw_walks_retrievals(const struct SwWalks *walks, size_t index, size_t *out);

/**
 * Walk records as a JSON array of `{seed, steps, retrievals}`.
 *
 * # Safety
 * Pointers must be valid. Free the result with `sw_string_free`.
 */
enum SwStatus sw_walks_to_json(const struct SwWalks *walks, char **out);

/**
 * # Safety
 * `walks` must come from this library and not have been freed.
 */
void sw_walks_free(struct SwWalks *walks);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SEMWALK_H */
