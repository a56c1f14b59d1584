#ifndef SPARSE_GF2_H
#define SPARSE_GF2_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum Sgf2Algorithm {
  SGF2_ALGORITHM_AUTO = 0,
  SGF2_ALGORITHM_MAIN = 1,
  SGF2_ALGORITHM_SMALL_BETA = 2,
  SGF2_ALGORITHM_FIG3 = 3,
  SGF2_ALGORITHM_EXACT_LOWDEG = 4,
  SGF2_ALGORITHM_REDUCED_VARS = 5,
} Sgf2Algorithm;

typedef enum Sgf2Outcome {
  SGF2_OUTCOME_EXACT = 0,
  SGF2_OUTCOME_APPROX = 1,
  SGF2_OUTCOME_GAVE_UP_BUDGET = 2,
  SGF2_OUTCOME_DECLARED_ZERO = 3,
} Sgf2Outcome;

typedef enum Sgf2Status {
  SGF2_STATUS_OK = 0,
  SGF2_STATUS_NULL_POINTER = 1,
  SGF2_STATUS_INVALID_ARGUMENT = 2,
  SGF2_STATUS_ARITY_MISMATCH = 3,
  SGF2_STATUS_PARSE = 4,
  SGF2_STATUS_BUDGET_EXHAUSTED = 5,
  SGF2_STATUS_PROMISE_VIOLATION = 6,
  SGF2_STATUS_PANIC = 7,
  SGF2_STATUS_IO = 8,
} Sgf2Status;

typedef struct Sgf2Oracle Sgf2Oracle;

typedef struct Sgf2Poly Sgf2Poly;

typedef struct Sgf2Report Sgf2Report;

/**
 * Query callback: returns 0 or 1, or a negative value to abort the query.
 */
typedef int32_t (*Sgf2QueryFn)(void *user_data, const uint8_t *bits, size_t len);

/**
 * Learner inputs. Optional fields are ignored unless their `has_` flag is
 * set; `eta <= 0` selects the optimized exponent.
 */
typedef struct Sgf2LearnParams {
  uint64_t s;
  double epsilon;
  double delta;
  uint64_t seed;
  size_t degree;
  bool has_degree;
  uint64_t budget;
  bool has_budget;
  double eta;
} Sgf2LearnParams;

typedef struct Sgf2Verdict {
  bool accept;
  uint64_t queries_used;
  uint64_t budget;
  /**
   * NaN when the learning stage failed.
   */
  double estimated_distance;
} Sgf2Verdict;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread; empty after a success.
 * Valid until the next call into the library from this thread.
 */
const char *sgf2_last_error_message(void);

/**
 * Library version as a static string.
 */
const char *sgf2_version(void);

/**
 * # Safety
 * `s` must be null or a string returned by this library.
 */
void sgf2_string_free(char *s);

/**
 * Parses `{"n": .., "monomials": [[..], ..]}`.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` a valid pointer.
 */
enum Sgf2Status sgf2_poly_from_json(const char *json, struct Sgf2Poly **out);

/**
 * `s` distinct random monomials of degree at most `d` over `n` variables,
 * identical to `sparse-gf2 gen` with the same seed.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum Sgf2Status sgf2_poly_random(size_t n,
                                 size_t d,
                                 size_t s,
                                 uint64_t seed,
                                 struct Sgf2Poly **out);

/**
 * # Safety
 * `p` must be a valid handle and `out` a valid pointer.
 */
enum Sgf2Status sgf2_poly_to_json(const struct Sgf2Poly *p, char **out);

/**
 * Evaluates `p` at the assignment whose coordinate `i` is `bits[i] != 0`.
 *
 * # Safety
 * `bits` must point to `len` bytes; `p` and `out` must be valid.
 */
enum Sgf2Status sgf2_poly_eval(const struct Sgf2Poly *p,
                               const uint8_t *bits,
                               size_t len,
                               bool *out);

/**
 * Arity of `p`, 0 for a null handle.
 *
 * # Safety
 * `p` must be null or a valid handle.
 */
size_t sgf2_poly_arity(const struct Sgf2Poly *p);

/**
 * # Safety
 * `p` must be null or a valid handle.
 */
size_t sgf2_poly_sparsity(const struct Sgf2Poly *p);

/**
 * # Safety
 * `p` must be null or a valid handle.
 */
size_t sgf2_poly_degree(const struct Sgf2Poly *p);

/**
 * Symbolic equality; false if either handle is null.
 *
 * # Safety
 * Both pointers must be null or valid handles.
 */
bool sgf2_poly_equal(const struct Sgf2Poly *a, const struct Sgf2Poly *b);

/**
 * # Safety
 * `p` must be null or a handle not yet freed.
 */
void sgf2_poly_free(struct Sgf2Poly *p);

/**
 * Query oracle hiding a copy of `p`.
 *
 * # Safety
 * `p` must be a valid handle and `out` a valid pointer.
 */
enum Sgf2Status sgf2_oracle_from_poly(const struct Sgf2Poly *p, struct Sgf2Oracle **out);

/**
 * Query oracle backed by `callback`, which receives `arity` bytes of 0/1.
 *
 * # Safety
 * `callback` must stay callable with `user_data` for the oracle's lifetime
 * and must only be used from the thread that runs the queries.
 */
enum Sgf2Status sgf2_oracle_from_callback(size_t arity,
                                          Sgf2QueryFn callback,
                                          void *user_data,
                                          struct Sgf2Oracle **out);

/**
 * Sets (`has_budget`) or clears the hard query budget.
 *
 * # Safety
 * `o` must be a valid handle.
 */
enum Sgf2Status sgf2_oracle_set_budget(struct Sgf2Oracle *o, uint64_t budget, bool has_budget);

/**
 * One charged query.
 *
 * # Safety
 * `bits` must point to `len` bytes; `o` and `out` must be valid.
 */
enum Sgf2Status sgf2_oracle_query(const struct Sgf2Oracle *o,
                                  const uint8_t *bits,
                                  size_t len,
                                  bool *out);

/**
 * Queries charged so far, 0 for a null handle.
 *
 * # Safety
 * `o` must be null or a valid handle.
 */
uint64_t sgf2_oracle_queries(const struct Sgf2Oracle *o);

/**
 * # Safety
 * `o` must be null or a valid handle.
 */
size_t sgf2_oracle_arity(const struct Sgf2Oracle *o);

/**
 * # Safety
 * `o` must be null or a handle not yet freed.
 */
void sgf2_oracle_free(struct Sgf2Oracle *o);

/**
 * Default parameters: delta 0.1, seed 0, no degree, budget or eta.
 */
struct Sgf2LearnParams sgf2_learn_params_default(uint64_t s, double epsilon);

/**
 * Runs `algorithm` against `o`. Budget exhaustion is reported through the
 * report's outcome, not the status.
 *
 * # Safety
 * `o`, `params` and `out` must be valid.
 */
enum Sgf2Status sgf2_learn(const struct Sgf2Oracle *o,
                           const struct Sgf2LearnParams *params,
                           enum Sgf2Algorithm algorithm,
                           struct Sgf2Report **out);

/**
 * # Safety
 * `r` must be null or a valid handle.
 */
uint64_t sgf2_report_queries_used(const struct Sgf2Report *r);

/**
 * Prediction with constants set to 1; NaN when undefined.
 *
 * # Safety
 * `r` must be null or a valid handle.
 */
double sgf2_report_predicted(const struct Sgf2Report *r);

/**
 * # Safety
 * `r` and `out` must be valid.
 */
enum Sgf2Status sgf2_report_outcome(const struct Sgf2Report *r, enum Sgf2Outcome *out);

/**
 * The concrete algorithm that ran (never `Auto`).
 *
 * # Safety
 * `r` and `out` must be valid.
 */
enum Sgf2Status sgf2_report_algorithm(const struct Sgf2Report *r, enum Sgf2Algorithm *out);

/**
 * Copies the hypothesis into a new polynomial handle.
 *
 * # Safety
 * `r` and `out` must be valid.
 */
enum Sgf2Status sgf2_report_hypothesis(const struct Sgf2Report *r, struct Sgf2Poly **out);

/**
 * The full report, including the per-routine query ledger, as JSON.
 *
 * # Safety
 * `r` and `out` must be valid.
 */
enum Sgf2Status sgf2_report_to_json(const struct Sgf2Report *r, char **out);

/**
 * # Safety
 * `r` must be null or a handle not yet freed.
 */
void sgf2_report_free(struct Sgf2Report *r);

/**
 * Sparsity test of the oracle's target. `budget_factor <= 0` selects the
 * default multiple of the learner's ceiling.
 *
 * # Safety
 * `o` and `out` must be valid.
 */
enum Sgf2Status sgf2_test_sparsity(const struct Sgf2Oracle *o,
                                   uint64_t s,
                                   double epsilon,
                                   uint64_t seed,
                                   double budget_factor,
                                   struct Sgf2Verdict *out);

/**
 * # Safety
 * `out` must be valid.
 */
enum Sgf2Status sgf2_binary_entropy(double x, double *out);

/**
 * Minimized exponent of the main learner and its minimizer.
 *
 * # Safety
 * `value` and `eta` must be valid.
 */
enum Sgf2Status sgf2_gamma(double beta, double *value, double *eta);

/**
 * Exponent of the small-beta learner; NaN for `beta <= 0`.
 */
double sgf2_gamma_prime(double beta);

/**
 * Every bound at `(s, epsilon, n)` as JSON.
 *
 * # Safety
 * `out` must be valid.
 */
enum Sgf2Status sgf2_bounds_profile_json(uint64_t s, double epsilon, uint64_t n, char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SPARSE_GF2_H */
