#ifndef GEDQUBO_H
#define GEDQUBO_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum GedqMethod {
  GEDQ_METHOD_VQE = 0,
  GEDQ_METHOD_QAOA = 1,
} GedqMethod;

typedef enum GedqStatus {
  GEDQ_STATUS_OK = 0,
  GEDQ_STATUS_NULL_POINTER = 1,
  GEDQ_STATUS_PARAMETER = 2,
  GEDQ_STATUS_CAPACITY = 3,
  GEDQ_STATUS_PARSE = 4,
  GEDQ_STATUS_IO = 5,
  GEDQ_STATUS_PANIC = 6,
} GedqStatus;

/**
 * Opaque graph handle.
 */
typedef struct GedqGraph GedqGraph;

/**
 * Opaque QUBO handle.
 */
typedef struct GedqQubo GedqQubo;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the last error message of this thread into `buf` (NUL terminated,
 * truncated to `cap`). Returns the full message length plus one.
 *
 * # Safety
 * `buf` must be null or valid for `cap` bytes.
 */
uintptr_t gedq_last_error(char *buf, uintptr_t cap);

/**
 * Builds a graph on `n` vertices from `num_edges` pairs stored flat in `edges`.
 *
 * # Safety
 * `edges` must hold `2 * num_edges` values (may be null when `num_edges == 0`);
 * `out` must be valid for a write.
 */
enum GedqStatus gedq_graph_new(uintptr_t n,
                               const uintptr_t *edges,
                               uintptr_t num_edges,
                               struct GedqGraph **out);

/**
 * Samples `G(n, p)` deterministically from `seed`.
 *
 * # Safety
 * `out` must be valid for a write.
 */
enum GedqStatus gedq_graph_random(uintptr_t n, double p, uint64_t seed, struct GedqGraph **out);

/**
 * Parses a graph from JSON or edge-list text.
 *
 * # Safety
 * `text` must be a NUL-terminated string; `out` must be valid for a write.
 */
enum GedqStatus gedq_graph_parse(const char *text, struct GedqGraph **out);

/**
 * # Safety
 * `g` must be null or a live handle.
 */
uintptr_t gedq_graph_num_vertices(const struct GedqGraph *g);

/**
 * # Safety
 * `g` must be null or a live handle.
 */
uintptr_t gedq_graph_num_edges(const struct GedqGraph *g);

/**
 * # Safety
 * `g` must be null or a handle not freed before.
 */
void gedq_graph_free(struct GedqGraph *g);

/**
 * Exact GED. When `mapping` is non-null, the optimal bijection of the padded
 * pair is written to it (`mapping_len` must equal the larger vertex count).
 *
 * # Safety
 * Handles must be live; `distance` valid for a write; `mapping` null or valid
 * for `mapping_len` writes.
 */
enum GedqStatus gedq_exact_ged(const struct GedqGraph *g1,
                               const struct GedqGraph *g2,
                               uintptr_t *distance,
                               uintptr_t *mapping,
                               uintptr_t mapping_len);

/**
 * Builds the GED QUBO for a graph pair, padding the smaller graph.
 *
 * # Safety
 * Handles must be live; `out` valid for a write.
 */
enum GedqStatus gedq_qubo_build(const struct GedqGraph *g1,
                                const struct GedqGraph *g2,
                                double alpha,
                                double beta,
                                struct GedqQubo **out);

/**
 * # Safety
 * `q` must be null or a live handle.
 */
uintptr_t gedq_qubo_num_vars(const struct GedqQubo *q);

/**
 * Energy of the 0/1 assignment `bits`.
 *
 * # Safety
 * `q` must be live; `bits` valid for `len` reads; `energy` valid for a write.
 */
enum GedqStatus gedq_qubo_energy(const struct GedqQubo *q,
                                 const uint8_t *bits,
                                 uintptr_t len,
                                 double *energy);

/**
 * # Safety
 * `q` must be null or a handle not freed before.
 */
void gedq_qubo_free(struct GedqQubo *q);

/**
 * Simulated annealing with the default schedule. Writes the best sample,
 * its energy and the decoded distance (`-1` when it is not a bijection).
 *
 * # Safety
 * `q` must be live; `bits` null or valid for `bits_len` writes; `energy` valid
 * for a write; `ged` null or valid for a write.
 */
enum GedqStatus gedq_sa_best(const struct GedqQubo *q,
                             uintptr_t shots,
                             uint64_t seed,
                             uint8_t *bits,
                             uintptr_t bits_len,
                             double *energy,
                             int64_t *ged);

/**
 * Runs VQE or QAOA with `restarts` random starts. `max_qubits == 0` keeps the
 * default cap.
 *
 * # Safety
 * Same contract as [`gedq_sa_best`].
 */
enum GedqStatus gedq_variational(const struct GedqQubo *q,
                                 enum GedqMethod method,
                                 uintptr_t p,
                                 uintptr_t restarts,
                                 uintptr_t shots,
                                 uint64_t seed,
                                 uintptr_t max_qubits,
                                 uint8_t *bits,
                                 uintptr_t bits_len,
                                 double *energy,
                                 int64_t *ged);

/**
 * # Safety
 * `out` must be valid for a write.
 */
enum GedqStatus gedq_relative_difference(int64_t s, int64_t s_approx, double *out);

/**
 * Time to solution; writes NaN when `hq_prob` is zero.
 *
 * # Safety
 * `out` must be valid for a write.
 */
enum GedqStatus gedq_tts(uintptr_t runs, double time_per_run, double hq_prob, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GEDQUBO_H */
