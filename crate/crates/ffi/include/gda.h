#ifndef GDA_H
#define GDA_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum GdaStatus {
  GDA_STATUS_OK = 0,
  GDA_STATUS_NULL_POINTER = 1,
  GDA_STATUS_INVALID_ARGUMENT = 2,
  GDA_STATUS_INVALID_GRAPH = 3,
  GDA_STATUS_DOMAIN = 4,
  GDA_STATUS_SINGULAR = 5,
  GDA_STATUS_NOT_CONVERGED = 6,
  GDA_STATUS_BUFFER_TOO_SMALL = 7,
  GDA_STATUS_INTERNAL = 8,
} GdaStatus;

/**
 * Opaque undirected weighted graph.
 */
typedef struct GdaGraph GdaGraph;

/**
 * Opaque result of a BFIS or BS-BFIS run.
 */
typedef struct GdaSampling GdaSampling;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the last error message of this thread into `buf` (NUL-terminated,
 * truncated to `len - 1` bytes). Returns the full message length in bytes.
 *
 * # Safety
 * `buf` must be null or point to `len` writable bytes.
 */
size_t gda_last_error_message(char *buf, size_t len);

/**
 * Builds a validated graph from `edge_count` undirected edges
 * `(src[k], dst[k], weight[k])` over nodes `0..node_count`.
 *
 * # Safety
 * The three arrays must each hold `edge_count` elements; `out` must be writable.
 */
enum GdaStatus gda_graph_from_edges(size_t node_count,
                                    const size_t *src,
                                    const size_t *dst,
                                    const double *weight,
                                    size_t edge_count,
                                    struct GdaGraph **out);

/**
 * Unweighted path graph on `n >= 2` nodes.
 *
 * # Safety
 * `out` must be writable.
 */
enum GdaStatus gda_graph_line(size_t n, struct GdaGraph **out);

/**
 * # Safety
 * `g` must be null or a handle from this library not yet freed.
 */
void gda_graph_free(struct GdaGraph *g);

/**
 * Number of nodes, or 0 for a null handle.
 *
 * # Safety
 * `g` must be null or a live graph handle.
 */
size_t gda_graph_node_count(const struct GdaGraph *g);

/**
 * Number of undirected edges, or 0 for a null handle.
 *
 * # Safety
 * `g` must be null or a live graph handle.
 */
size_t gda_graph_edge_count(const struct GdaGraph *g);

/**
 * One BFIS pass at a fixed threshold in `[0, 1)`.
 *
 * # Safety
 * `g` must be a live graph handle; `out` must be writable.
 */
enum GdaStatus gda_bfis(const struct GdaGraph *g,
                        double threshold,
                        size_t start,
                        double mu,
                        struct GdaSampling **out);

/**
 * Bisection on the threshold for budget `k` from a fixed start node.
 *
 * # Safety
 * `g` must be a live graph handle; `out` must be writable.
 */
enum GdaStatus gda_bs_bfis(const struct GdaGraph *g,
                           size_t k,
                           double epsilon,
                           size_t start,
                           double mu,
                           struct GdaSampling **out);

/**
 * Bisection from every start node, keeping the largest threshold.
 *
 * # Safety
 * `g` must be a live graph handle; `out` must be writable.
 */
enum GdaStatus gda_best_start_bs_bfis(const struct GdaGraph *g,
                                      size_t k,
                                      double epsilon,
                                      double mu,
                                      struct GdaSampling **out);

/**
 * # Safety
 * `s` must be null or a handle from this library not yet freed.
 */
void gda_sampling_free(struct GdaSampling *s);

/**
 * Threshold the run aligned to (the bisection result for BS-BFIS), NaN for null.
 *
 * # Safety
 * `s` must be null or a live sampling handle.
 */
double gda_sampling_threshold(const struct GdaSampling *s);

/**
 * # Safety
 * `s` must be null or a live sampling handle.
 */
size_t gda_sampling_count(const struct GdaSampling *s);

/**
 * # Safety
 * `s` must be null or a live sampling handle.
 */
size_t gda_sampling_node_count(const struct GdaSampling *s);

/**
 * # Safety
 * `s` must be null or a live sampling handle.
 */
size_t gda_sampling_start(const struct GdaSampling *s);

/**
 * # Safety
 * `s` must be null or a live sampling handle.
 */
size_t gda_sampling_bfis_calls(const struct GdaSampling *s);

/**
 * Number of sampled nodes whose scale factor stayed below one.
 *
 * # Safety
 * `s` must be null or a live sampling handle.
 */
size_t gda_sampling_sub_unit_count(const struct GdaSampling *s);

/**
 * Writes the 0/1 sample indicator into `out[0..len]`; `len` must be at
 * least the node count.
 *
 * # Safety
 * `s` must be a live sampling handle; `out` must hold `len` bytes.
 */
enum GdaStatus gda_sampling_copy_sampled(const struct GdaSampling *s, uint8_t *out, size_t len);

/**
 * Writes the per-node scale factors into `out[0..len]`.
 *
 * # Safety
 * `s` must be a live sampling handle; `out` must hold `len` doubles.
 */
enum GdaStatus gda_sampling_copy_scales(const struct GdaSampling *s, double *out, size_t len);

/**
 * Smallest Gershgorin left end of `S (A + mu L) S^-1` for the sampling
 * result: a certified lower bound on the smallest eigenvalue.
 *
 * # Safety
 * `g` and `s` must be live handles for the same graph; `out` must be writable.
 */
enum GdaStatus gda_sampling_min_left_end(const struct GdaGraph *g,
                                         const struct GdaSampling *s,
                                         double mu,
                                         double *out);

/**
 * Solves `(H^T H + mu L) x = H^T y` for observations `values[k]` at
 * `nodes[k]`. `max_iter == 0` selects the default `10 N`. The estimate is
 * written to `out[0..len]` (`len >= N`), the CG iteration count to
 * `iterations` when non-null.
 *
 * # Safety
 * `g` must be a live graph handle; `nodes`/`values` must hold `count`
 * elements; `out` must hold `len` doubles.
 */
enum GdaStatus gda_glr_solve(const struct GdaGraph *g,
                             const size_t *nodes,
                             const double *values,
                             size_t count,
                             double mu,
                             double tol,
                             size_t max_iter,
                             double *out,
                             size_t len,
                             size_t *iterations);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GDA_H */
