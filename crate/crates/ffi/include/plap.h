#ifndef PLAP_H
#define PLAP_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum PlapStatus {
  PLAP_STATUS_OK = 0,
  PLAP_STATUS_NULL_POINTER = 1,
  PLAP_STATUS_INVALID_INPUT = 2,
  PLAP_STATUS_CAP_EXCEEDED = 3,
  PLAP_STATUS_NUMERICAL = 4,
  PLAP_STATUS_BUFFER_TOO_SMALL = 5,
  PLAP_STATUS_OVERFLOW = 6,
  PLAP_STATUS_INTERNAL = 7,
} PlapStatus;

/**
 * Opaque graph handle.
 */
typedef struct PlapGraph PlapGraph;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Builds a graph on vertices 1..=n from `edge_count` pairs stored flat in `edges`.
 */
enum PlapStatus plap_graph_new(size_t n,
                               const size_t *edges,
                               size_t edge_count,
                               struct PlapGraph **out);

/**
 * Looks up a built-in graph such as "g6", "p6", "c8" or "k5".
 */
enum PlapStatus plap_graph_from_catalog(const char *name, struct PlapGraph **out);

/**
 * Releases a handle; null is ignored.
 */
void plap_graph_free(struct PlapGraph *g);

enum PlapStatus plap_graph_vertex_count(const struct PlapGraph *g, size_t *out);

/**
 * Certified 1-Laplacian eigenvalues as numerator/denominator arrays.
 */
enum PlapStatus plap_delta1_spectrum(const struct PlapGraph *g,
                                     int64_t *num,
                                     int64_t *den,
                                     size_t cap,
                                     size_t *len_out);

/**
 * Min-max eigenvalues λ_1..λ_n of the 1-Laplacian.
 */
enum PlapStatus plap_minmax_delta1(const struct PlapGraph *g,
                                   int64_t *num,
                                   int64_t *den,
                                   size_t cap,
                                   size_t *len_out);

/**
 * Multi-way Cheeger constant h_k.
 */
enum PlapStatus plap_multiway_cheeger(const struct PlapGraph *g,
                                      size_t k,
                                      int64_t *num,
                                      int64_t *den);

/**
 * Eigenvalues at p = 2 in ascending order.
 */
enum PlapStatus plap_spectrum_p2(const struct PlapGraph *g,
                                 double *out,
                                 size_t cap,
                                 size_t *len_out);

/**
 * Sup-norm residual of the p-Laplacian eigen-equation at (λ, x).
 */
enum PlapStatus plap_eigen_residual(const struct PlapGraph *g,
                                    double lambda,
                                    const double *x,
                                    size_t len,
                                    double p,
                                    double *out);

/**
 * Runs a verification suite ("exact", "homology", "numeric" or "all").
 */
enum PlapStatus plap_verify(const char *suite, uint64_t seed, size_t *passed, size_t *total);

/**
 * Length in bytes of the last error message on this thread.
 */
size_t plap_last_error_length(void);

/**
 * Copies the last error message, NUL-terminated and truncated to `cap`.
 * Returns the number of bytes written without the terminator.
 */
size_t plap_last_error_message(char *buf, size_t cap);

/**
 * Static description of a status code.
 */
const char *plap_status_string(enum PlapStatus status);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PLAP_H */
