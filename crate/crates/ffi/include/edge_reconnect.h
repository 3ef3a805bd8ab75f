#ifndef EDGE_RECONNECT_H
#define EDGE_RECONNECT_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum {
  ER_STATUS_OK = 0,
  ER_STATUS_NULL_POINTER = 1,
  ER_STATUS_INVALID_ARGUMENT = 2,
  ER_STATUS_VERTEX_OUT_OF_RANGE = 3,
  ER_STATUS_NO_EDGES = 4,
  ER_STATUS_IO = 5,
  ER_STATUS_PARSE = 6,
  ER_STATUS_NUMERIC = 7,
  ER_STATUS_INTERNAL = 8,
} ErStatus;

/**
 * Opaque running chain: a multigraph, its parameters and random stream.
 */
typedef struct ErChain ErChain;

/**
 * Opaque multigraph.
 */
typedef struct ErState ErState;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copy the last error message of this thread into `buf` (NUL-terminated,
 * truncated to `len`). Returns the full message length, or 0 if none.
 *
 * # Safety
 * `buf` must be null or valid for `len` bytes.
 */
uintptr_t er_last_error(char *buf, uintptr_t len);

/**
 * Build a multigraph on `n` vertices from `m` edges given as `2m`
 * zero-based endpoint labels.
 *
 * # Safety
 * `ends` must be valid for `2 * m` reads; `out` must be writable.
 */
ErStatus er_state_from_ends(uintptr_t n, const uint32_t *ends, uintptr_t m, ErState **out);

/**
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
ErStatus er_state_load(const char *path, ErState **out);

/**
 * # Safety
 * `state` must come from this library; `path` must be NUL-terminated.
 */
ErStatus er_state_save(const ErState *state, const char *path);

/**
 * # Safety
 * `state` must be null or come from this library, and not be used again.
 */
void er_state_free(ErState *state);

/**
 * # Safety
 * `state` must come from this library; `n` and `m` must be writable.
 */
ErStatus er_state_size(const ErState *state, uintptr_t *n, uintptr_t *m);

/**
 * Copy the degree vector (loops count twice) into `out[0..len]`.
 *
 * # Safety
 * `state` must come from this library; `out` must be valid for `len` writes.
 */
ErStatus er_state_degrees(const ErState *state, uint32_t *out, uintptr_t len);

/**
 * Adjacency entry `B(a, b)`, zero-based; the diagonal counts loops twice.
 *
 * # Safety
 * `state` must come from this library; `out` must be writable.
 */
ErStatus er_state_adjacency(const ErState *state, uint32_t a, uint32_t b, uint32_t *out);

/**
 * Start a chain from a copy of `state`.
 *
 * # Safety
 * `state` must come from this library; `out` must be writable.
 */
ErStatus er_chain_new(const ErState *state, double kappa, uint64_t seed, ErChain **out);

/**
 * Advance the chain by `steps` transitions.
 *
 * # Safety
 * `chain` must come from this library.
 */
ErStatus er_chain_step(ErChain *chain, uint64_t steps);

/**
 * Steps taken so far.
 *
 * # Safety
 * `chain` must come from this library; `out` must be writable.
 */
ErStatus er_chain_steps(const ErChain *chain, uint64_t *out);

/**
 * Copy the chain's current multigraph into a new state handle.
 *
 * # Safety
 * `chain` must come from this library; `out` must be writable.
 */
ErStatus er_chain_state(const ErChain *chain, ErState **out);

/**
 * # Safety
 * `chain` must be null or come from this library, and not be used again.
 */
void er_chain_free(ErChain *chain);

/**
 * M/M/inf transition probability `q(t, h, k, mu)`.
 *
 * # Safety
 * `out` must be writable.
 */
ErStatus er_queue_kernel(double t, uint64_t h, uint64_t k, double mu, double *out);

/**
 * CIR transition density from `z` to `y` over time `t`.
 *
 * # Safety
 * `out` must be writable.
 */
ErStatus er_cir_density(double kappa, double rho, double t, double z, double y, double *out);

/**
 * Stationary degree-scale multigraphon `W-hat_inf(x, y, k)`.
 *
 * # Safety
 * `out` must be writable.
 */
ErStatus er_w_hat_infty(double kappa, double rho, double x, double y, uint64_t k, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* EDGE_RECONNECT_H */
