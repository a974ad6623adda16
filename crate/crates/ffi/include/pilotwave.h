#ifndef PILOTWAVE_H
#define PILOTWAVE_H

/* Generated by cbindgen from crates/ffi/src. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum PwStatus {
  PW_STATUS_OK = 0,
  // The call completed but a checked property failed.
  PW_STATUS_CHECK_FAILED = 1,
  PW_STATUS_INVALID_ARGUMENT = 2,
  // Numerical failure (non-finite values, instability, failed ensemble).
  PW_STATUS_NUMERICAL = 3,
  PW_STATUS_NULL_POINTER = 4,
  // A Rust panic was caught at the boundary.
  PW_STATUS_PANIC = 5,
} PwStatus;

// Opaque maximally entangled two-system state.
typedef struct PwEntangledState PwEntangledState;

// Opaque ray set with its orthogonality contexts.
typedef struct PwHypergraph PwHypergraph;

// Opaque wave function on a 1D grid.
typedef struct PwWaveFunction PwWaveFunction;

typedef struct PwChshResult {
  // `E(a,b), E(a,b'), E(a',b), E(a',b')`.
  double correlations[4];
  double s_exact;
  double s_sampled;
  double sigma;
} PwChshResult;

typedef struct PwSearchStats {
  uint64_t nodes;
  uint64_t backtracks;
  size_t max_depth;
  bool complete;
} PwSearchStats;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version, a static NUL-terminated string.
const char *pw_version(void);

// Copies the calling thread's last error message into `buf` (NUL-terminated,
// truncated to `len - 1` bytes) and returns the full message length, 0 if none.
//
// # Safety
// `buf` must be null or valid for `len` bytes.
size_t pw_last_error_message(char *buf, size_t len);

// Releases a string returned by this library.
//
// # Safety
// `s` must be null or a string returned by this library, not yet freed.
void pw_string_free(char *s);

// Builds a wave function on `[lo, hi)` with `points` nodes from an initializer
// such as `gaussian(center=0, width=1, k=0)`.
//
// # Safety
// `initializer` must be a NUL-terminated string; `out` must be valid for writes.
enum PwStatus pw_wavefunction_new(double lo,
                                  double hi,
                                  size_t points,
                                  const char *initializer,
                                  struct PwWaveFunction **out);

// Evolves `psi` for `steps` steps of `dt` under a potential such as `free` or
// `harmonic(omega=1)`; the result is a new handle.
//
// # Safety
// `psi` must be a live handle, `potential` a NUL-terminated string, `out` valid for writes.
enum PwStatus pw_wavefunction_evolve(const struct PwWaveFunction *psi,
                                     const char *potential,
                                     double dt,
                                     size_t steps,
                                     struct PwWaveFunction **out);

// Number of grid nodes.
//
// # Safety
// `psi` must be null or a live handle.
size_t pw_wavefunction_len(const struct PwWaveFunction *psi);

// Writes the L2 norm and the position spread.
//
// # Safety
// `psi` must be a live handle; `norm` and `std_position` valid for writes.
enum PwStatus pw_wavefunction_moments(const struct PwWaveFunction *psi,
                                      double *norm,
                                      double *std_position);

// Copies `|psi|^2` at the grid nodes into `buf`, which must hold exactly `len` = node count values.
//
// # Safety
// `psi` must be a live handle; `buf` valid for `len` writes.
enum PwStatus pw_wavefunction_density(const struct PwWaveFunction *psi, double *buf, size_t len);

// # Safety
// `psi` must be null or a live handle, not used afterwards.
void pw_wavefunction_free(struct PwWaveFunction *psi);

// `(|up down> - |down up>) / sqrt 2`.
//
// # Safety
// `out` must be valid for writes.
enum PwStatus pw_state_singlet(struct PwEntangledState **out);

// `sum_n e_n (x) e_n / sqrt n`.
//
// # Safety
// `out` must be valid for writes.
enum PwStatus pw_state_standard(size_t n, struct PwEntangledState **out);

// Maximally entangled state with two seeded random bases.
//
// # Safety
// `out` must be valid for writes.
enum PwStatus pw_state_random(size_t n, uint64_t seed, struct PwEntangledState **out);

// Factor dimension, 0 for a null handle.
//
// # Safety
// `state` must be null or a live handle.
size_t pw_state_dim(const struct PwEntangledState *state);

// # Safety
// `state` must be null or a live handle, not used afterwards.
void pw_state_free(struct PwEntangledState *state);

// Writes the factor-2 correspondent of the factor-1 operator `(re, im)` into
// `(out_re, out_im)`, all `n x n` row-major; the imaginary pointers may be null.
//
// # Safety
// Non-null pointers must be valid for `n * n` values; `state` must be a live handle.
enum PwStatus pw_correspond(const struct PwEntangledState *state,
                            const double *re,
                            const double *im,
                            size_t n,
                            double *out_re,
                            double *out_im);

// Samples `trials` EPR measurements of the operator and its correspondent.
// `first_side` is 1 or 2. Outcome arrays may be null; otherwise they receive
// `trials` values each. `agreement_out` receives the fraction of equal outcomes.
//
// # Safety
// Non-null pointers must be valid for the stated lengths; `state` must be a live handle.
enum PwStatus pw_epr_sample(const struct PwEntangledState *state,
                            const double *re,
                            const double *im,
                            size_t n,
                            size_t trials,
                            uint64_t seed,
                            uint32_t first_side,
                            double *outcome_1,
                            double *outcome_2,
                            double *agreement_out);

// CHSH on the singlet for analyzer angles `[a, b, a', b']`.
//
// # Safety
// `angles` must point to 4 values; `out` must be valid for writes.
enum PwStatus pw_chsh(const double *angles, size_t trials, uint64_t seed, struct PwChshResult *out);

// Largest `|S|` over the 16 deterministic local strategies.
int32_t pw_local_bound(void);

// The 33-ray Peres set with triads and orthogonal pairs as contexts.
//
// # Safety
// `out` must be valid for writes.
enum PwStatus pw_hypergraph_peres33(struct PwHypergraph **out);

// Rays given as `n_rays` consecutive `(x, y, z)` triples; contexts are derived
// from orthogonality.
//
// # Safety
// `xyz` must point to `3 * n_rays` values; `out` must be valid for writes.
enum PwStatus pw_hypergraph_from_rays(const double *xyz, size_t n_rays, struct PwHypergraph **out);

// Parses the text of a ray file.
//
// # Safety
// `text` must be NUL-terminated; `out` must be valid for writes.
enum PwStatus pw_hypergraph_parse(const char *source, struct PwHypergraph **out);

// Number of rays, 0 for a null handle.
//
// # Safety
// `hg` must be null or a live handle.
size_t pw_hypergraph_rays(const struct PwHypergraph *hg);

// # Safety
// `hg` must be null or a live handle, not used afterwards.
void pw_hypergraph_free(struct PwHypergraph *hg);

// Exhaustive 0/1 value-map search. `witness` may be null; otherwise it must hold
// one byte per ray and receives the assignment when one exists.
//
// # Safety
// `hg` must be a live handle; non-null pointers must be valid for writes.
enum PwStatus pw_ks_search(const struct PwHypergraph *hg,
                           bool *satisfiable,
                           uint8_t *witness,
                           struct PwSearchStats *stats);

// Number of the 512 sign assignments to the Mermin square that satisfy all six lines.
//
// # Safety
// `count` must be valid for writes.
enum PwStatus pw_mermin_satisfying(size_t *count);

// Runs the composed nonlocality argument and returns its report as JSON.
//
// # Safety
// `report_json` must be valid for writes; release the string with [`pw_string_free`].
enum PwStatus pw_schroedinger_demo(size_t dim, uint64_t seed, size_t trials, char **report_json);

// Runs `double-slit`, `stern-gerlach` or `box` with the default config overlaid by
// `config_json` (may be null) and returns the summary JSON. Returns
// `PW_STATUS_CHECK_FAILED` (summary still written) when a check fails.
//
// # Safety
// `name` must be NUL-terminated, `config_json` null or NUL-terminated, and
// `summary_json` valid for writes; release the string with [`pw_string_free`].
enum PwStatus pw_run_experiment(const char *name, const char *config_json, char **summary_json);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PILOTWAVE_H */
