#ifndef GLAUBER_H
#define GLAUBER_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum GlauberStatus {
  GLAUBER_STATUS_OK = 0,
  GLAUBER_STATUS_NULL_POINTER = 1,
  GLAUBER_STATUS_INVALID_ARGUMENT = 2,
  GLAUBER_STATUS_CONFIG = 3,
  GLAUBER_STATUS_NUMERICAL = 4,
  GLAUBER_STATUS_IO = 5,
  GLAUBER_STATUS_PANIC = 6,
} GlauberStatus;

// A parsed experiment configuration.
typedef struct GlauberExperiment GlauberExperiment;

// A finite lattice model built from an experiment.
typedef struct GlauberLattice GlauberLattice;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null.
//
// The pointer stays valid until the next failing call on the same thread.
const char *glauber_last_error(void);

// Library version as a static NUL-terminated string.
const char *glauber_version(void);

// Parses a TOML configuration. Relative paths inside it resolve against the
// working directory.
//
// # Safety
// `toml` must be a NUL-terminated string; `out` must be writable.
enum GlauberStatus glauber_experiment_from_toml(const char *toml, struct GlauberExperiment **out);

// # Safety
// `exp` must come from [`glauber_experiment_from_toml`] and not be freed twice.
void glauber_experiment_free(struct GlauberExperiment *exp);

// SHA-256 of the effective configuration as 64 hex digits plus NUL.
//
// # Safety
// `exp` must be a live handle and `buf` must hold `len` bytes.
enum GlauberStatus glauber_experiment_hash(const struct GlauberExperiment *exp,
                                           char *buf,
                                           size_t len);

// Runs a command by name (`check-potential`, `verify-identities`, `gap`,
// `simulate`, `estimate-gap`), writing its files to the configured output
// directory. The JSON report goes to `json_out` (free with
// [`glauber_string_free`]) and the pass flag to `passed`.
//
// # Safety
// `exp` must be a live handle, `command` a NUL-terminated string, and
// `json_out` and `passed` writable.
enum GlauberStatus glauber_run(const struct GlauberExperiment *exp,
                               const char *command,
                               char **json_out,
                               int *passed);

// # Safety
// `s` must come from this library and not be freed twice.
void glauber_string_free(char *s);

// Builds the lattice model of an experiment (its `[lattice]` section).
//
// # Safety
// `exp` must be a live handle and `out` writable.
enum GlauberStatus glauber_lattice_new(const struct GlauberExperiment *exp,
                                       struct GlauberLattice **out);

// # Safety
// `lat` must come from [`glauber_lattice_new`] and not be freed twice.
void glauber_lattice_free(struct GlauberLattice *lat);

// Number of states with positive weight.
//
// # Safety
// `lat` must be a live handle and `out` writable.
enum GlauberStatus glauber_lattice_state_count(const struct GlauberLattice *lat, size_t *out);

// Exact spectral gap of the lattice generator.
//
// # Safety
// `lat` must be a live handle and `gap` writable.
enum GlauberStatus glauber_lattice_gap(const struct GlauberLattice *lat, double *gap);

// Coercivity constant certified by the kernel condition on every state.
//
// # Safety
// `lat` must be a live handle and `c` writable.
enum GlauberStatus glauber_lattice_certificate(const struct GlauberLattice *lat, double *c);

// Fourier positivity test of `n` samples of an even function on a periodic
// grid of length `length`: `n` a power of two, sample `k` at `-length/2 + k length / n`.
//
// # Safety
// `samples` must point to `n` doubles; `passed` and `min_real` must be writable.
enum GlauberStatus glauber_check_positive_definite(const double *samples,
                                                   size_t n,
                                                   double length,
                                                   double tol,
                                                   int *passed,
                                                   double *min_real);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GLAUBER_H */
