#ifndef STEKLOV_H
#define STEKLOV_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// Result codes. The nonzero values match the exit codes of the command line
// tool, plus two codes specific to the C boundary.
typedef enum StkStatus {
  STK_STATUS_OK = 0,
  STK_STATUS_NULL_POINTER = 1,
  STK_STATUS_INVALID_INPUT = 2,
  STK_STATUS_NUMERICAL_FAILURE = 3,
  STK_STATUS_INVARIANT_VIOLATION = 4,
  STK_STATUS_INDEX_OUT_OF_RANGE = 5,
  STK_STATUS_PANIC = 6,
} StkStatus;

// Opaque rational map handle.
typedef struct StkMap StkMap;

// Opaque spectrum handle. Holds the map it was computed from.
typedef struct StkSpectrum StkSpectrum;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null if none.
// The pointer stays valid until the next failing call on this thread.
const char *stk_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *stk_version(void);

// Builds R = P/Q from ascending coefficient arrays.
//
// # Safety
// `num` and `den` must point to `num_len` and `den_len` readable doubles,
// and `out` must be a valid pointer to writable storage.
enum StkStatus stk_map_new(const double *num,
                           uintptr_t num_len,
                           const double *den,
                           uintptr_t den_len,
                           struct StkMap **out);

// Builds the quadratic map x + (x² − 1)/(2C) for C > 1.
//
// # Safety
// `out` must be a valid pointer to writable storage.
enum StkStatus stk_map_quadratic(double c, struct StkMap **out);

// Builds a degree-three map of the supported component from the modulus
// `a` and a window `(f0, f1)` inside (0, 1).
//
// # Safety
// `out` must be a valid pointer to writable storage.
enum StkStatus stk_map_ps3(double a, double f0, double f1, struct StkMap **out);

// Degree of the map.
//
// # Safety
// `map` must be null or a live handle.
uintptr_t stk_map_degree(const struct StkMap *map);

// Evaluates R(x). A pole yields infinity.
//
// # Safety
// `map` must be a live handle and `out` writable.
enum StkStatus stk_map_eval(const struct StkMap *map, double x, double *out);

// Releases a map handle. Null is accepted.
//
// # Safety
// `map` must be null or a handle not yet freed.
void stk_map_free(struct StkMap *map);

// Solves the Galerkin problem of size `n` and classifies every pair as
// symmetric or antisymmetric.
//
// # Safety
// `map` must be a live handle and `out` writable.
enum StkStatus stk_spectrum_solve(const struct StkMap *map, uintptr_t n, struct StkSpectrum **out);

// Number of real eigenpairs, converged or not.
//
// # Safety
// `s` must be null or a live handle.
uintptr_t stk_spectrum_len(const struct StkSpectrum *s);

// Whether the truncation flagged a convergence warning.
//
// # Safety
// `s` must be null or a live handle.
bool stk_spectrum_convergence_warning(const struct StkSpectrum *s);

// Eigenvalue of pair `index`.
//
// # Safety
// `s` must be a live handle and `out` writable.
enum StkStatus stk_spectrum_lambda(const struct StkSpectrum *s, uintptr_t index, double *out);

// Symmetry class of pair `index`: 1 antisymmetric, 0 symmetric, −1
// unclassified.
//
// # Safety
// `s` must be a live handle and `out` writable.
enum StkStatus stk_spectrum_symmetry(const struct StkSpectrum *s, uintptr_t index, int32_t *out);

// Copies up to `cap` Chebyshev coefficients of pair `index` into `buf` and
// stores the full count in `len`. Passing `cap = 0` queries the length.
//
// # Safety
// `buf` must hold `cap` doubles, `len` must be writable.
enum StkStatus stk_spectrum_coefficients(const struct StkSpectrum *s,
                                         uintptr_t index,
                                         double *buf,
                                         uintptr_t cap,
                                         uintptr_t *len);

// Evaluates eigenfunction `index` at `x` in [−1, 1].
//
// # Safety
// `s` must be a live handle and `out` writable.
enum StkStatus stk_spectrum_eval(const struct StkSpectrum *s,
                                 uintptr_t index,
                                 double x,
                                 double *out);

// Runs the full monodromy analysis on pair `index` and returns it as a JSON
// document in `*json`, to be released with [`stk_string_free`]. A report
// whose invariant checks fail is still returned, with status
// `INVARIANT_VIOLATION`.
//
// # Safety
// `s` must be a live handle and `json` writable.
enum StkStatus stk_spectrum_analyze(const struct StkSpectrum *s, uintptr_t index, char **json);

// Releases a spectrum handle. Null is accepted.
//
// # Safety
// `s` must be null or a handle not yet freed.
void stk_spectrum_free(struct StkSpectrum *s);

// Writes the three real moduli of the pants decomposition of `map` into
// `out[0..3]`.
//
// # Safety
// `map` must be a live handle and `out` must hold three doubles.
enum StkStatus stk_pants_moduli(const struct StkMap *map, double *out);

// Releases a string returned by this library. Null is accepted.
//
// # Safety
// `s` must be null or a string obtained from this library and not yet freed.
void stk_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* STEKLOV_H */
