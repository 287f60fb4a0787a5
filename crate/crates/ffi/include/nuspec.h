#ifndef NUSPEC_H
#define NUSPEC_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Reality classification of a spectrum.
 */
typedef enum NuRealityFlag {
  NuRealityFlag_AllReal = 0,
  NuRealityFlag_ConditionallyReal = 1,
  NuRealityFlag_Complex = 2,
} NuRealityFlag;

/**
 * Result codes of the C API.
 */
typedef enum NuStatus {
  NuStatus_Ok = 0,
  NuStatus_NullPointer = 1,
  NuStatus_InvalidUtf8 = 2,
  NuStatus_InvalidSpec = 3,
  NuStatus_InvalidArgument = 4,
  NuStatus_Singularity = 5,
  NuStatus_Unsupported = 6,
  NuStatus_NotConverged = 7,
  NuStatus_NoAdmissibleBranch = 8,
  NuStatus_IndexOutOfRange = 9,
  NuStatus_Panic = 10,
} NuStatus;

/**
 * Opaque potential handle.
 */
typedef struct NuPotential NuPotential;

/**
 * Opaque spectrum handle.
 */
typedef struct NuSpectrum NuSpectrum;

/**
 * Complex number with the memory layout of C99 `double _Complex`.
 */
typedef struct NuComplex {
  double re;
  double im;
} NuComplex;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread (empty if none).
 *
 * The pointer stays valid until the next failing call on the same thread.
 */
const char *nu_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *nu_version(void);

/**
 * Parses a JSON potential spec.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` a valid pointer.
 */
enum NuStatus nu_potential_from_json(const char *json, struct NuPotential **out);

/**
 * Canonical JSON of the potential spec; release with [`nu_string_free`].
 *
 * # Safety
 * `potential` must come from [`nu_potential_from_json`]; `out` must be valid.
 */
enum NuStatus nu_potential_to_json(const struct NuPotential *potential, char **out);

/**
 * Releases a potential handle. Null is ignored.
 *
 * # Safety
 * `potential` must come from [`nu_potential_from_json`] and not be used afterwards.
 */
void nu_potential_free(struct NuPotential *potential);

/**
 * `V(x)`.
 *
 * # Safety
 * `potential` must be a live handle and `out` a valid pointer.
 */
enum NuStatus nu_potential_evaluate(const struct NuPotential *potential,
                                    double x,
                                    struct NuComplex *out);

/**
 * Closed-form levels `0..=n_max`.
 *
 * # Safety
 * `potential` must be a live handle and `out` a valid pointer.
 */
enum NuStatus nu_spectrum_closed_form(const struct NuPotential *potential,
                                      uint32_t n_max,
                                      struct NuSpectrum **out);

/**
 * Levels `0..=n_max` from the numerical Nikiforov-Uvarov pipeline.
 *
 * # Safety
 * `potential` must be a live handle and `out` a valid pointer.
 */
enum NuStatus nu_spectrum_numeric(const struct NuPotential *potential,
                                  uint32_t n_max,
                                  struct NuSpectrum **out);

/**
 * Releases a spectrum handle. Null is ignored.
 *
 * # Safety
 * `spectrum` must come from a `nu_spectrum_*` constructor and not be used afterwards.
 */
void nu_spectrum_free(struct NuSpectrum *spectrum);

/**
 * Number of levels.
 *
 * # Safety
 * `spectrum` must be a live handle and `out` a valid pointer.
 */
enum NuStatus nu_spectrum_len(const struct NuSpectrum *spectrum, uintptr_t *out);

/**
 * Energy of the level at position `index`.
 *
 * # Safety
 * `spectrum` must be a live handle and `out` a valid pointer.
 */
enum NuStatus nu_spectrum_energy(const struct NuSpectrum *spectrum,
                                 uintptr_t index,
                                 struct NuComplex *out);

/**
 * Reality flag of the spectrum.
 *
 * # Safety
 * `spectrum` must be a live handle and `out` a valid pointer.
 */
enum NuStatus nu_spectrum_reality_flag(const struct NuSpectrum *spectrum, enum NuRealityFlag *out);

/**
 * JSON of the spectrum; release with [`nu_string_free`].
 *
 * # Safety
 * `spectrum` must be a live handle and `out` a valid pointer.
 */
enum NuStatus nu_spectrum_to_json(const struct NuSpectrum *spectrum, char **out);

/**
 * Releases a string returned by the library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not be used afterwards.
 */
void nu_string_free(char *s);

/**
 * Finite-difference eigenvalues on the natural domain of the potential with
 * `n_grid` interior points and truncation length `length`.
 *
 * The lowest `min(capacity, total)` eigenvalues (ordered by real part) are
 * copied to `out`; `total` receives the full count. `out` may be null when
 * `capacity` is 0.
 *
 * # Safety
 * `potential` must be a live handle, `out` must hold `capacity` elements and
 * `total` must be valid.
 */
enum NuStatus nu_oracle_eigenvalues(const struct NuPotential *potential,
                                    uintptr_t n_grid,
                                    double length,
                                    struct NuComplex *out,
                                    uintptr_t capacity,
                                    uintptr_t *total);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NUSPEC_H */
