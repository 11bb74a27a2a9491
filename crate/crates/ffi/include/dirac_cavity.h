#ifndef DIRAC_CAVITY_H
#define DIRAC_CAVITY_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Values accepted by the `kind` parameter of [`dc_set_coefficient`].
typedef enum DcCoefficientKind {
  DC_COEFFICIENT_KIND_ALPHA = 0,
  DC_COEFFICIENT_KIND_BETA = 1,
} DcCoefficientKind;

// Values accepted by the `region` parameters.
typedef enum DcRegion {
  DC_REGION_LEFT = 0,
  DC_REGION_RIGHT = 1,
} DcRegion;

// Result code of every call.
typedef enum DcStatus {
  DC_STATUS_OK = 0,
  DC_STATUS_INVALID_ARGUMENT = 1,
  DC_STATUS_NUMERICAL_FAILURE = 2,
  DC_STATUS_IO = 3,
  DC_STATUS_CACHE_INVALID = 4,
  DC_STATUS_PARSE = 5,
  DC_STATUS_NULL_POINTER = 6,
  DC_STATUS_PANIC = 7,
} DcStatus;

// Opaque coefficient set.
typedef struct DcBogoliubovSet DcBogoliubovSet;

// Mirror of the library configuration. Fill it with [`dc_config_default`]
// before changing individual fields.
typedef struct DcFieldConfig {
  double mass_times_r;
  double split_fraction;
  size_t n_local;
  size_t n_global;
  double root_tol;
  double quad_tol;
  double degeneracy_tol;
} DcFieldConfig;

typedef struct DcComplex {
  double re;
  double im;
} DcComplex;

// Maximum deviations of the truncated unitarity sums.
typedef struct DcConditionReport {
  double cond1_max_err;
  double cond2_max_err;
  double cond3_combined_max_err;
  double cond4_max_err;
  double cond3_unprimed_diagonal_max;
} DcConditionReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread; empty after a success.
// The pointer stays valid until the next call on the same thread.
const char *dc_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *dc_version(void);

// Writes the default configuration into `out`.
//
// # Safety
// `out` must be null or point to writable memory for one `DcFieldConfig`.
enum DcStatus dc_config_default(struct DcFieldConfig *out);

// First `count` roots `P_I` of the spectrum condition on an interval of
// length `length`, written to `out_roots[0..count]`.
//
// # Safety
// `out_roots` must point to `count` writable doubles.
enum DcStatus dc_solve_spectrum(double mass_times_r,
                                double length,
                                size_t count,
                                double tol,
                                double *out_roots);

// Builds the coefficient matrices for `config` and stores a new handle in
// `*out`.
//
// # Safety
// `config` must point to a valid `DcFieldConfig` and `out` to writable
// memory for one pointer.
enum DcStatus dc_set_build(const struct DcFieldConfig *config, struct DcBogoliubovSet **out);

// Releases a handle. Null is accepted.
//
// # Safety
// `set` must be null or a handle not yet freed.
void dc_set_free(struct DcBogoliubovSet *set);

// Truncations of a set.
//
// # Safety
// `set` must be a live handle; the outputs must be writable.
enum DcStatus dc_set_dimensions(const struct DcBogoliubovSet *set,
                                size_t *out_n_local,
                                size_t *out_n_global);

// Coefficient `α` or `β` (primed for the right region) for local index `i`
// and global index `big_i`, both 1-based.
//
// # Safety
// `set` must be a live handle and `out` writable.
enum DcStatus dc_set_coefficient(const struct DcBogoliubovSet *set,
                                 uint32_t region,
                                 uint32_t kind,
                                 size_t i,
                                 size_t big_i,
                                 struct DcComplex *out);

// Vacuum occupations `⟨n_i⟩` of the local modes of `region`; `len` must be
// at least `n_local`.
//
// # Safety
// `set` must be a live handle and `out` must hold `len` doubles.
enum DcStatus dc_set_local_occupation(const struct DcBogoliubovSet *set,
                                      uint32_t region,
                                      double *out,
                                      size_t len);

// Occupations `⟨N_I⟩` of the global modes in the local vacuum; `len` must be
// at least `n_global`.
//
// # Safety
// `set` must be a live handle and `out` must hold `len` doubles.
enum DcStatus dc_set_removed_mirror_spectrum(const struct DcBogoliubovSet *set,
                                             double *out,
                                             size_t len);

// Unitarity condition errors for indices up to `index_range`.
//
// # Safety
// `set` must be a live handle and `out` writable.
enum DcStatus dc_set_check_conditions(const struct DcBogoliubovSet *set,
                                      size_t index_range,
                                      struct DcConditionReport *out);

// Writes the coefficient cache for `set` to `path`.
//
// # Safety
// `set` must be a live handle and `path` a NUL-terminated string.
enum DcStatus dc_set_cache_store(const struct DcBogoliubovSet *set, const char *path);

// Loads a cache written for exactly `config`; returns `CacheInvalid` when
// the file belongs to another configuration.
//
// # Safety
// `path` must be a NUL-terminated string, `config` valid and `out` writable.
enum DcStatus dc_set_cache_load(const char *path,
                                const struct DcFieldConfig *config,
                                struct DcBogoliubovSet **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DIRAC_CAVITY_H */
