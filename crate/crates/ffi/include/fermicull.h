#ifndef FERMICULL_H
#define FERMICULL_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Outcome of a call. Validation and numerical codes match the CLI exit codes.
 */
typedef enum FcStatus {
  FC_STATUS_OK = 0,
  FC_STATUS_VALIDATION = 2,
  FC_STATUS_NUMERICAL = 3,
  FC_STATUS_NULL_POINTER = 4,
  FC_STATUS_OUT_OF_RANGE = 5,
  FC_STATUS_PANIC = 6,
} FcStatus;

/**
 * Opaque fidelity map.
 */
typedef struct FcFidelityMap FcFidelityMap;

/**
 * Opaque scanned spectrum.
 */
typedef struct FcSpectrum FcSpectrum;

typedef struct FcTrapGeometry {
  double x_min;
  double v_min;
  double edge;
  double v_edge;
  double depth;
} FcTrapGeometry;

typedef struct FcResonance {
  double e0;
  double gamma;
  double tau;
  double gamma_phase;
  double fit_residual_lorentz;
  double fit_residual_gauss;
  /**
   * 1 when the width comes from the Lorentzian fit, 0 when only the phase slope resolved it.
   */
  int32_t width_from_fit;
} FcResonance;

typedef struct FcCullingPoint {
  double z;
  double f;
  double e0;
  double e1;
  double gamma0;
  double gamma1;
  double lifetime_ratio;
  double t_hold;
  double ground_loss;
  double log10_loss;
} FcCullingPoint;

typedef struct FcUnits {
  double mass;
  double omega;
  double x0;
  double e0;
  double t0;
  double f0;
} FcUnits;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *fc_version(void);

/**
 * Copy the last error message (NUL-terminated, truncated to `len`) into `buf`.
 * Returns the full message length excluding the terminator.
 *
 * # Safety
 * `buf` must be null or point to at least `len` writable bytes.
 */
size_t fc_last_error(char *buf, size_t len);

/**
 * # Safety
 * `geometry` must be null or valid for writes.
 */
enum FcStatus fc_trap_geometry(double z, double f, struct FcTrapGeometry *geometry);

/**
 * Scan P(E) on [e_min, e_max] and detect resonances.
 *
 * # Safety
 * `spectrum` must be null or valid for writes; on success it receives a
 * handle to release with `fc_spectrum_free`.
 */
enum FcStatus fc_spectrum_scan(double z,
                               double f,
                               double e_min,
                               double e_max,
                               size_t base_points,
                               struct FcSpectrum **spectrum);

/**
 * # Safety
 * `spectrum` must be null or a handle from `fc_spectrum_scan` not yet freed.
 */
void fc_spectrum_free(struct FcSpectrum *spectrum);

/**
 * # Safety
 * `spectrum` must be a live handle; `count` must be valid for writes.
 */
enum FcStatus fc_spectrum_sample_count(const struct FcSpectrum *spectrum, size_t *count);

/**
 * Energy, ln P and matching phase of sample `index`.
 *
 * # Safety
 * `spectrum` must be a live handle; the out-pointers must be valid for writes.
 */
enum FcStatus fc_spectrum_sample(const struct FcSpectrum *spectrum,
                                 size_t index,
                                 double *energy,
                                 double *ln_p,
                                 double *phase);

/**
 * # Safety
 * `spectrum` must be a live handle; `count` must be valid for writes.
 */
enum FcStatus fc_spectrum_peak_count(const struct FcSpectrum *spectrum, size_t *count);

/**
 * Fitted resonance for peak `index`.
 *
 * # Safety
 * `spectrum` must be a live handle; `resonance` must be valid for writes.
 */
enum FcStatus fc_spectrum_resonance(const struct FcSpectrum *spectrum,
                                    size_t index,
                                    struct FcResonance *resonance);

/**
 * # Safety
 * `point` must be valid for writes.
 */
enum FcStatus fc_culling_point(double z, double f, double residual, struct FcCullingPoint *point);

/**
 * # Safety
 * `map` must be valid for writes; release the handle with `fc_fidelity_map_free`.
 */
enum FcStatus fc_fidelity_map(double z_min,
                              double z_max,
                              double f_min,
                              double f_max,
                              size_t nz,
                              size_t nf,
                              double residual,
                              struct FcFidelityMap **map);

/**
 * # Safety
 * `map` must be null or a handle from `fc_fidelity_map` not yet freed.
 */
void fc_fidelity_map_free(struct FcFidelityMap *map);

/**
 * Culling point at grid cell (iz, jf); cells whose computation failed report `Numerical`.
 *
 * # Safety
 * `map` must be a live handle; `point` must be valid for writes.
 */
enum FcStatus fc_fidelity_map_cell(const struct FcFidelityMap *map,
                                   size_t iz,
                                   size_t jf,
                                   struct FcCullingPoint *point);

/**
 * Copy the map's CSV rendering into `buf` (NUL-terminated, truncated to `len`).
 * `needed` receives the full length excluding the terminator.
 *
 * # Safety
 * `map` must be a live handle; `buf` null or valid for `len` bytes; `needed` valid for writes.
 */
enum FcStatus fc_fidelity_map_csv(const struct FcFidelityMap *map,
                                  char *buf,
                                  size_t len,
                                  size_t *needed);

/**
 * Lowest two double-well levels at grid spacing `spacing` (walls at d/2 + 8).
 *
 * # Safety
 * Out-pointers must be valid for writes.
 */
enum FcStatus fc_double_well(double d,
                             double f,
                             double spacing,
                             double *e0,
                             double *e1,
                             double *ground_centroid);

/**
 * Pairing gap and thermal k = 0 occupation of the Fermi gas.
 *
 * # Safety
 * Out-pointers must be valid for writes.
 */
enum FcStatus fc_dfg(double kf_a, double t_over_tf, double *gap, double *occupation);

/**
 * Oscillator units for 6Li at trap frequency `freq_hz`.
 *
 * # Safety
 * `units` must be valid for writes.
 */
enum FcStatus fc_units_lithium6(double freq_hz, struct FcUnits *units);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FERMICULL_H */
