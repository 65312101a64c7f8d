#ifndef SPHEREMAX_H
#define SPHEREMAX_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SmxRegion {
  SMX_REGION_BOUNDED_RHOMBUS = 0,
  SMX_REGION_BOUNDED_BANACH = 1,
  SMX_REGION_UNBOUNDED = 2,
  SMX_REGION_UNKNOWN = 3,
} SmxRegion;

typedef enum SmxStatus {
  SMX_STATUS_OK = 0,
  SMX_STATUS_NULL_POINTER = 1,
  SMX_STATUS_INVALID_ARGUMENT = 2,
  SMX_STATUS_DOMAIN = 3,
  SMX_STATUS_GRID_MISMATCH = 4,
  SMX_STATUS_NON_CONVERGENCE = 5,
  SMX_STATUS_DIVERGENT = 6,
  SMX_STATUS_IO = 7,
  SMX_STATUS_FORMAT = 8,
  SMX_STATUS_BUFFER_TOO_SMALL = 9,
  SMX_STATUS_PANIC = 10,
} SmxStatus;

typedef enum SmxSymbolKind {
  SMX_SYMBOL_KIND_FULL = 0,
  SMX_SYMBOL_KIND_PIECE = 1,
  SMX_SYMBOL_KIND_DIAGONAL = 2,
  SMX_SYMBOL_KIND_OFF_DIAGONAL = 3,
  SMX_SYMBOL_KIND_EULER_PIECE = 4,
  SMX_SYMBOL_KIND_EULER_DIAGONAL = 5,
  SMX_SYMBOL_KIND_EULER_OFF_DIAGONAL = 6,
} SmxSymbolKind;

/**
 * Opaque periodic grid function.
 */
typedef struct SmxGrid SmxGrid;

/**
 * Opaque bilinear multiplier.
 */
typedef struct SmxSymbol SmxSymbol;

typedef struct SmxFit {
  double slope;
  double intercept;
  double r_squared;
} SmxFit;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the last error message of this thread into `buf` with a trailing
 * NUL, truncating if needed. Returns the full message length in bytes.
 *
 * # Safety
 * `buf` must be null or valid for `len` bytes.
 */
size_t smx_last_error(char *buf, size_t len);

/**
 * `δ_n = (2n - 15)/10`.
 */
double smx_delta_n(uint32_t n);

/**
 * # Safety
 * `status` must be valid for writes.
 */
enum SmxStatus smx_classify(uint32_t n, double inv_p1, double inv_p2, enum SmxRegion *status);

/**
 * Writes the four rhombus vertices as `(1/p1, 1/p2, 1/p)` triples into
 * `coords[0..12]`.
 *
 * # Safety
 * `coords` must be valid for 12 writes.
 */
enum SmxStatus smx_rhombus_vertices(uint32_t n, double *coords);

/**
 * # Safety
 * `value` must be valid for writes.
 */
enum SmxStatus smx_bessel_j(double nu, double x, double *value);

/**
 * Fourier transform of surface measure on the unit sphere of ℝ^d at radius `r`.
 *
 * # Safety
 * `value` must be valid for writes.
 */
enum SmxStatus smx_dsigma_hat(size_t d, double r, double *value);

/**
 * # Safety
 * `value` must be valid for writes.
 */
enum SmxStatus smx_dsigma_hat_deriv(size_t d, double r, double *value);

/**
 * New zero grid on `[0, period)^n` with `size` points per axis.
 *
 * # Safety
 * `grid` must be valid for writes.
 */
enum SmxStatus smx_grid_new(size_t n, size_t size, double period, struct SmxGrid **grid);

/**
 * Grid from `size^n` real samples in row-major order.
 *
 * # Safety
 * `values` must hold `len` doubles; `grid` must be valid for writes.
 */
enum SmxStatus smx_grid_from_values(size_t n,
                                    size_t size,
                                    double period,
                                    const double *values,
                                    size_t len,
                                    struct SmxGrid **grid);

/**
 * Number of samples in the grid, or 0 for a null handle.
 *
 * # Safety
 * `grid` must be null or a live handle.
 */
size_t smx_grid_len(const struct SmxGrid *grid);

/**
 * Copies the real parts into `values`, which must hold at least
 * [`smx_grid_len`] doubles.
 *
 * # Safety
 * `grid` must be a live handle; `values` must be valid for `len` writes.
 */
enum SmxStatus smx_grid_values(const struct SmxGrid *grid, double *values, size_t len);

/**
 * Discrete `L^p` norm; pass `INFINITY` for the max norm.
 *
 * # Safety
 * `grid` must be a live handle; `value` must be valid for writes.
 */
enum SmxStatus smx_grid_lp_norm(const struct SmxGrid *grid, double p, double *value);

/**
 * # Safety
 * `grid` must be a live handle; `file` a NUL-terminated UTF-8 path.
 */
enum SmxStatus smx_grid_save(const struct SmxGrid *grid, const char *file);

/**
 * # Safety
 * `file` must be a NUL-terminated UTF-8 path; `grid` valid for writes.
 */
enum SmxStatus smx_grid_load(const char *file, struct SmxGrid **grid);

/**
 * # Safety
 * `grid` must be null or a handle not yet freed.
 */
void smx_grid_free(struct SmxGrid *grid);

/**
 * Radial multiplier of dimension `2n`; `j` selects the dyadic piece and is
 * ignored for `Full`.
 *
 * # Safety
 * `symbol` must be valid for writes.
 */
enum SmxStatus smx_symbol_new(uint32_t n,
                              uint32_t j,
                              enum SmxSymbolKind kind,
                              double epsilon,
                              struct SmxSymbol **symbol);

/**
 * Value at `(ξ, η)` given the magnitudes `|ξ|` and `|η|`.
 *
 * # Safety
 * `symbol` must be a live handle; `value` valid for writes.
 */
enum SmxStatus smx_symbol_eval(const struct SmxSymbol *symbol,
                               double xi,
                               double eta,
                               double *value);

/**
 * # Safety
 * `symbol` must be null or a handle not yet freed.
 */
void smx_symbol_free(struct SmxSymbol *symbol);

/**
 * Bilinear spherical average at radius `t`, computed with the multiplier.
 *
 * # Safety
 * Handles must be live; `result` valid for writes.
 */
enum SmxStatus smx_average_mult(const struct SmxSymbol *symbol,
                                const struct SmxGrid *f,
                                const struct SmxGrid *g,
                                double t,
                                struct SmxGrid **result);

/**
 * Maximal function over the radii `t_grid`. With `t_len == 0` the default
 * geometric grid for the grid spacing is used.
 *
 * # Safety
 * Handles must be live; `t_grid` valid for `t_len` reads; `result` for writes.
 */
enum SmxStatus smx_maximal(const struct SmxSymbol *symbol,
                           const struct SmxGrid *f,
                           const struct SmxGrid *g,
                           const double *t_grid,
                           size_t t_len,
                           struct SmxGrid **result);

/**
 * Bilinear spherical average of the singular counterexample pair at distance
 * `scale` from the origin.
 *
 * # Safety
 * `value` must be valid for writes.
 */
enum SmxStatus smx_cex_average(size_t n, double p1, double p2, double scale, double *value);

/**
 * Least-squares line through `(log2 x, log2 y)`.
 *
 * # Safety
 * `x`, `y` must hold `len` doubles; `fit` valid for writes.
 */
enum SmxStatus smx_fit_loglog(const double *x, const double *y, size_t len, struct SmxFit *fit);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SPHEREMAX_H */
