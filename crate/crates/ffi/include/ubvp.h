#ifndef UBVP_H
#define UBVP_H

#include <stdbool.h>
#include <stddef.h>

typedef enum UbvpStatus {
  UBVP_STATUS_OK = 0,
  UBVP_STATUS_INVALID_ARGUMENT = 1,
  UBVP_STATUS_UNSUPPORTED = 2,
  UBVP_STATUS_NUMERIC_FAILURE = 3,
  UBVP_STATUS_INCOMPATIBLE_DATA = 4,
  UBVP_STATUS_NEAR_SINGULAR = 5,
  UBVP_STATUS_IO = 6,
  UBVP_STATUS_PARSE = 7,
  UBVP_STATUS_NULL_POINTER = 8,
  UBVP_STATUS_PANIC = 9,
} UbvpStatus;

/**
 * Tail model of the initial data beyond its last sample.
 */
typedef enum UbvpXDecay {
  UBVP_X_DECAY_COMPACTLY_SUPPORTED = 0,
  UBVP_X_DECAY_GAUSSIAN_DOMINATED = 1,
  UBVP_X_DECAY_POLYNOMIAL = 2,
} UbvpXDecay;

/**
 * Opaque assembled Laplace system; owns a copy of its surface.
 */
typedef struct UbvpLaplace UbvpLaplace;

/**
 * Opaque discretized surface.
 */
typedef struct UbvpSurface UbvpSurface;

/**
 * Initial data on the half line for the heat functions.
 */
typedef struct UbvpInitialData {
  /**
   * Increasing sample points `x > 0`.
   */
  const double *x;
  const double *values;
  size_t len;
  enum UbvpXDecay decay;
  /**
   * Closed form beyond the last sample, e.g. `"exp(x)"`; may be null.
   */
  const char *extension;
} UbvpInitialData;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the last error message of this thread, NUL-terminated and
 * truncated to `len - 1` bytes, into `buf`. Returns the full message
 * length in bytes, excluding the terminator.
 *
 * # Safety
 * `buf` must be null or point to `len` writable bytes.
 */
size_t ubvp_last_error_message(char *buf, size_t len);

/**
 * Sphere with Gauss–Legendre nodes in `cos(theta)` and uniform `phi`.
 *
 * # Safety
 * `center` must point to 3 doubles; `out` must be writable.
 */
enum UbvpStatus ubvp_surface_sphere(double radius,
                                    const double *center,
                                    size_t n_theta,
                                    size_t n_phi,
                                    struct UbvpSurface **out);

/**
 * Ellipsoid with semi-axes `axes[0..3]` along x, y, z.
 *
 * # Safety
 * `axes` and `center` must point to 3 doubles; `out` must be writable.
 */
enum UbvpStatus ubvp_surface_ellipsoid(const double *axes,
                                       const double *center,
                                       size_t n_theta,
                                       size_t n_phi,
                                       struct UbvpSurface **out);

/**
 * Surface from a JSON descriptor such as
 * `{"type":"sphere","radius":1,"grid":[16,32]}`.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum UbvpStatus ubvp_surface_from_json(const char *json, struct UbvpSurface **out);

/**
 * # Safety
 * `surface` must be null or a handle from a `ubvp_surface_*` constructor
 * not yet freed.
 */
void ubvp_surface_free(struct UbvpSurface *surface);

/**
 * Number of quadrature nodes, or 0 for a null handle.
 *
 * # Safety
 * `surface` must be null or a live handle.
 */
size_t ubvp_surface_len(const struct UbvpSurface *surface);

/**
 * Writes nodes and outward normals (`3 n` doubles each, either may be
 * null) and weights (`n` doubles, may be null).
 *
 * # Safety
 * Non-null arrays must hold the sizes above with `n = ubvp_surface_len`.
 */
enum UbvpStatus ubvp_surface_quadrature(const struct UbvpSurface *surface,
                                        double *nodes,
                                        double *normals,
                                        double *weights);

/**
 * Assembles the layer operators on a copy of `surface`.
 *
 * # Safety
 * `surface` must be a live handle; `out` must be writable.
 */
enum UbvpStatus ubvp_laplace_new(const struct UbvpSurface *surface, struct UbvpLaplace **out);

/**
 * # Safety
 * `sys` must be null or a handle from [`ubvp_laplace_new`] not yet freed.
 */
void ubvp_laplace_free(struct UbvpLaplace *sys);

/**
 * Number of collocation nodes of the system.
 *
 * # Safety
 * `sys` must be null or a live handle.
 */
size_t ubvp_laplace_len(const struct UbvpLaplace *sys);

/**
 * Residual of `(u0, u1)`. Writes the pointwise residual (`n` doubles,
 * may be null), its sup norm, the net flux `∫ u1`, and whether the pair
 * passes at tolerance `tol` (NaN selects the default). An inconsistent
 * pair is not an error.
 *
 * # Safety
 * `u0`, `u1` hold `n` doubles; scalar outputs must be writable.
 */
enum UbvpStatus ubvp_laplace_residual(const struct UbvpLaplace *sys,
                                      const double *u0,
                                      const double *u1,
                                      size_t n,
                                      double tol,
                                      double *pointwise,
                                      double *sup_norm,
                                      double *flux,
                                      bool *consistent);

/**
 * Neumann trace from the Dirichlet trace. `regularization` is the
 * relative Tikhonov weight (1e-10 is a good default).
 *
 * # Safety
 * `u0` and `u1_out` hold `n` doubles.
 */
enum UbvpStatus ubvp_laplace_solve_u1(const struct UbvpLaplace *sys,
                                      const double *u0,
                                      size_t n,
                                      double regularization,
                                      double *u1_out);

/**
 * Zero-mean Dirichlet trace from the Neumann trace. `flux_tol` bounds the
 * relative net flux (NaN selects the default).
 *
 * # Safety
 * `u1` and `u0_out` hold `n` doubles.
 */
enum UbvpStatus ubvp_laplace_solve_u0(const struct UbvpLaplace *sys,
                                      const double *u1,
                                      size_t n,
                                      double flux_tol,
                                      double *u0_out);

/**
 * Interior values at `m` points (`3 m` doubles). Inconsistent traces
 * give `UBVP_STATUS_INCOMPATIBLE_DATA` unless `allow_inconsistent`.
 * `near_boundary` (`m` flags, may be null) marks degraded points.
 *
 * # Safety
 * `u0`, `u1` hold `n` doubles, `points` `3 m`, `values` `m`.
 */
enum UbvpStatus ubvp_laplace_reconstruct(const struct UbvpLaplace *sys,
                                         const double *u0,
                                         const double *u1,
                                         size_t n,
                                         const double *points,
                                         size_t m,
                                         bool allow_inconsistent,
                                         double *values,
                                         bool *near_boundary);

/**
 * Boundary values `φ` on the time grid `t` (`nt` increasing positive
 * times) from the initial data and the flux `ψ`. `gauss_nodes = 0`
 * selects the default quadrature.
 *
 * # Safety
 * `t`, `psi` and `phi_out` hold `nt` doubles.
 */
enum UbvpStatus ubvp_heat_phi(const struct UbvpInitialData *initial,
                              const double *t,
                              const double *psi,
                              size_t nt,
                              size_t gauss_nodes,
                              double *phi_out);

/**
 * Flux `ψ` on the time grid from the initial data and the boundary
 * values `φ`.
 *
 * # Safety
 * `t`, `phi` and `psi_out` hold `nt` doubles.
 */
enum UbvpStatus ubvp_heat_psi(const struct UbvpInitialData *initial,
                              const double *t,
                              const double *phi,
                              size_t nt,
                              size_t gauss_nodes,
                              double *psi_out);

/**
 * `u(t, x)` at `m` points given as interleaved `(t, x)` pairs with
 * `x > 0` and `t` within the time grid.
 *
 * # Safety
 * `t` and `psi` hold `nt` doubles, `points` `2 m`, `values` `m`.
 */
enum UbvpStatus ubvp_heat_reconstruct(const struct UbvpInitialData *initial,
                                      const double *t,
                                      const double *psi,
                                      size_t nt,
                                      const double *points,
                                      size_t m,
                                      size_t gauss_nodes,
                                      double *values);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* UBVP_H */
