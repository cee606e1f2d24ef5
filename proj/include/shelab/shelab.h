/* C interface to shelab. Every function returning int returns a shelab_status;
 * on failure shelab_last_error() describes the most recent error of the
 * calling thread. Handles are opaque and released with the matching _free. */
#ifndef SHELAB_H
#define SHELAB_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define SHELAB_API __declspec(dllexport)
#else
#define SHELAB_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum shelab_status {
  SHELAB_OK = 0,
  SHELAB_INVALID_ARGUMENT = 1,
  SHELAB_RESOLUTION = 2,
  SHELAB_EXTENT = 3,
  SHELAB_UNDERFLOW = 4,
  SHELAB_DIVERGENT = 5,
  SHELAB_INCONCLUSIVE = 6,
  SHELAB_NONCONVERGENCE = 7,
  SHELAB_UNSUPPORTED = 8,
  SHELAB_ILL_POSED = 9,
  SHELAB_NO_CROSSING = 10,
  SHELAB_INSTABILITY = 11,
  SHELAB_SIZE_LIMIT = 12,
  SHELAB_IO = 13,
  SHELAB_CONFIG = 14,
  SHELAB_INTERNAL = 15
} shelab_status;

/* Quadrature verdicts reported alongside values. */
enum { SHELAB_FINITE = 0, SHELAB_DIVERGES = 1, SHELAB_UNDECIDED = 2 };

SHELAB_API const char* shelab_version(void);
SHELAB_API const char* shelab_last_error(void);
SHELAB_API const char* shelab_status_name(int status);
/* 0 trace .. 6 off */
SHELAB_API void shelab_set_log_level(int level);

/* ---- Levy exponents -------------------------------------------------- */

typedef struct shelab_exponent shelab_exponent;

/* Phi(xi) = C |xi|^a [cos(pi theta/2) - i sin(pi theta/2) sgn xi], 1 < a <= 2. */
SHELAB_API int shelab_exponent_stable(double a, double theta, double scale, int dim,
                                      shelab_exponent** out);
SHELAB_API int shelab_exponent_tabulated(const double* xi, const double* re, const double* im,
                                         size_t n, shelab_exponent** out);
SHELAB_API void shelab_exponent_free(shelab_exponent* e);
SHELAB_API int shelab_exponent_eval(const shelab_exponent* e, double xi, double* re, double* im);

/* ---- Initial measures ------------------------------------------------ */

typedef struct shelab_measure shelab_measure;

SHELAB_API int shelab_measure_dirac(double location, shelab_measure** out);
SHELAB_API int shelab_measure_lebesgue(shelab_measure** out);
SHELAB_API int shelab_measure_atoms(const double* locations, const double* weights, size_t n,
                                    shelab_measure** out);
/* Density on the lattice x_j = -half_extent + j * 2 half_extent / n. */
SHELAB_API int shelab_measure_density(double half_extent, size_t n, const double* values,
                                      shelab_measure** out);
SHELAB_API void shelab_measure_free(shelab_measure* m);

/* ---- Noise covariances ----------------------------------------------- */

typedef struct shelab_covariance shelab_covariance;

enum { SHELAB_COV_WHITE = 0, SHELAB_COV_RIESZ = 1, SHELAB_COV_GAUSSIAN_BUMP = 2 };

/* alpha is used by Riesz, width by the Gaussian bump. */
SHELAB_API int shelab_covariance_create(int kind, double alpha, double width, int dim,
                                        shelab_covariance** out);
SHELAB_API int shelab_covariance_tabulated(const double* xi, const double* fhat, size_t n,
                                           shelab_covariance** out);
SHELAB_API void shelab_covariance_free(shelab_covariance* c);
SHELAB_API int shelab_covariance_fhat(const shelab_covariance* c, double rho, double* out);

/* ---- Kernels ---------------------------------------------------------- */

SHELAB_API int shelab_default_grid(const shelab_exponent* e, double t, double mass_budget,
                                   double* half_extent, size_t* n);
/* values has room for n entries (dimension 1). */
SHELAB_API int shelab_transition_density(const shelab_exponent* e, double t, double half_extent,
                                         size_t n, double* values, double* mass);
SHELAB_API int shelab_density_at(const shelab_exponent* e, double t, double x, double* out);
SHELAB_API int shelab_semigroup_defect(const shelab_exponent* e, double t, double s,
                                       double half_extent, size_t n, double* out);
SHELAB_API int shelab_write_kernel_csv(const shelab_exponent* e, double t, double half_extent,
                                       size_t n, const char* path);

/* ---- Parseval identity ------------------------------------------------ */

typedef struct shelab_parseval {
  double lhs;
  double rhs;
  double rel_err;
  int both_divergent;
} shelab_parseval;

SHELAB_API int shelab_parseval_check(const shelab_covariance* c, const shelab_measure* nu,
                                     shelab_parseval* out);

/* ---- Bridges ---------------------------------------------------------- */

typedef struct shelab_bridge_bound {
  double lhs;
  double rhs;
  double ratio;
  int holds;
  double h;
} shelab_bridge_bound;

SHELAB_API int shelab_verify_bridge_bound(const shelab_exponent* e, const shelab_covariance* c,
                                          double z1, double z2, double x, double t, double s,
                                          shelab_bridge_bound* out);
/* Largest error between the closed-form bridge characteristic function and the
 * transform of the lattice bridge density. */
SHELAB_API int shelab_bridge_cf_error(const shelab_exponent* e, double z, double x, double t,
                                      double s, double* out);
/* Runs the 60-case standard matrix, writes its CSV to path (NULL: no file). */
SHELAB_API int shelab_bridge_matrix(const char* path, size_t* held, size_t* total);

/* ---- Bounds ----------------------------------------------------------- */

typedef struct shelab_bound_params {
  double L_b;
  double L_sigma;
  double b0;
  double sigma0;
  int p;
  int d;
} shelab_bound_params;

/* Search options for Upsilon; pass NULL for defaults. */
typedef struct shelab_upsilon_options {
  double t_min;
  double t_max;
  int grid_points;
  int refine;
  double rel_tol;
} shelab_upsilon_options;

SHELAB_API void shelab_upsilon_options_default(shelab_upsilon_options* opt);

typedef struct shelab_upsilon_result {
  double value;
  int status;
  double t_star;
  double limit;
  int sup_not_localized;
} shelab_upsilon_result;

SHELAB_API int shelab_upsilon(const shelab_exponent* e, const shelab_covariance* c, double beta,
                              const shelab_upsilon_options* opt, shelab_upsilon_result* out);
SHELAB_API int shelab_upsilon_tilde(const shelab_exponent* e, const shelab_covariance* c,
                                    double beta, double* value, int* status);
SHELAB_API int shelab_tau(const shelab_bound_params* params, double* out);
SHELAB_API int shelab_hermite_largest_zero(int p, double* out);

typedef struct shelab_bound_value {
  double B;
  double upsilon;
  double upsilon_tilde;
  double z_p;
} shelab_bound_value;

SHELAB_API int shelab_bound_constant(double beta, const shelab_bound_params* params,
                                     const shelab_exponent* e, const shelab_covariance* c,
                                     const shelab_upsilon_options* opt, shelab_bound_value* out);

typedef struct shelab_critical_beta {
  double beta;
  double B_at;
  double lower;
  double upper;
  int evaluations;
} shelab_critical_beta;

SHELAB_API int shelab_critical_beta_search(const shelab_bound_params* params,
                                           const shelab_exponent* e, const shelab_covariance* c,
                                           double tol, double beta_cap,
                                           const shelab_upsilon_options* opt,
                                           shelab_critical_beta* out);

/* ---- Simulation ------------------------------------------------------- */

typedef struct shelab_rng shelab_rng;
SHELAB_API int shelab_rng_create(uint64_t seed, shelab_rng** out);
SHELAB_API void shelab_rng_free(shelab_rng* r);

typedef struct shelab_config shelab_config;

enum { SHELAB_COEF_ZERO = 0, SHELAB_COEF_AFFINE = 1, SHELAB_COEF_TABULATED = 2 };

/* Copies the exponent, covariance and measure. */
SHELAB_API int shelab_config_create(const shelab_exponent* e, const shelab_covariance* c,
                                    const shelab_measure* mu, shelab_config** out);
SHELAB_API void shelab_config_free(shelab_config* cfg);
/* Affine: c0 + c1 u. Tabulated: (u, v) pairs of length n with declared Lipschitz constant L. */
SHELAB_API int shelab_config_set_drift(shelab_config* cfg, int kind, double c0, double c1,
                                       const double* u, const double* v, size_t n, double L);
SHELAB_API int shelab_config_set_sigma(shelab_config* cfg, int kind, double c0, double c1,
                                       const double* u, const double* v, size_t n, double L);
SHELAB_API int shelab_config_set_grid(shelab_config* cfg, double half_extent, size_t n);
SHELAB_API int shelab_config_set_time(shelab_config* cfg, double T, double dt);
SHELAB_API int shelab_config_set_seed(shelab_config* cfg, uint64_t seed);
SHELAB_API int shelab_config_set_threads(shelab_config* cfg, unsigned threads);
SHELAB_API int shelab_config_set_record_stride(shelab_config* cfg, size_t stride);
SHELAB_API int shelab_config_validate(const shelab_config* cfg);
SHELAB_API int shelab_config_dt_ceiling(const shelab_config* cfg, double* out);
SHELAB_API int shelab_config_bound_params(const shelab_config* cfg, int p,
                                          shelab_bound_params* out);

typedef struct shelab_trajectory shelab_trajectory;

SHELAB_API int shelab_solve_mild(const shelab_config* cfg, shelab_rng* rng,
                                 shelab_trajectory** out);
SHELAB_API void shelab_trajectory_free(shelab_trajectory* tr);
SHELAB_API size_t shelab_trajectory_times(const shelab_trajectory* tr);
SHELAB_API size_t shelab_trajectory_points(const shelab_trajectory* tr);
/* field and reference have room for shelab_trajectory_points entries; either may be NULL. */
SHELAB_API int shelab_trajectory_get(const shelab_trajectory* tr, size_t k, double* t,
                                     double* field, double* reference);
SHELAB_API int shelab_trajectory_write_csv(const shelab_trajectory* tr, const char* path);

/* gaps has room for n_max entries; ratios for n_max - 1 (may be NULL). */
SHELAB_API int shelab_picard(const shelab_config* cfg, int n_max, double beta, int p,
                             size_t paths, double* gaps, double* ratios, double* tau);

typedef struct shelab_curve shelab_curve;

SHELAB_API int shelab_estimate_moments(const shelab_config* cfg, int p, size_t M,
                                       shelab_curve** out);
SHELAB_API void shelab_curve_free(shelab_curve* c);
SHELAB_API size_t shelab_curve_size(const shelab_curve* c);
SHELAB_API int shelab_curve_get(const shelab_curve* c, size_t i, double* t, double* value,
                                double* stderr_, double* argmax_x);
SHELAB_API int shelab_curve_write_csv(const shelab_curve* c, const char* path);
SHELAB_API int shelab_weighted_norm(const shelab_curve* c, double beta, double* out);

typedef struct shelab_gamma {
  double slope;
  double intercept;
  double ci;
  size_t points;
  int path_bootstrap;
} shelab_gamma;

/* Window [t_lo, t_hi]; pass t_lo > t_hi for the default [T/2, T]. */
SHELAB_API int shelab_estimate_gamma_bar(const shelab_curve* c, double t_lo, double t_hi,
                                         shelab_gamma* out);

typedef struct shelab_verdict {
  double gamma_hat;
  double ci;
  double beta_star;
  double tol;
  int holds;
  double B_at;
  double lower;
  double upper;
  int evaluations;
} shelab_verdict;

/* curve may be NULL; otherwise it receives the moment curve (caller frees). */
SHELAB_API int shelab_verify_moment_bound(const shelab_config* cfg, int p, size_t M, double tol,
                                          const shelab_upsilon_options* opt,
                                          shelab_verdict* out, shelab_curve** curve);

#ifdef __cplusplus
}
#endif

#endif
