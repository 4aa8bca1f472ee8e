/*
 * dephasim C interface.
 *
 * Opaque handles are created by dphs_*_create / returned through out-pointers
 * and released with the matching dphs_*_destroy. Every fallible call returns a
 * dphs_status; on failure dphs_last_error() holds a message for the calling
 * thread until its next dephasim call. Strings handed out by the library are
 * released with dphs_string_free.
 *
 * Units: hbar = k_B = 1.
 */
#ifndef DEPHASIM_DEPHASIM_H
#define DEPHASIM_DEPHASIM_H

#include <stddef.h>
#include <stdint.h>

#if defined(DPHS_BUILDING_LIBRARY)
#define DPHS_API __attribute__((visibility("default")))
#else
#define DPHS_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum dphs_status {
    DPHS_OK = 0,
    DPHS_ERR_INVALID_ARGUMENT = 1,
    DPHS_ERR_NON_POSITIVE_FREQUENCY = 2,
    DPHS_ERR_NEGATIVE_TEMPERATURE = 3,
    DPHS_ERR_CUTOFF_ORDER = 4,
    DPHS_ERR_NON_HERMITIAN = 5,
    DPHS_ERR_TRACE_NOT_ONE = 6,
    DPHS_ERR_NOT_POSITIVE_SEMIDEFINITE = 7,
    DPHS_ERR_EMPTY_GRID = 8,
    DPHS_ERR_NON_MONOTONIC_GRID = 9,
    DPHS_ERR_NON_POSITIVE_RATIO = 10,
    DPHS_ERR_NOT_PERIODIC = 11,
    DPHS_ERR_TOLERANCE_NOT_MET = 12,
    DPHS_ERR_DIMENSION_BUDGET = 13,
    DPHS_ERR_TRUNCATION_INADEQUATE = 14,
    DPHS_ERR_NO_OFF_DIAGONAL_SUPPORT = 15,
    DPHS_ERR_GRID_MISMATCH = 16,
    DPHS_ERR_EMPTY_SERIES = 17,
    DPHS_ERR_CONFIG = 18,
    DPHS_ERR_IO = 19,
    DPHS_ERR_INTERNAL = 99
} dphs_status;

typedef struct dphs_bath dphs_bath;
typedef struct dphs_density dphs_density;
typedef struct dphs_periodicity dphs_periodicity;

typedef struct dphs_quadrature_config {
    double abs_tol;
    double rel_tol;
    size_t max_subdivisions;
    int oscillation_split;
    double tail_epsilon;
} dphs_quadrature_config;

DPHS_API const char* dphs_version(void);
DPHS_API const char* dphs_last_error(void);
DPHS_API const char* dphs_status_name(dphs_status status);
/* 0 success, 1 validation/config failure, 2 numerical failure. */
DPHS_API int dphs_exit_code(dphs_status status);
DPHS_API void dphs_string_free(char* text);

/* ---- finite bath ------------------------------------------------------- */

DPHS_API dphs_status dphs_bath_create(const double* lambdas, const double* omegas, size_t modes, dphs_bath** out);
DPHS_API void dphs_bath_destroy(dphs_bath* bath);
DPHS_API size_t dphs_bath_size(const dphs_bath* bath);

DPHS_API dphs_status dphs_gamma_finite(const dphs_bath* bath, double omega0, double kT, double t, double* out);
/* Writes `count` values; times must be strictly increasing and start at t >= 0. */
DPHS_API dphs_status dphs_gamma_finite_series(const dphs_bath* bath, double omega0, double kT, const double* times,
                                              size_t count, double* values_out);

/* *is_rational = 0 when no convergent qualifies (p, q untouched). */
DPHS_API dphs_status dphs_rationalize(double ratio, double tol, int64_t max_den, int* is_rational, int64_t* p,
                                      int64_t* q);

DPHS_API dphs_status dphs_detect_periodicity(const dphs_bath* bath, double tol, int64_t max_den,
                                             dphs_periodicity** out);
DPHS_API void dphs_periodicity_destroy(dphs_periodicity* report);
DPHS_API int dphs_periodicity_is_periodic(const dphs_periodicity* report);
DPHS_API dphs_status dphs_periodicity_period(const dphs_periodicity* report, double* period);
DPHS_API dphs_status dphs_periodicity_witness(const dphs_periodicity* report, size_t* i, size_t* j);
/* Decimal text of n_i (period = n_i * 2 pi / omega_i); free with dphs_string_free. */
DPHS_API dphs_status dphs_periodicity_mode_multiple(const dphs_periodicity* report, size_t mode, char** text);
DPHS_API dphs_status dphs_verify_recurrence(const dphs_bath* bath, double omega0, const dphs_periodicity* report,
                                            double* residual);

/* ---- continuum bath ---------------------------------------------------- */

DPHS_API dphs_quadrature_config dphs_quadrature_defaults(void);
/* Ohmic J(w) = C w exp(-w / cutoff_upper) theta(w - cutoff_lower). */
DPHS_API dphs_status dphs_gamma_quadrature(double coupling_c, double cutoff_upper, double cutoff_lower, double kT,
                                           double t, const dphs_quadrature_config* config, double* value,
                                           double* error_estimate);
DPHS_API dphs_status dphs_gamma_vac_closed(double coupling_c, double cutoff_upper, double t, double* value);
/* *in_regime may be NULL. */
DPHS_API dphs_status dphs_gamma_therm_closed(double coupling_c, double cutoff_upper, double cutoff_lower, double kT,
                                             double t, double* value, int* in_regime);
DPHS_API dphs_status dphs_gamma_short_time(double coupling_c, double cutoff_upper, double cutoff_lower, double kT,
                                           double t, double* value, int* in_regime);
DPHS_API dphs_status dphs_gamma_high_temperature(double coupling_c, double cutoff_upper, double cutoff_lower,
                                                 double kT, double t, double* value, int* in_regime);

/* ---- density matrices ---------------------------------------------------- */

/* Row-major dim*dim real and imaginary parts; `im` may be NULL. */
DPHS_API dphs_status dphs_density_create(size_t dim, const double* re, const double* im, dphs_density** out);
DPHS_API void dphs_density_destroy(dphs_density* rho);
DPHS_API size_t dphs_density_dim(const dphs_density* rho);
DPHS_API dphs_status dphs_density_entry(const dphs_density* rho, size_t n, size_t m, double* re, double* im);
DPHS_API dphs_status dphs_dephase(const dphs_density* rho, double gamma, dphs_density** out);
DPHS_API dphs_status dphs_coherence_l1(const dphs_density* rho, double* out);

/* ---- brute-force oracle -------------------------------------------------- */

/* Propagates system + truncated bath and reports max | |rho^nm(t)| - |rho^nm(0)| e^{-(n-m)^2 Gamma(t)} |. */
DPHS_API dphs_status dphs_oracle_max_deviation(const dphs_bath* bath, const size_t* cutoffs, double omega0,
                                               double kT, const dphs_density* rho0, const double* times, size_t count,
                                               double* max_deviation);

/* ---- jobs ---------------------------------------------------------------- */

/* Runs a JSON config given as text; the artifact text is returned in *output. `job` and `format` may be NULL. */
DPHS_API dphs_status dphs_run_config_text(const char* job, const char* config_json, const char* format, char** output);
/* Runs the config at `config_path`. `out_path`/`format` override the config when non-NULL. When no output path is
   configured the artifact is returned in *output (if output is non-NULL) instead of being written. */
DPHS_API dphs_status dphs_run_config_file(const char* job, const char* config_path, const char* out_path,
                                          const char* format, char** output);

#ifdef __cplusplus
}
#endif

#endif /* DEPHASIM_DEPHASIM_H */
