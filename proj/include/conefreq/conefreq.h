/* C interface to the conefreq library.
 *
 * Every function returns a cf_status. On failure, cf_last_error() describes
 * the problem; the string lives until the next failing call on the same
 * thread. Handles are opaque and released with the matching *_free function
 * (passing NULL is allowed). Output pointers are written only on success.
 */
#ifndef CONEFREQ_H
#define CONEFREQ_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define CF_API __declspec(dllexport)
#else
#define CF_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum cf_status {
  CF_OK = 0,
  CF_ERR_DOMAIN = 1,
  CF_ERR_MESH = 2,
  CF_ERR_RANGE = 3,
  CF_ERR_PARAMETER = 4,
  CF_ERR_DIVERGED = 5,
  CF_ERR_ASSEMBLY = 6,
  CF_ERR_DEGENERATE = 7,
  CF_ERR_UNRELIABLE = 8,
  CF_ERR_MONOTONICITY = 9,
  CF_ERR_EMPTY_RANGE = 10,
  CF_ERR_MULTIPLICITY = 11,
  CF_ERR_CONFIG = 12,
  CF_ERR_IO = 13,
  CF_ERR_CHECKS_FAILED = 100, /* pipeline ran, at least one check failed */
  CF_ERR_NULL_ARGUMENT = 101,
  CF_ERR_INTERNAL = 102
} cf_status;

typedef struct cf_mesh cf_mesh;
typedef struct cf_field cf_field;
typedef struct cf_trace cf_trace;
typedef struct cf_config cf_config;

typedef struct cf_trace_row {
  double r, H, D, E, N, Hprime, dnuova_residual, flux_residual;
} cf_trace_row;

CF_API const char* cf_last_error(void);
CF_API const char* cf_status_name(cf_status status);
CF_API const char* cf_version(void);
/* Caps worker threads; 0 restores the hardware default. */
CF_API cf_status cf_set_threads(int threads);

/* Meshes (n = 2 sectors only). */
CF_API cf_status cf_mesh_generate(double opening, double target_h, double grading_ratio, double r_min,
                                  cf_mesh** out);
CF_API void cf_mesh_free(cf_mesh* mesh);
CF_API cf_status cf_mesh_counts(const cf_mesh* mesh, size_t* nodes, size_t* elements, size_t* facets);
CF_API cf_status cf_mesh_normal_orthogonality(const cf_mesh* mesh, double* out);
/* Volume and arc weight sums of the B_r quadrature. */
CF_API cf_status cf_mesh_ball_measures(const cf_mesh* mesh, double r, double* area, double* arc_length);
CF_API cf_status cf_mesh_write(const cf_mesh* mesh, const char* path);

/* Solves with a coefficient preset. params is "key=value,key=value" or NULL;
 * outer uses the config grammar ("eigen:2", "mixed:2:1,3:0.2", "zero", ...). */
CF_API cf_status cf_solve(const cf_mesh* mesh, const char* preset, const char* params, const char* outer,
                          double tol, int max_iter, cf_field** out);
CF_API void cf_field_free(cf_field* field);
CF_API cf_status cf_field_H(const cf_field* field, double r, double* H);
CF_API cf_status cf_field_D_E(const cf_field* field, double r, double* D, double* E);

CF_API cf_status cf_trace_compute(const cf_field* field, const double* radii, size_t count, cf_trace** out);
CF_API void cf_trace_free(cf_trace* trace);
CF_API cf_status cf_trace_size(const cf_trace* trace, size_t* count);
CF_API cf_status cf_trace_row_at(const cf_trace* trace, size_t index, cf_trace_row* row);
CF_API cf_status cf_trace_gamma(const cf_trace* trace, double* gamma_hat);

CF_API cf_status cf_gamma_from_eigenvalue(int n, double lambda, double* gamma);
/* Writes k_max eigenvalues of the axisymmetric Neumann cap problem. */
CF_API cf_status cf_cap_spectrum(double alpha, int k_max, int grid_n, double* eigenvalues);

/* Pipeline. */
CF_API cf_status cf_config_load(const char* path, cf_config** out);
CF_API cf_status cf_config_default(cf_config** out);
/* Overrides one key, e.g. ("output", "dir", "/tmp/run"); the config is revalidated. */
CF_API cf_status cf_config_set(cf_config* config, const char* section, const char* key, const char* value);
CF_API void cf_config_free(cf_config* config);
/* Runs the configured stage. Returns CF_ERR_CHECKS_FAILED when any check
 * fails; cf_last_error() then lists the failures, one per line. The output
 * directory is written on both CF_OK and CF_ERR_CHECKS_FAILED. */
CF_API cf_status cf_pipeline_run(const cf_config* config);
/* Output directory of the config; valid until the config is modified or freed. */
CF_API const char* cf_config_out_dir(const cf_config* config);

#ifdef __cplusplus
}
#endif

#endif /* CONEFREQ_H */
