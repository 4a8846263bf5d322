/* siplab: stochastic inverse problem solvers, C interface.
 *
 * All matrices are dense row-major. Functions returning sip_status write
 * their results through out-pointers only on SIP_OK; on failure,
 * sip_last_error() describes the problem for the calling thread.
 */
#ifndef SIPLAB_SIPLAB_H
#define SIPLAB_SIPLAB_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(SIPLAB_BUILDING)
#    define SIPLAB_API __declspec(dllexport)
#  else
#    define SIPLAB_API __declspec(dllimport)
#  endif
#else
#  define SIPLAB_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum sip_status {
  SIP_OK = 0,
  SIP_ERR_INVALID_ARGUMENT = 1,
  SIP_ERR_DOMAIN = 2,
  SIP_ERR_DIMENSION = 3,
  SIP_ERR_NOT_POSITIVE_DEFINITE = 4,
  SIP_ERR_RANK_DEFICIENT = 5,
  SIP_ERR_NO_SOLUTION = 6,
  SIP_ERR_PREDICTABILITY = 7,
  SIP_ERR_CONVERGENCE = 8,
  SIP_ERR_UNKNOWN_EXAMPLE = 9,
  SIP_ERR_IO = 10,
  SIP_ERR_INTERNAL = 99
} sip_status;

typedef struct sip_density sip_density;
typedef struct sip_map sip_map;
typedef struct sip_solution sip_solution;
typedef struct sip_example_result sip_example_result;

typedef struct sip_check {
  int pass;
  double statistic;
  double threshold;
} sip_check;

SIPLAB_API const char* sip_version(void);
SIPLAB_API const char* sip_status_string(sip_status status);
/* Message of the last failed call on this thread; "" if none. */
SIPLAB_API const char* sip_last_error(void);

/* ---- densities ---- */

SIPLAB_API sip_status sip_density_gaussian(size_t dim, const double* mean, const double* cov,
                                           sip_density** out);
SIPLAB_API sip_status sip_density_truncated_gaussian(double mu, double sigma, double lo,
                                                     double hi, sip_density** out);
SIPLAB_API sip_status sip_density_beta(double a, double b, sip_density** out);
SIPLAB_API sip_status sip_density_uniform(size_t dim, const double* lower, const double* upper,
                                          sip_density** out);
SIPLAB_API sip_status sip_density_mixture(size_t count, const sip_density* const* components,
                                          const double* weights, sip_density** out);
/* bandwidth may be NULL for Scott's rule. */
SIPLAB_API sip_status sip_density_kde(size_t rows, size_t dim, const double* data,
                                      const double* bandwidth, sip_density** out);

SIPLAB_API size_t sip_density_dim(const sip_density* d);
SIPLAB_API sip_status sip_density_pdf(const sip_density* d, const double* x, double* out);
SIPLAB_API sip_status sip_density_log_pdf(const sip_density* d, const double* x, double* out);
/* out holds count * dim values. */
SIPLAB_API sip_status sip_density_sample(const sip_density* d, size_t count, uint64_t seed,
                                         double* out);
SIPLAB_API void sip_density_free(sip_density* d);

/* ---- forward maps ---- */

SIPLAB_API sip_status sip_map_linear(size_t q, size_t p, const double* a, sip_map** out);
/* "polar" (half squared radius on the unit square), "sum", "square" (on (-1, 1)). */
SIPLAB_API sip_status sip_map_builtin(const char* name, sip_map** out);
SIPLAB_API sip_status sip_map_identity(size_t dim, sip_map** out);

SIPLAB_API size_t sip_map_input_dim(const sip_map* m);
SIPLAB_API size_t sip_map_output_dim(const sip_map* m);
SIPLAB_API sip_status sip_map_eval(const sip_map* m, const double* theta, double* out);
/* out holds q * p values; row_rank may be NULL. */
SIPLAB_API sip_status sip_map_jacobian(const sip_map* m, const double* theta, double* out,
                                       int* row_rank);
SIPLAB_API void sip_map_free(sip_map* m);

/* ---- solvers ---- */

SIPLAB_API sip_status sip_solve_cov_exact(const sip_map* map, const sip_density* observed,
                                          sip_solution** out);
SIPLAB_API sip_status sip_solve_two_to_one(double eps, double w, sip_solution** out);
/* aux may be NULL when p = q. The requested samples are drawn eagerly. */
SIPLAB_API sip_status sip_solve_intuitive(const sip_map* map, const sip_density* observed,
                                          const sip_density* aux, size_t count, uint64_t seed,
                                          sip_solution** out);
/* Contour bounds have p - q entries. */
SIPLAB_API sip_status sip_solve_bbe_linear(size_t q, size_t p, const double* a,
                                           const sip_density* observed, const double* lower,
                                           const double* upper, sip_solution** out);
SIPLAB_API sip_status sip_solve_bbe_polar(const sip_density* observed, sip_solution** out);
SIPLAB_API sip_status sip_solve_bjw(const sip_density* initial, const sip_map* map,
                                    const sip_density* observed, const sip_density* pushforward,
                                    sip_solution** out);
SIPLAB_API sip_status sip_solve_bjw_kde(const sip_density* initial, const sip_map* map,
                                        const sip_density* observed, size_t pilot_count,
                                        uint64_t seed, sip_solution** out);

SIPLAB_API const char* sip_solution_method(const sip_solution* s);
SIPLAB_API size_t sip_solution_dim(const sip_solution* s);
SIPLAB_API int sip_solution_has_sampler(const sip_solution* s);
SIPLAB_API sip_status sip_solution_pdf(const sip_solution* s, const double* theta, double* out);
/* Direct sampler when available, rejection sampling for ratio-form
 * solutions. out holds count * dim values; rows_out receives the number of
 * rows written (rows whose solve failed are dropped). */
SIPLAB_API sip_status sip_solution_sample(const sip_solution* s, size_t count, uint64_t seed,
                                          double* out, size_t* rows_out);
SIPLAB_API sip_status sip_solution_density(const sip_solution* s, sip_density** out);
SIPLAB_API void sip_solution_free(sip_solution* s);

/* ---- verification and closed forms ---- */

SIPLAB_API sip_status sip_check_pushforward(const sip_solution* s, const sip_map* map,
                                            const sip_density* observed, size_t count,
                                            double alpha, uint64_t seed, sip_check* out);
/* mean_out holds p values, cov_out p * p. */
SIPLAB_API sip_status sip_gaussian_bjw_linear(size_t q, size_t p, const double* a,
                                              const double* mu_y, const double* sigma_y,
                                              const double* mu_theta, const double* sigma_theta,
                                              double* mean_out, double* cov_out);

/* ---- examples ---- */

typedef struct sip_run_config {
  const char* example;
  size_t samples;
  uint64_t seed;
  const char* out;
  const char* format; /* "csv" or "json" */
  int grid;
  double w;
  double eps;
  double sigma;
  double xstar;
  int n;
  unsigned threads; /* 0 keeps the current worker setting */
} sip_run_config;

SIPLAB_API void sip_run_config_init(sip_run_config* config);
SIPLAB_API size_t sip_example_count(void);
SIPLAB_API const char* sip_example_name(size_t index);
SIPLAB_API sip_status sip_example_run(const sip_run_config* config, sip_example_result** out);

SIPLAB_API int sip_example_result_exit_code(const sip_example_result* r);
SIPLAB_API size_t sip_example_result_check_count(const sip_example_result* r);
/* name may be NULL; the string lives as long as r. */
SIPLAB_API sip_status sip_example_result_check(const sip_example_result* r, size_t index,
                                               const char** name, const char** details,
                                               sip_check* out);
SIPLAB_API size_t sip_example_result_file_count(const sip_example_result* r);
SIPLAB_API const char* sip_example_result_file(const sip_example_result* r, size_t index);
SIPLAB_API size_t sip_example_result_warning_count(const sip_example_result* r);
SIPLAB_API const char* sip_example_result_warning(const sip_example_result* r, size_t index);
SIPLAB_API void sip_example_result_free(sip_example_result* r);

#ifdef __cplusplus
}
#endif

#endif /* SIPLAB_SIPLAB_H */
