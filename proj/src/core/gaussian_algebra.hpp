#pragma once

#include "common.hpp"
#include "densities.hpp"

namespace siplab {

// Replicate-mean problem: Y = M 1_n + E with an initial N(mu0, sigma0^2) on M
// and N(0, sigma_eps^2) on each E_i.
struct StochasticMapSpec {
  int n = 1;
  Vector mu_y;
  double sigma_y2 = 1.0;
  double mu0 = 0.0;
  double sigma02 = 1.0;
  double sigma_eps2 = 1.0;

  void validate() const;
};

// The constants c1..c7 of the block-form solution.
struct StochasticMapConstants {
  double c1, c2, c3, c4, c5, c6, c7;
};

// Symmetric positive-definite inverse via Cholesky of the symmetric part.
Matrix spd_inverse(const Matrix& s, const char* what);

// Covariance of the BJW solution for g = A theta with Gaussian observable and
// initial densities, in precision form and in Woodbury form.
Matrix bjw_covariance_precision_form(const Matrix& a, const Matrix& sigma_y,
                                     const Matrix& sigma_theta);
Matrix bjw_covariance_woodbury_form(const Matrix& a, const Matrix& sigma_y,
                                    const Matrix& sigma_theta);

// (mu~, Sigma~). Cross-checks the two covariance forms and throws
// kPredictability when the result is not positive definite.
GaussianParams bjw_gaussian_linear(const Matrix& a, const Vector& mu_y,
                                   const Matrix& sigma_y, const Vector& mu_theta,
                                   const Matrix& sigma_theta);

StochasticMapConstants stochastic_map_constants(const StochasticMapSpec& spec);
// Closed-form solution over (M, E_1..E_n) built from c1..c7.
GaussianParams stochastic_map_mean_solution(const StochasticMapSpec& spec);
// The design [1_n | I_n].
Matrix stochastic_map_design(int n);

// N(A^-1 mu, A^-1 Sigma A^-T).
GaussianParams cov_linear_gaussian(const Matrix& a_aug, const GaussianParams& y_dist);

// Gaussian posterior under a flat prior with known noise variance.
GaussianParams flat_prior_regression_posterior(const Matrix& x, const Vector& y_obs,
                                               double sigma2);

// Distribution of [1 x*] theta.
GaussianParams regression_predictive(const GaussianParams& posterior, double x_star);

}  // namespace siplab
