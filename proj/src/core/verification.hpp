#pragma once

#include "common.hpp"
#include "densities.hpp"
#include "forward_maps.hpp"
#include "solvers.hpp"

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace siplab {

enum class Comparison { kAtLeast, kAtMost };

struct CheckReport {
  std::string name;
  bool pass = false;
  double statistic = 0.0;
  double threshold = 0.0;
  Comparison comparison = Comparison::kAtMost;
  std::string details;
  std::vector<std::pair<std::string, double>> metrics;

  // pass is derived here and nowhere else.
  static CheckReport make(std::string name, double statistic, double threshold,
                          Comparison comparison, std::string details = {});
};

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

// Asymptotic Kolmogorov survival function Q(lambda) = P(K > lambda).
double kolmogorov_survival(double lambda);

// D = sup |F_M - F|. Throws when the cdf is not monotone on the samples.
double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf);
// Needs M >= 8 for the p-value.
KsResult ks_test_1d(std::vector<double> samples, const std::function<double(double)>& cdf);
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);

// Two-sample energy-distance permutation test; returns the p-value. Each
// side is subsampled to at most max_points rows.
double energy_permutation_test(const Matrix& x, const Matrix& y, int permutations,
                               std::uint64_t seed, Eigen::Index max_points = 300);

// Goodness of fit of g(theta) against fY: per-marginal KS (analytic CDF when
// fY has one, else a reference sample) and, for q >= 2, an energy test.
CheckReport pushforward_check(const SampleBatch& samples, const ForwardMap& map,
                              const Density& observed, double alpha, std::uint64_t seed);
CheckReport pushforward_check(const SipSolution& solution, const ForwardMap& map,
                              const Density& observed, Eigen::Index count, double alpha,
                              std::uint64_t seed);

struct GridSpec {
  Vector lower;
  Vector upper;
  int points = 512;  // per dimension, endpoints included
};

// Sup-norm and trapezoid L1 difference; statistic is the sup-norm.
CheckReport grid_compare(const Density& a, const Density& b, const GridSpec& grid,
                         double threshold);

// Trapezoid integral of the pdf. Without a grid the support box is used,
// pulled in by 1e-12 of its width so open boundaries are not sampled.
CheckReport normalization_check(const Density& d, const std::optional<GridSpec>& grid = {},
                                double tolerance = 1e-3);
double grid_integral(const Density& d, const GridSpec& grid);

double sample_mean(const Vector& x);
double sample_covariance(const Vector& x, const Vector& y);
double sample_correlation(const Vector& x, const Vector& y);

}  // namespace siplab
