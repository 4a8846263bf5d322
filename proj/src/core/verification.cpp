#include "verification.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace siplab {

CheckReport CheckReport::make(std::string name, double statistic, double threshold,
                              Comparison comparison, std::string details) {
  CheckReport r;
  r.name = std::move(name);
  r.statistic = statistic;
  r.threshold = threshold;
  r.comparison = comparison;
  r.details = std::move(details);
  r.pass = comparison == Comparison::kAtLeast ? statistic >= threshold : statistic <= threshold;
  return r;
}

double kolmogorov_survival(double lambda) {
  if (!(lambda > 0.0)) return 1.0;
  if (lambda < 1.18) {
    // Theta-function form, fast for small lambda.
    const double c = -M_PI * M_PI / (8.0 * lambda * lambda);
    double sum = 0.0;
    for (int k = 1; k <= 7; k += 2) sum += std::exp(c * k * k);
    return std::clamp(1.0 - std::sqrt(2.0 * M_PI) / lambda * sum, 0.0, 1.0);
  }
  double sum = 0.0;
  double sign = 1.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += sign * term;
    if (term < 1e-300) break;
    sign = -sign;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf) {
  require(!samples.empty(), ErrorCode::kInvalidArgument, "KS test needs samples");
  std::sort(samples.begin(), samples.end());
  const double m = static_cast<double>(samples.size());
  double d = 0.0;
  double prev = -1.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    if (!(f >= -1e-12 && f <= 1.0 + 1e-12) || f < prev - 1e-12) {
      std::ostringstream os;
      os << "cdf is not a monotone map into [0, 1] near x = " << samples[i];
      fail(ErrorCode::kInvalidArgument, os.str());
    }
    prev = std::max(prev, f);
    d = std::max({d, (static_cast<double>(i) + 1.0) / m - f, f - static_cast<double>(i) / m});
  }
  return d;
}

KsResult ks_test_1d(std::vector<double> samples, const std::function<double(double)>& cdf) {
  require(samples.size() >= 8, ErrorCode::kInvalidArgument,
          "KS p-value needs at least 8 samples");
  const double m = static_cast<double>(samples.size());
  KsResult r;
  r.statistic = ks_statistic(std::move(samples), cdf);
  const double en = std::sqrt(m);
  r.p_value = kolmogorov_survival((en + 0.12 + 0.11 / en) * r.statistic);
  return r;
}

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  require(a.size() >= 8 && b.size() >= 8, ErrorCode::kInvalidArgument,
          "two-sample KS needs at least 8 samples per side");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  KsResult r;
  r.statistic = d;
  const double en = std::sqrt(na * nb / (na + nb));
  r.p_value = kolmogorov_survival((en + 0.12 + 0.11 / en) * d);
  return r;
}

double energy_permutation_test(const Matrix& x, const Matrix& y, int permutations,
                               std::uint64_t seed, Eigen::Index max_points) {
  require(x.cols() == y.cols(), ErrorCode::kDimension, "energy test: dimension mismatch");
  require(x.rows() >= 2 && y.rows() >= 2, ErrorCode::kInvalidArgument,
          "energy test needs at least two points per side");
  const Eigen::Index nx = std::min(x.rows(), max_points);
  const Eigen::Index ny = std::min(y.rows(), max_points);
  const Eigen::Index n = nx + ny;

  // Evenly strided subsample keeps the test deterministic without extra draws.
  Matrix pooled(n, x.cols());
  for (Eigen::Index i = 0; i < nx; ++i) pooled.row(i) = x.row(i * x.rows() / nx);
  for (Eigen::Index i = 0; i < ny; ++i) pooled.row(nx + i) = y.row(i * y.rows() / ny);

  Matrix dist(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    dist(i, i) = 0.0;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      dist(i, j) = dist(j, i) = (pooled.row(i) - pooled.row(j)).norm();
    }
  }

  const auto statistic = [&](const std::vector<Eigen::Index>& order) {
    double xy = 0.0, xx = 0.0, yy = 0.0;
    for (Eigen::Index a = 0; a < n; ++a) {
      const bool in_x = a < nx;
      for (Eigen::Index b = a + 1; b < n; ++b) {
        const double d = dist(order[a], order[b]);
        const bool b_x = b < nx;
        if (in_x && b_x) xx += d;
        else if (!in_x && !b_x) yy += d;
        else xy += d;
      }
    }
    const double fx = static_cast<double>(nx);
    const double fy = static_cast<double>(ny);
    return 2.0 * xy / (fx * fy) - 2.0 * xx / (fx * fx) - 2.0 * yy / (fy * fy);
  };

  std::vector<Eigen::Index> identity(static_cast<std::size_t>(n));
  std::iota(identity.begin(), identity.end(), Eigen::Index{0});
  const double observed = statistic(identity);

  std::vector<char> exceed(static_cast<std::size_t>(permutations), 0);
  const std::uint64_t root = mix_seed(seed, stream::kPermutation);
  parallel_for(static_cast<std::size_t>(permutations), [&](std::size_t k) {
    Rng rng = make_stream(root, k);
    std::vector<Eigen::Index> order = identity;
    // Fisher-Yates with our own uniform draws so the result is portable.
    for (std::size_t i = order.size() - 1; i > 0; --i) {
      const auto j = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(i + 1));
      std::swap(order[i], order[std::min(j, i)]);
    }
    exceed[k] = statistic(order) >= observed ? 1 : 0;
  });
  const double hits = static_cast<double>(std::count(exceed.begin(), exceed.end(), 1));
  return (1.0 + hits) / (1.0 + permutations);
}

CheckReport pushforward_check(const SampleBatch& samples, const ForwardMap& map,
                              const Density& observed, double alpha, std::uint64_t seed) {
  const int q = map.output_dim();
  require(samples.dim() == map.input_dim(), ErrorCode::kDimension,
          "samples do not match the map input");
  require(observed.dim() == q, ErrorCode::kDimension,
          "observable density does not match the map output");
  require(samples.rows() >= 8, ErrorCode::kInvalidArgument,
          "pushforward check needs at least 8 samples");

  Matrix images(samples.rows(), q);
  for (Eigen::Index i = 0; i < samples.rows(); ++i) {
    images.row(i) = map.eval(samples.data.row(i).transpose()).transpose();
  }

  std::optional<SampleBatch> reference;
  if (!observed.has_marginal_cdf() || q >= 2) {
    require(observed.has_sampler(), ErrorCode::kInvalidArgument,
            "observable density has neither marginal CDFs nor a sampler");
    reference = observed.sample(std::max<Eigen::Index>(samples.rows(), 10000),
                                mix_seed(seed, stream::kReference));
  }

  std::ostringstream details;
  double min_p = 1.0;
  std::vector<std::pair<std::string, double>> metrics;
  for (int j = 0; j < q; ++j) {
    std::vector<double> col(images.col(j).data(), images.col(j).data() + images.rows());
    KsResult ks;
    if (observed.has_marginal_cdf()) {
      ks = ks_test_1d(std::move(col), [&](double x) { return observed.marginal_cdf(j, x); });
    } else {
      const auto& ref = reference->data;
      ks = ks_two_sample(std::move(col), std::vector<double>(ref.col(j).data(),
                                                             ref.col(j).data() + ref.rows()));
    }
    details << "y" << (j + 1) << ": D=" << ks.statistic << " p=" << ks.p_value << "; ";
    metrics.emplace_back("ks_D_y" + std::to_string(j + 1), ks.statistic);
    metrics.emplace_back("ks_p_y" + std::to_string(j + 1), ks.p_value);
    min_p = std::min(min_p, ks.p_value);
  }
  if (q >= 2) {
    const double p = energy_permutation_test(images, reference->data, 200, seed);
    details << "energy p=" << p << "; ";
    metrics.emplace_back("energy_p", p);
    min_p = std::min(min_p, p);
  }
  details << "M=" << samples.rows();
  CheckReport r = CheckReport::make("pushforward " + map.name(), min_p, alpha,
                                    Comparison::kAtLeast, details.str());
  r.metrics = std::move(metrics);
  return r;
}

CheckReport pushforward_check(const SipSolution& solution, const ForwardMap& map,
                              const Density& observed, Eigen::Index count, double alpha,
                              std::uint64_t seed) {
  require(solution.sampler_available(), ErrorCode::kInvalidArgument,
          std::string(to_string(solution.method)) +
              " solution has no sampler; use grid_compare against a reference density");
  const SampleOutcome drawn = solution.sample(count, seed);
  return pushforward_check(drawn.batch, map, observed, alpha, seed);
}

namespace {

void check_grid(const GridSpec& grid, int dim) {
  require(dim <= 3, ErrorCode::kDimension, "grid checks are limited to dim <= 3");
  require(grid.lower.size() == dim && grid.upper.size() == dim, ErrorCode::kDimension,
          "grid bounds do not match the density dimension");
  require(grid.points >= 2, ErrorCode::kInvalidArgument, "grid needs at least 2 points");
  for (int i = 0; i < dim; ++i) {
    require(std::isfinite(grid.lower[i]) && std::isfinite(grid.upper[i]) &&
                grid.lower[i] < grid.upper[i],
            ErrorCode::kDomain, "grid bounds must be finite with lower < upper");
  }
}

// Calls body(x, trapezoid weight) for every grid node.
template <class Body>
void for_each_node(const GridSpec& grid, Body&& body) {
  const int dim = static_cast<int>(grid.lower.size());
  const Vector step = (grid.upper - grid.lower) / (grid.points - 1);
  std::vector<int> idx(static_cast<std::size_t>(dim), 0);
  Vector x(dim);
  for (;;) {
    double w = 1.0;
    for (int i = 0; i < dim; ++i) {
      x[i] = grid.lower[i] + idx[i] * step[i];
      w *= step[i] * ((idx[i] == 0 || idx[i] == grid.points - 1) ? 0.5 : 1.0);
    }
    body(x, w);
    int k = 0;
    while (k < dim && ++idx[k] == grid.points) idx[k++] = 0;
    if (k == dim) return;
  }
}

}  // namespace

CheckReport grid_compare(const Density& a, const Density& b, const GridSpec& grid,
                         double threshold) {
  require(a.dim() == b.dim(), ErrorCode::kDimension, "densities have different dimensions");
  check_grid(grid, a.dim());
  double sup = 0.0;
  double l1 = 0.0;
  for_each_node(grid, [&](const Vector& x, double w) {
    const double diff = std::abs(a.pdf(x) - b.pdf(x));
    sup = std::max(sup, diff);
    l1 += w * diff;
  });
  std::ostringstream os;
  os << "sup=" << sup << " L1=" << l1 << " points/dim=" << grid.points;
  CheckReport r = CheckReport::make("grid compare", sup, threshold, Comparison::kAtMost, os.str());
  r.metrics = {{"sup", sup}, {"l1", l1}};
  return r;
}

double grid_integral(const Density& d, const GridSpec& grid) {
  check_grid(grid, d.dim());
  double total = 0.0;
  for_each_node(grid, [&](const Vector& x, double w) { total += w * d.pdf(x); });
  return total;
}

CheckReport normalization_check(const Density& d, const std::optional<GridSpec>& grid,
                                double tolerance) {
  GridSpec g;
  if (grid) {
    g = *grid;
  } else {
    require(d.support().bounded(), ErrorCode::kDomain,
            "support is unbounded; supply an effective grid box");
    const Vector width = d.support().upper - d.support().lower;
    g.lower = d.support().lower + 1e-12 * width;
    g.upper = d.support().upper - 1e-12 * width;
  }
  const double integral = grid_integral(d, g);
  std::ostringstream os;
  os << "integral=" << integral << " points/dim=" << g.points;
  CheckReport r = CheckReport::make("normalization", std::abs(integral - 1.0), tolerance,
                                    Comparison::kAtMost, os.str());
  r.metrics = {{"integral", integral}};
  return r;
}

double sample_mean(const Vector& x) {
  require(x.size() >= 1, ErrorCode::kInvalidArgument, "mean of an empty sample");
  return x.mean();
}

double sample_covariance(const Vector& x, const Vector& y) {
  require(x.size() == y.size() && x.size() >= 2, ErrorCode::kInvalidArgument,
          "covariance needs two equal-length samples of size >= 2");
  const double mx = x.mean();
  const double my = y.mean();
  return ((x.array() - mx) * (y.array() - my)).sum() / static_cast<double>(x.size() - 1);
}

double sample_correlation(const Vector& x, const Vector& y) {
  return sample_covariance(x, y) /
         std::sqrt(sample_covariance(x, x) * sample_covariance(y, y));
}

}  // namespace siplab
