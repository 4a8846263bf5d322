#include "densities.hpp"

#include <boost/math/distributions/normal.hpp>
#include <boost/math/special_functions/beta.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace siplab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
const double kLogSqrt2Pi = 0.5 * std::log(2.0 * M_PI);

double log_sum_exp(const std::vector<double>& terms) {
  const double peak = *std::max_element(terms.begin(), terms.end());
  if (!std::isfinite(peak)) return peak;
  double acc = 0.0;
  for (double t : terms) acc += std::exp(t - peak);
  return peak + std::log(acc);
}

}  // namespace

// ---------------------------------------------------------------------------
// Support

Support Support::box(Vector lower, Vector upper) {
  require(lower.size() == upper.size(), ErrorCode::kDimension,
          "support bounds have different lengths");
  for (Eigen::Index i = 0; i < lower.size(); ++i) {
    require(lower[i] < upper[i], ErrorCode::kDomain,
            "support box has lower >= upper in coordinate " + std::to_string(i));
  }
  Support s;
  s.lower = std::move(lower);
  s.upper = std::move(upper);
  return s;
}

Support Support::whole(int dim) {
  return box(Vector::Constant(dim, -kInf), Vector::Constant(dim, kInf));
}

bool Support::bounded() const {
  return lower.allFinite() && upper.allFinite();
}

bool Support::contains(const Vector& x) const {
  if (x.size() != lower.size()) return false;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (!(x[i] >= lower[i] && x[i] <= upper[i])) return false;
  }
  return !indicator || indicator(x);
}

// ---------------------------------------------------------------------------
// Parameter types

void GaussianParams::validate() const {
  require(mean.size() > 0, ErrorCode::kDimension, "Gaussian mean is empty");
  require(cov.rows() == mean.size() && cov.cols() == mean.size(),
          ErrorCode::kDimension, "Gaussian covariance does not match mean");
  const double asym = (cov - cov.transpose()).cwiseAbs().maxCoeff();
  require(asym <= 1e-12 * std::max(1.0, cov.cwiseAbs().maxCoeff()),
          ErrorCode::kNotPositiveDefinite,
          "covariance is not symmetric (residual " + std::to_string(asym) + ")");
  Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (cov + cov.transpose()),
                                            Eigen::EigenvaluesOnly);
  const double smallest = eig.eigenvalues().minCoeff();
  if (!(smallest > 0.0)) {
    std::ostringstream os;
    os << "covariance is not positive definite: eigenvalue " << smallest
       << " <= 0";
    fail(ErrorCode::kNotPositiveDefinite, os.str());
  }
}

MixtureWeights::MixtureWeights(std::vector<double> weights)
    : weights_(std::move(weights)) {
  require(!weights_.empty(), ErrorCode::kInvalidArgument,
          "mixture needs at least one weight");
  double sum = 0.0;
  for (double w : weights_) {
    require(w >= 0.0 && std::isfinite(w), ErrorCode::kInvalidArgument,
            "mixture weights must be nonnegative");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-12) {
    std::ostringstream os;
    os << "mixture weights sum to " << sum << ", not 1";
    fail(ErrorCode::kInvalidArgument, os.str());
  }
}

std::vector<std::string> default_labels(int dim, const std::string& stem) {
  std::vector<std::string> labels;
  for (int i = 0; i < dim; ++i) labels.push_back(stem + std::to_string(i + 1));
  return labels;
}

// ---------------------------------------------------------------------------
// Density handle

double DensityModel::pdf(const Vector& x) const { return std::exp(log_pdf(x)); }

Vector DensityModel::draw(Rng&) const {
  fail(ErrorCode::kInvalidArgument, "density has no sampler");
}

double DensityModel::marginal_cdf(int, double) const {
  fail(ErrorCode::kInvalidArgument, "density has no analytic marginal CDF");
}

Density::Density(std::shared_ptr<const DensityModel> model)
    : model_(std::move(model)) {}

void Density::check_dim(const Vector& x) const {
  if (x.size() != dim()) {
    fail(ErrorCode::kDimension, "point of dimension " + std::to_string(x.size()) +
                                    " passed to density of dimension " +
                                    std::to_string(dim()));
  }
}

double Density::pdf(const Vector& x) const {
  check_dim(x);
  if (!support().contains(x)) return 0.0;
  return model_->pdf(x);
}

double Density::log_pdf(const Vector& x) const {
  check_dim(x);
  if (!support().contains(x)) return -kInf;
  return model_->log_pdf(x);
}

Vector Density::draw(Rng& rng) const { return model_->draw(rng); }

SampleBatch Density::sample(Eigen::Index count, std::uint64_t seed,
                            std::vector<std::string> labels) const {
  require(count >= 0, ErrorCode::kInvalidArgument, "negative sample count");
  require(has_sampler(), ErrorCode::kInvalidArgument, "density has no sampler");
  SampleBatch batch;
  batch.seed = seed;
  batch.labels = labels.empty() ? default_labels(dim()) : std::move(labels);
  require(static_cast<int>(batch.labels.size()) == dim(), ErrorCode::kDimension,
          "label count does not match density dimension");
  batch.data.resize(count, dim());
  const std::uint64_t root = mix_seed(seed, stream::kRows);
  parallel_for(static_cast<std::size_t>(count), [&](std::size_t i) {
    Rng rng = make_stream(root, i);
    batch.data.row(static_cast<Eigen::Index>(i)) = model_->draw(rng).transpose();
  });
  return batch;
}

double Density::marginal_cdf(int coord, double x) const {
  require(coord >= 0 && coord < dim(), ErrorCode::kDimension,
          "marginal index out of range");
  return model_->marginal_cdf(coord, x);
}

// ---------------------------------------------------------------------------
// Closure-backed densities

namespace {

class FunctionDensity final : public DensityModel {
 public:
  explicit FunctionDensity(FunctionDensitySpec spec) : spec_(std::move(spec)) {}

  int dim() const override { return spec_.dim; }
  const Support& support() const override { return spec_.support; }
  double log_pdf(const Vector& x) const override { return spec_.log_pdf(x); }
  double pdf(const Vector& x) const override {
    return spec_.pdf ? spec_.pdf(x) : std::exp(spec_.log_pdf(x));
  }
  bool has_sampler() const override { return static_cast<bool>(spec_.draw); }
  Vector draw(Rng& rng) const override {
    if (!spec_.draw) return DensityModel::draw(rng);
    return spec_.draw(rng);
  }
  bool has_marginal_cdf() const override {
    return static_cast<bool>(spec_.marginal_cdf);
  }
  double marginal_cdf(int coord, double x) const override {
    if (!spec_.marginal_cdf) return DensityModel::marginal_cdf(coord, x);
    return spec_.marginal_cdf(coord, x);
  }

 private:
  FunctionDensitySpec spec_;
};

class Gaussian final : public DensityModel {
 public:
  explicit Gaussian(const GaussianParams& params)
      : mean_(params.mean),
        chol_(0.5 * (params.cov + params.cov.transpose())),
        support_(Support::whole(params.dim())) {
    const Matrix l = chol_.matrixL();
    stddev_ = params.cov.diagonal().cwiseSqrt();
    log_norm_ = -params.dim() * kLogSqrt2Pi -
                l.diagonal().array().log().sum();
  }

  int dim() const override { return static_cast<int>(mean_.size()); }
  const Support& support() const override { return support_; }
  double log_pdf(const Vector& x) const override {
    const Vector z = chol_.matrixL().solve(x - mean_);
    return log_norm_ - 0.5 * z.squaredNorm();
  }
  bool has_sampler() const override { return true; }
  Vector draw(Rng& rng) const override {
    Vector z(dim());
    for (int i = 0; i < dim(); ++i) z[i] = standard_normal(rng);
    return mean_ + chol_.matrixL() * z;
  }
  bool has_marginal_cdf() const override { return true; }
  double marginal_cdf(int coord, double x) const override {
    return normal_cdf((x - mean_[coord]) / stddev_[coord]);
  }

 private:
  Vector mean_;
  Eigen::LLT<Matrix> chol_;
  Vector stddev_;
  double log_norm_ = 0.0;
  Support support_;
};

class TruncatedGaussian final : public DensityModel {
 public:
  TruncatedGaussian(double mu, double sigma, double lo, double hi)
      : mu_(mu), sigma_(sigma), lo_(lo), hi_(hi),
        support_(Support::box(Vector::Constant(1, lo), Vector::Constant(1, hi))) {
    cdf_lo_ = normal_cdf((lo - mu) / sigma);
    cdf_hi_ = normal_cdf((hi - mu) / sigma);
    mass_ = cdf_hi_ - cdf_lo_;
    require(mass_ > 0.0, ErrorCode::kDomain,
            "truncation interval carries no Gaussian mass");
    log_norm_ = -kLogSqrt2Pi - std::log(sigma) - std::log(mass_);
  }

  int dim() const override { return 1; }
  const Support& support() const override { return support_; }
  double log_pdf(const Vector& x) const override {
    const double z = (x[0] - mu_) / sigma_;
    return log_norm_ - 0.5 * z * z;
  }
  bool has_sampler() const override { return true; }
  Vector draw(Rng& rng) const override {
    const double u = cdf_lo_ + uniform01(rng) * mass_;
    const double x = mu_ + sigma_ * normal_quantile(u);
    return Vector::Constant(1, std::clamp(x, lo_, hi_));
  }
  bool has_marginal_cdf() const override { return true; }
  double marginal_cdf(int, double x) const override {
    if (x <= lo_) return 0.0;
    if (x >= hi_) return 1.0;
    return (normal_cdf((x - mu_) / sigma_) - cdf_lo_) / mass_;
  }

 private:
  double mu_, sigma_, lo_, hi_;
  double cdf_lo_ = 0.0, cdf_hi_ = 1.0, mass_ = 1.0, log_norm_ = 0.0;
  Support support_;
};

class Beta final : public DensityModel {
 public:
  Beta(double a, double b)
      : a_(a), b_(b),
        support_(Support::box(Vector::Zero(1), Vector::Ones(1))) {
    support_.indicator = [](const Vector& x) { return x[0] > 0.0 && x[0] < 1.0; };
    log_beta_ = std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
  }

  int dim() const override { return 1; }
  const Support& support() const override { return support_; }
  double log_pdf(const Vector& x) const override {
    return (a_ - 1.0) * std::log(x[0]) + (b_ - 1.0) * std::log1p(-x[0]) - log_beta_;
  }
  bool has_sampler() const override { return true; }
  Vector draw(Rng& rng) const override {
    // Gamma ratio; redraw the measure-zero endpoints.
    for (;;) {
      std::gamma_distribution<double> ga(a_, 1.0), gb(b_, 1.0);
      const double x = ga(rng);
      const double y = gb(rng);
      const double v = x / (x + y);
      if (v > 0.0 && v < 1.0) return Vector::Constant(1, v);
    }
  }
  bool has_marginal_cdf() const override { return true; }
  double marginal_cdf(int, double x) const override {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    return boost::math::ibeta(a_, b_, x);
  }

 private:
  double a_, b_;
  double log_beta_ = 0.0;
  Support support_;
};

class Uniform final : public DensityModel {
 public:
  Uniform(const Vector& lower, const Vector& upper)
      : support_(Support::box(lower, upper)) {
    require(support_.bounded(), ErrorCode::kDomain,
            "uniform density needs a bounded box");
    log_pdf_ = -(upper - lower).array().log().sum();
  }

  int dim() const override { return support_.dim(); }
  const Support& support() const override { return support_; }
  double log_pdf(const Vector&) const override { return log_pdf_; }
  bool has_sampler() const override { return true; }
  Vector draw(Rng& rng) const override {
    Vector x(dim());
    for (int i = 0; i < dim(); ++i) {
      x[i] = support_.lower[i] + uniform01(rng) * (support_.upper[i] - support_.lower[i]);
    }
    return x;
  }
  bool has_marginal_cdf() const override { return true; }
  double marginal_cdf(int coord, double x) const override {
    const double lo = support_.lower[coord];
    const double hi = support_.upper[coord];
    return std::clamp((x - lo) / (hi - lo), 0.0, 1.0);
  }

 private:
  Support support_;
  double log_pdf_ = 0.0;
};

class Mixture final : public DensityModel {
 public:
  Mixture(std::vector<Density> components, std::vector<double> weights)
      : components_(std::move(components)), weights_(std::move(weights)) {
    Vector lo = components_.front().support().lower;
    Vector hi = components_.front().support().upper;
    for (const auto& c : components_) {
      lo = lo.cwiseMin(c.support().lower);
      hi = hi.cwiseMax(c.support().upper);
    }
    support_ = Support::box(lo, hi);
    support_.indicator = [comps = components_](const Vector& x) {
      return std::any_of(comps.begin(), comps.end(),
                         [&](const Density& c) { return c.support().contains(x); });
    };
    cumulative_.resize(weights_.size());
    std::partial_sum(weights_.begin(), weights_.end(), cumulative_.begin());
  }

  int dim() const override { return components_.front().dim(); }
  const Support& support() const override { return support_; }
  double pdf(const Vector& x) const override {
    double acc = 0.0;
    for (std::size_t i = 0; i < components_.size(); ++i) {
      if (weights_[i] > 0.0) acc += weights_[i] * components_[i].pdf(x);
    }
    return acc;
  }
  double log_pdf(const Vector& x) const override {
    std::vector<double> terms;
    for (std::size_t i = 0; i < components_.size(); ++i) {
      if (weights_[i] > 0.0) {
        terms.push_back(std::log(weights_[i]) + components_[i].log_pdf(x));
      }
    }
    return log_sum_exp(terms);
  }
  bool has_sampler() const override {
    return std::all_of(components_.begin(), components_.end(),
                       [](const Density& c) { return c.has_sampler(); });
  }
  Vector draw(Rng& rng) const override {
    const double u = uniform01(rng);
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
    std::size_t idx = std::min<std::size_t>(it - cumulative_.begin(),
                                            components_.size() - 1);
    while (weights_[idx] == 0.0 && idx > 0) --idx;
    return components_[idx].draw(rng);
  }
  bool has_marginal_cdf() const override {
    return std::all_of(components_.begin(), components_.end(),
                       [](const Density& c) { return c.has_marginal_cdf(); });
  }
  double marginal_cdf(int coord, double x) const override {
    double acc = 0.0;
    for (std::size_t i = 0; i < components_.size(); ++i) {
      acc += weights_[i] * components_[i].marginal_cdf(coord, x);
    }
    return acc;
  }

 private:
  std::vector<Density> components_;
  std::vector<double> weights_;
  std::vector<double> cumulative_;
  Support support_;
};

class Kde final : public DensityModel {
 public:
  Kde(Matrix centers, Vector bandwidth)
      : centers_(std::move(centers)),
        inv_h_(bandwidth.cwiseInverse()),
        bandwidth_(std::move(bandwidth)),
        support_(Support::whole(static_cast<int>(centers_.cols()))) {
    log_norm_ = -std::log(static_cast<double>(centers_.rows())) -
                bandwidth_.array().log().sum() -
                static_cast<double>(centers_.cols()) * kLogSqrt2Pi;
  }

  int dim() const override { return static_cast<int>(centers_.cols()); }
  const Support& support() const override { return support_; }
  double log_pdf(const Vector& x) const override {
    const Eigen::Index m = centers_.rows();
    std::vector<double> terms(static_cast<std::size_t>(m));
    for (Eigen::Index i = 0; i < m; ++i) {
      double q = 0.0;
      for (Eigen::Index j = 0; j < centers_.cols(); ++j) {
        const double z = (x[j] - centers_(i, j)) * inv_h_[j];
        q += z * z;
      }
      terms[static_cast<std::size_t>(i)] = -0.5 * q;
    }
    return log_norm_ + log_sum_exp(terms);
  }
  bool has_sampler() const override { return true; }
  Vector draw(Rng& rng) const override {
    const auto m = static_cast<std::uint64_t>(centers_.rows());
    const auto i = static_cast<Eigen::Index>(
        std::min<std::uint64_t>(static_cast<std::uint64_t>(uniform01(rng) * m), m - 1));
    Vector x = centers_.row(i).transpose();
    for (int j = 0; j < dim(); ++j) x[j] += bandwidth_[j] * standard_normal(rng);
    return x;
  }
  bool has_marginal_cdf() const override { return true; }
  double marginal_cdf(int coord, double x) const override {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < centers_.rows(); ++i) {
      acc += normal_cdf((x - centers_(i, coord)) * inv_h_[coord]);
    }
    return acc / static_cast<double>(centers_.rows());
  }

 private:
  Matrix centers_;
  Vector inv_h_;
  Vector bandwidth_;
  double log_norm_ = 0.0;
  Support support_;
};

}  // namespace

Density make_function_density(FunctionDensitySpec spec) {
  require(spec.dim > 0 && spec.support.dim() == spec.dim, ErrorCode::kDimension,
          "function density support does not match its dimension");
  require(static_cast<bool>(spec.log_pdf), ErrorCode::kInvalidArgument,
          "function density needs a log-pdf");
  return Density(std::make_shared<FunctionDensity>(std::move(spec)));
}

Density make_gaussian(const GaussianParams& params) {
  params.validate();
  return Density(std::make_shared<Gaussian>(params));
}

Density make_truncated_gaussian(double mu, double sigma, double lo, double hi) {
  require(sigma > 0.0, ErrorCode::kDomain, "truncated Gaussian needs sigma > 0");
  require(lo < hi, ErrorCode::kDomain, "truncated Gaussian needs lo < hi");
  return Density(std::make_shared<TruncatedGaussian>(mu, sigma, lo, hi));
}

Density make_beta(double a, double b) {
  require(a > 0.0 && b > 0.0, ErrorCode::kDomain,
          "Beta shape parameters must be positive");
  return Density(std::make_shared<Beta>(a, b));
}

Density make_uniform(const Vector& lower, const Vector& upper) {
  return Density(std::make_shared<Uniform>(lower, upper));
}

Density make_mixture(const std::vector<Density>& components,
                     const MixtureWeights& weights) {
  require(!components.empty(), ErrorCode::kInvalidArgument,
          "mixture needs at least one component");
  require(components.size() == weights.size(), ErrorCode::kDimension,
          "mixture has " + std::to_string(components.size()) + " components but " +
              std::to_string(weights.size()) + " weights");
  for (const auto& c : components) {
    require(c.dim() == components.front().dim(), ErrorCode::kDimension,
            "mixture components differ in dimension");
  }
  return Density(std::make_shared<Mixture>(components, weights.values()));
}

Vector scott_bandwidth(const SampleBatch& samples) {
  const Eigen::Index m = samples.rows();
  const Eigen::Index d = samples.dim();
  require(m >= 2, ErrorCode::kInvalidArgument,
          "KDE bandwidth is undefined for fewer than 2 samples");
  const Vector mean = samples.data.colwise().mean().transpose();
  const Matrix centered = samples.data.rowwise() - mean.transpose();
  const Matrix cov = centered.transpose() * centered / static_cast<double>(m - 1);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(cov, Eigen::EigenvaluesOnly);
  const double top = eig.eigenvalues().maxCoeff();
  const double bottom = eig.eigenvalues().minCoeff();
  if (!(top > 0.0) || bottom <= 1e-12 * top) {
    fail(ErrorCode::kNotPositiveDefinite,
         "sample covariance is degenerate; add a small jitter to the samples "
         "before fitting a KDE");
  }
  const double factor = std::pow(static_cast<double>(m), -1.0 / (static_cast<double>(d) + 4.0));
  return cov.diagonal().cwiseSqrt() * factor;
}

Density fit_kde(const SampleBatch& samples, const std::optional<Vector>& bandwidth) {
  Vector h = bandwidth ? *bandwidth : scott_bandwidth(samples);
  require(samples.rows() >= 2, ErrorCode::kInvalidArgument,
          "KDE needs at least 2 samples");
  require(h.size() == samples.dim(), ErrorCode::kDimension,
          "bandwidth length does not match sample dimension");
  require((h.array() > 0.0).all(), ErrorCode::kInvalidArgument,
          "bandwidths must be positive");
  return Density(std::make_shared<Kde>(samples.data, std::move(h)));
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double normal_quantile(double p) {
  if (p <= 0.0) return -kInf;
  if (p >= 1.0) return kInf;
  return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

}  // namespace siplab
