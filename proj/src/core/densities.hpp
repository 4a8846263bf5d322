#pragma once

#include "common.hpp"
#include "random.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace siplab {

// Axis-aligned box (bounds may be infinite) plus an optional membership
// predicate for regions that are not boxes. Bounds are inclusive.
struct Support {
  Vector lower;
  Vector upper;
  std::function<bool(const Vector&)> indicator;

  static Support box(Vector lower, Vector upper);
  static Support whole(int dim);

  int dim() const { return static_cast<int>(lower.size()); }
  bool bounded() const;
  bool contains(const Vector& x) const;
};

struct GaussianParams {
  Vector mean;
  Matrix cov;

  int dim() const { return static_cast<int>(mean.size()); }
  // Throws kNotPositiveDefinite naming the offending eigenvalue.
  void validate() const;
};

class MixtureWeights {
 public:
  explicit MixtureWeights(std::vector<double> weights);
  const std::vector<double>& values() const { return weights_; }
  std::size_t size() const { return weights_.size(); }

 private:
  std::vector<double> weights_;
};

struct SampleBatch {
  Matrix data;  // rows are draws
  std::vector<std::string> labels;
  std::uint64_t seed = 0;

  Eigen::Index rows() const { return data.rows(); }
  Eigen::Index dim() const { return data.cols(); }
};

std::vector<std::string> default_labels(int dim, const std::string& stem = "x");

class DensityModel {
 public:
  virtual ~DensityModel() = default;

  virtual int dim() const = 0;
  virtual const Support& support() const = 0;
  // Only called for points inside the support.
  virtual double log_pdf(const Vector& x) const = 0;
  virtual double pdf(const Vector& x) const;

  virtual bool has_sampler() const { return false; }
  virtual Vector draw(Rng& rng) const;

  virtual bool has_marginal_cdf() const { return false; }
  virtual double marginal_cdf(int coord, double x) const;
};

// Immutable, cheaply copyable handle to a density model.
class Density {
 public:
  Density() = default;
  explicit Density(std::shared_ptr<const DensityModel> model);

  bool valid() const { return model_ != nullptr; }
  int dim() const { return model_->dim(); }
  const Support& support() const { return model_->support(); }

  // Both are total: outside the support pdf is 0 and log_pdf is -inf.
  double pdf(const Vector& x) const;
  double log_pdf(const Vector& x) const;

  bool has_sampler() const { return model_->has_sampler(); }
  Vector draw(Rng& rng) const;
  // Row i uses its own stream derived from (seed, i).
  SampleBatch sample(Eigen::Index count, std::uint64_t seed,
                     std::vector<std::string> labels = {}) const;

  bool has_marginal_cdf() const { return model_->has_marginal_cdf(); }
  double marginal_cdf(int coord, double x) const;

  const DensityModel& model() const { return *model_; }

 private:
  void check_dim(const Vector& x) const;

  std::shared_ptr<const DensityModel> model_;
};

// Adapter for densities defined by closures (solver outputs, ratios).
struct FunctionDensitySpec {
  int dim = 0;
  Support support;
  std::function<double(const Vector&)> log_pdf;
  std::function<double(const Vector&)> pdf;  // optional, else exp(log_pdf)
  std::function<Vector(Rng&)> draw;          // optional
  std::function<double(int, double)> marginal_cdf;  // optional
};

Density make_function_density(FunctionDensitySpec spec);

Density make_gaussian(const GaussianParams& params);
Density make_truncated_gaussian(double mu, double sigma, double lo, double hi);
Density make_beta(double a, double b);
Density make_uniform(const Vector& lower, const Vector& upper);
Density make_mixture(const std::vector<Density>& components,
                     const MixtureWeights& weights);

// Scott's rule: h_j = sd_j * M^(-1/(d+4)).
Vector scott_bandwidth(const SampleBatch& samples);
// Gaussian product-kernel KDE; bandwidth defaults to Scott's rule.
Density fit_kde(const SampleBatch& samples,
                const std::optional<Vector>& bandwidth = std::nullopt);

double normal_cdf(double z);
double normal_quantile(double p);

}  // namespace siplab
