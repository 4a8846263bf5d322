#include "forward_maps.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace siplab {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kRankThreshold = 1e-8;
}  // namespace

ForwardMap::ForwardMap(std::string name, int input_dim, int output_dim,
                       EvalFn eval, JacobianFn jacobian, Support domain)
    : name_(std::move(name)),
      input_dim_(input_dim),
      output_dim_(output_dim),
      eval_(std::move(eval)),
      jacobian_(std::move(jacobian)),
      domain_(std::move(domain)) {
  require(output_dim_ >= 1 && input_dim_ >= output_dim_, ErrorCode::kDimension,
          "forward map needs p >= q >= 1 (got p=" + std::to_string(input_dim_) +
              ", q=" + std::to_string(output_dim_) + ")");
  require(domain_.dim() == input_dim_, ErrorCode::kDimension,
          "forward map domain does not match its input dimension");
  require(static_cast<bool>(eval_), ErrorCode::kInvalidArgument,
          "forward map needs an evaluation function");
}

void ForwardMap::check_input(const Vector& theta) const {
  require(theta.size() == input_dim_, ErrorCode::kDimension,
          name_ + ": expected a point of dimension " + std::to_string(input_dim_));
  if (!domain_.contains(theta)) {
    fail(ErrorCode::kDomain,
         name_ + ": point " + format_vector(theta) + " is outside the domain");
  }
}

Vector ForwardMap::eval(const Vector& theta) const {
  check_input(theta);
  return eval_(theta);
}

Matrix ForwardMap::jacobian(const Vector& theta) const {
  require(theta.size() == input_dim_, ErrorCode::kDimension,
          name_ + ": expected a point of dimension " + std::to_string(input_dim_));
  if (jacobian_) return jacobian_(theta);
  return finite_difference_jacobian(theta);
}

Matrix ForwardMap::finite_difference_jacobian(const Vector& theta) const {
  Matrix jac(output_dim_, input_dim_);
  Vector probe = theta;
  for (int i = 0; i < input_dim_; ++i) {
    const double h = std::max(1e-6, 1e-6 * std::abs(theta[i]));
    probe[i] = theta[i] + h;
    const Vector up = eval_(probe);
    probe[i] = theta[i] - h;
    const Vector down = eval_(probe);
    probe[i] = theta[i];
    jac.col(i) = (up - down) / (2.0 * h);
  }
  return jac;
}

JacobianReport ForwardMap::jacobian_at(const Vector& theta) const {
  check_input(theta);
  JacobianReport report;
  report.analytic = has_analytic_jacobian();
  report.jacobian = jacobian(theta);
  report.row_rank = numerical_row_rank(report.jacobian);
  report.full_row_rank = report.row_rank == output_dim_;
  return report;
}

ForwardMap ForwardMap::with_finite_differences() const {
  return ForwardMap(name_ + "-fd", input_dim_, output_dim_, eval_, nullptr, domain_);
}

int numerical_row_rank(const Matrix& m) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<Matrix> svd(m);
  const Vector& s = svd.singularValues();
  if (s.size() == 0 || !(s[0] > 0.0)) return 0;
  int rank = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s[i] > kRankThreshold * s[0]) ++rank;
  }
  return rank;
}

// ---------------------------------------------------------------------------
// Built-in maps

ForwardMap linear_map(const Matrix& a, std::string name) {
  require(a.rows() >= 1 && a.cols() >= a.rows(), ErrorCode::kDimension,
          "linear map needs a q x p matrix with p >= q");
  const int p = static_cast<int>(a.cols());
  return ForwardMap(
      std::move(name), p, static_cast<int>(a.rows()),
      [a](const Vector& theta) -> Vector { return a * theta; },
      [a](const Vector&) -> Matrix { return a; }, Support::whole(p));
}

ForwardMap half_squared_radius_map() {
  Support domain = Support::box(Vector::Zero(2), Vector::Ones(2));
  domain.indicator = [](const Vector& t) { return t[0] > 0.0 && t[1] > 0.0; };
  return ForwardMap(
      "half-squared-radius", 2, 1,
      [](const Vector& t) -> Vector {
        return Vector::Constant(1, 0.5 * (t[0] * t[0] + t[1] * t[1]));
      },
      [](const Vector& t) -> Matrix {
        Matrix j(1, 2);
        j << t[0], t[1];
        return j;
      },
      std::move(domain));
}

ForwardMap square_map(double lo, double hi) {
  Support domain = Support::box(Vector::Constant(1, lo), Vector::Constant(1, hi));
  domain.indicator = [lo, hi](const Vector& t) { return t[0] > lo && t[0] < hi; };
  return ForwardMap(
      "square", 1, 1,
      [](const Vector& t) -> Vector { return Vector::Constant(1, t[0] * t[0]); },
      [](const Vector& t) -> Matrix { return Matrix::Constant(1, 1, 2.0 * t[0]); },
      std::move(domain));
}

ForwardMap sum_map() {
  return ForwardMap(
      "sum", 2, 1,
      [](const Vector& t) -> Vector { return Vector::Constant(1, t[0] + t[1]); },
      [](const Vector&) -> Matrix { return Matrix::Ones(1, 2); }, Support::whole(2));
}

ForwardMap identity_map(int dim) {
  return ForwardMap(
      "identity", dim, dim, [](const Vector& t) -> Vector { return t; },
      [dim](const Vector&) -> Matrix { return Matrix::Identity(dim, dim); },
      Support::whole(dim));
}

// ---------------------------------------------------------------------------
// Identity augmentation

std::vector<Vector> domain_probes(const Support& domain, int count,
                                  std::uint64_t seed) {
  std::vector<Vector> probes;
  const std::uint64_t root = mix_seed(seed, stream::kPilot);
  for (int k = 0, attempt = 0; k < count && attempt < 100 * count; ++attempt) {
    Rng rng = make_stream(root, static_cast<std::uint64_t>(attempt));
    Vector x(domain.dim());
    for (int i = 0; i < domain.dim(); ++i) {
      const double lo = domain.lower[i];
      const double hi = domain.upper[i];
      if (std::isfinite(lo) && std::isfinite(hi)) {
        x[i] = lo + uniform01(rng) * (hi - lo);
      } else if (std::isfinite(lo)) {
        x[i] = lo + std::abs(standard_normal(rng));
      } else if (std::isfinite(hi)) {
        x[i] = hi - std::abs(standard_normal(rng));
      } else {
        x[i] = standard_normal(rng);
      }
    }
    if (domain.contains(x)) {
      probes.push_back(std::move(x));
      ++k;
    }
  }
  return probes;
}

double AugmentedMap::determinant(const Vector& theta) const {
  return augmented_.jacobian(theta).determinant();
}

AugmentedMap augment_identity(const ForwardMap& map,
                              const std::vector<Vector>& probes_in) {
  const int p = map.input_dim();
  const int q = map.output_dim();
  if (p == q) return AugmentedMap(map, map);

  const std::vector<Vector> probes =
      probes_in.empty() ? domain_probes(map.domain(), 16, 0x41554721ULL) : probes_in;
  for (const Vector& probe : probes) {
    const Matrix jac = map.jacobian(probe);
    const Matrix left = jac.leftCols(q);
    if (numerical_row_rank(left) == q) continue;
    std::ostringstream os;
    os << map.name() << ": left " << q << "x" << q
       << " Jacobian block is singular at " << format_vector(probe);
    if (numerical_row_rank(jac) == q) {
      Eigen::ColPivHouseholderQR<Matrix> qr(jac);
      const auto& perm = qr.colsPermutation().indices();
      os << "; permute coordinates so that columns (";
      for (int i = 0; i < q; ++i) os << (i ? ", " : "") << perm[i] + 1;
      os << ") come first";
    } else {
      os << "; the full Jacobian is rank deficient there as well";
    }
    fail(ErrorCode::kRankDeficient, os.str());
  }

  const ForwardMap base = map;
  auto eval = [base, p, q](const Vector& theta) -> Vector {
    Vector out(p);
    out.head(q) = base.eval_unchecked(theta);
    out.tail(p - q) = theta.tail(p - q);
    return out;
  };
  ForwardMap::JacobianFn jac;
  if (map.has_analytic_jacobian()) {
    jac = [base, p, q](const Vector& theta) -> Matrix {
      Matrix j = Matrix::Zero(p, p);
      j.topRows(q) = base.jacobian(theta);
      j.bottomRightCorner(p - q, p - q).setIdentity();
      return j;
    };
  }
  ForwardMap augmented(map.name() + "+identity", p, p, std::move(eval),
                       std::move(jac), map.domain());
  return AugmentedMap(map, std::move(augmented));
}

Matrix null_space_rows(const Matrix& a) {
  const Eigen::Index q = a.rows();
  const Eigen::Index p = a.cols();
  require(q >= 1 && p >= q, ErrorCode::kDimension,
          "null_space_rows needs a q x p matrix with p >= q");
  require(numerical_row_rank(a) == q, ErrorCode::kRankDeficient,
          "matrix does not have full row rank");
  if (p == q) return Matrix(0, p);
  Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeFullV);
  return svd.matrixV().rightCols(p - q).transpose();
}

}  // namespace siplab
