#include "gaussian_algebra.hpp"

#include "forward_maps.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace siplab {

namespace {

constexpr double kSymmetryTolerance = 1e-10;
constexpr double kCrossCheckTolerance = 1e-10;

double scale_of(const Matrix& m) { return std::max(1.0, m.cwiseAbs().maxCoeff()); }

Matrix symmetric_part(const Matrix& s) { return 0.5 * (s + s.transpose()); }

}  // namespace

void StochasticMapSpec::validate() const {
  require(n >= 1, ErrorCode::kInvalidArgument, "replicate count must be >= 1");
  require(mu_y.size() == n, ErrorCode::kDimension,
          "mu_y must have one entry per replicate");
  require(sigma_y2 > 0.0 && sigma02 > 0.0 && sigma_eps2 > 0.0,
          ErrorCode::kDomain, "variances must be positive");
}

Matrix spd_inverse(const Matrix& s, const char* what) {
  require(s.rows() == s.cols(), ErrorCode::kDimension,
          std::string(what) + " is not square");
  const double asym = (s - s.transpose()).cwiseAbs().maxCoeff();
  require(asym <= kSymmetryTolerance * scale_of(s), ErrorCode::kNotPositiveDefinite,
          std::string(what) + " is not symmetric");
  Eigen::LLT<Matrix> llt(symmetric_part(s));
  if (llt.info() != Eigen::Success) {
    fail(ErrorCode::kNotPositiveDefinite,
         std::string(what) + " is not positive definite");
  }
  return symmetric_part(llt.solve(Matrix::Identity(s.rows(), s.cols())));
}

Matrix bjw_covariance_precision_form(const Matrix& a, const Matrix& sigma_y,
                                     const Matrix& sigma_theta) {
  const Matrix pushforward_cov = a * sigma_theta * a.transpose();
  const Matrix precision =
      a.transpose() * spd_inverse(sigma_y, "Sigma_y") * a -
      a.transpose() * spd_inverse(pushforward_cov, "A Sigma_theta A^T") * a +
      spd_inverse(sigma_theta, "Sigma_theta");
  Eigen::LLT<Matrix> llt(symmetric_part(precision));
  if (llt.info() != Eigen::Success) {
    fail(ErrorCode::kPredictability,
         "BJW precision matrix is not positive definite (predictability fails)");
  }
  return symmetric_part(llt.solve(Matrix::Identity(a.cols(), a.cols())));
}

Matrix bjw_covariance_woodbury_form(const Matrix& a, const Matrix& sigma_y,
                                    const Matrix& sigma_theta) {
  const Matrix b = a * sigma_theta * a.transpose();
  const Matrix st_at = sigma_theta * a.transpose();
  // With E = Sigma_y^-1 - B^-1, {E^-1 + B}^-1 = E (I + B E)^-1 = B^-1 (B - Sigma_y) B^-1,
  // which stays defined when E is singular.
  const Eigen::LLT<Matrix> b_llt(symmetric_part(b));
  require(b_llt.info() == Eigen::Success, ErrorCode::kNotPositiveDefinite,
          "A Sigma_theta A^T is not positive definite");
  const Matrix middle = b_llt.solve(b_llt.solve(b - sigma_y).transpose());
  return symmetric_part(sigma_theta - st_at * middle * st_at.transpose());
}

GaussianParams bjw_gaussian_linear(const Matrix& a, const Vector& mu_y,
                                   const Matrix& sigma_y, const Vector& mu_theta,
                                   const Matrix& sigma_theta) {
  const Eigen::Index q = a.rows();
  const Eigen::Index p = a.cols();
  require(q >= 1 && p >= q, ErrorCode::kDimension, "A must be q x p with p >= q");
  require(mu_y.size() == q && sigma_y.rows() == q && sigma_y.cols() == q,
          ErrorCode::kDimension, "observable moments do not match A");
  require(mu_theta.size() == p && sigma_theta.rows() == p && sigma_theta.cols() == p,
          ErrorCode::kDimension, "initial moments do not match A");
  require(numerical_row_rank(a) == q, ErrorCode::kRankDeficient,
          "A does not have full row rank");

  const Matrix sigma_y_inv = spd_inverse(sigma_y, "Sigma_y");
  const Matrix pushforward_inv = spd_inverse(a * sigma_theta * a.transpose(),
                                             "A Sigma_theta A^T");
  const Matrix sigma_theta_inv = spd_inverse(sigma_theta, "Sigma_theta");

  GaussianParams out;
  out.cov = bjw_covariance_precision_form(a, sigma_y, sigma_theta);
  const Matrix woodbury = bjw_covariance_woodbury_form(a, sigma_y, sigma_theta);
  const double gap = (out.cov - woodbury).cwiseAbs().maxCoeff();
  // Inverting the precision matrix loses digits in proportion to its condition number.
  const Vector ev = Eigen::SelfAdjointEigenSolver<Matrix>(out.cov, Eigen::EigenvaluesOnly).eigenvalues();
  const double condition = ev.maxCoeff() / std::max(ev.minCoeff(), 1e-300);
  const double tolerance = kCrossCheckTolerance + 1e-12 * condition +
                           std::numeric_limits<double>::epsilon() * condition * condition;
  if (gap > tolerance * scale_of(out.cov)) {
    std::ostringstream os;
    os << "precision and Woodbury forms of the BJW covariance disagree by " << gap;
    fail(ErrorCode::kNotPositiveDefinite, os.str());
  }
  out.mean = out.cov * (a.transpose() * sigma_y_inv * mu_y -
                        a.transpose() * pushforward_inv * a * mu_theta +
                        sigma_theta_inv * mu_theta);
  try {
    out.validate();
  } catch (const Error& e) {
    fail(ErrorCode::kPredictability,
         std::string("BJW covariance is not positive definite: ") + e.what());
  }
  return out;
}

StochasticMapConstants stochastic_map_constants(const StochasticMapSpec& spec) {
  spec.validate();
  const double n = spec.n;
  const double tau_eps = 1.0 / spec.sigma_eps2;
  const double tau0 = 1.0 / spec.sigma02;
  const double tau_y = 1.0 / spec.sigma_y2;
  const double s2y = spec.sigma_y2;

  StochasticMapConstants c{};
  c.c1 = tau_eps * tau_eps / (n * tau_eps + tau0);
  c.c2 = tau_eps - n * c.c1;
  c.c3 = tau_y - c.c2;
  c.c4 = tau_eps * tau_eps / (n * tau_eps + tau0) - c.c3 * c.c3 / (n * c.c3 + tau0);
  c.c5 = s2y * s2y * c.c4 / (n * s2y * c.c4 + 1.0);
  c.c6 = -c.c3 * (s2y - n * c.c5) / (n * c.c3 + tau0);
  c.c7 = 1.0 / (n * c.c3 + tau0) +
         n * c.c3 * c.c3 * (s2y - n * c.c5) / ((n * c.c3 + tau0) * (n * c.c3 + tau0));
  return c;
}

GaussianParams stochastic_map_mean_solution(const StochasticMapSpec& spec) {
  const StochasticMapConstants c = stochastic_map_constants(spec);
  const int n = spec.n;
  const double nd = n;
  const double tau0 = 1.0 / spec.sigma02;
  const double tau_y = 1.0 / spec.sigma_y2;
  const double s2y = spec.sigma_y2;
  const double mu0 = spec.mu0;
  const double mu_bar = spec.mu_y.mean();

  GaussianParams out;
  out.cov = Matrix::Zero(n + 1, n + 1);
  out.cov(0, 0) = c.c7;
  out.cov.block(0, 1, 1, n).setConstant(c.c6);
  out.cov.block(1, 0, n, 1).setConstant(c.c6);
  out.cov.bottomRightCorner(n, n) =
      s2y * Matrix::Identity(n, n) - c.c5 * Matrix::Ones(n, n);

  out.mean = Vector(n + 1);
  out.mean[0] = (nd * c.c6 + nd * c.c7) * tau_y * mu_bar +
                (-nd * c.c2 * c.c6 + c.c7 * (tau0 - nd * c.c2)) * mu0;
  const double shift = (nd * c.c6 - nd * c.c5) * tau_y * mu_bar +
                       (-c.c2 * s2y + nd * c.c2 * c.c5 + c.c6 * (tau0 - nd * c.c2)) * mu0;
  out.mean.tail(n) = spec.mu_y + Vector::Constant(n, shift);
  return out;
}

Matrix stochastic_map_design(int n) {
  Matrix a(n, n + 1);
  a.col(0).setOnes();
  a.rightCols(n).setIdentity();
  return a;
}

GaussianParams cov_linear_gaussian(const Matrix& a_aug, const GaussianParams& y_dist) {
  require(a_aug.rows() == a_aug.cols(), ErrorCode::kDimension,
          "augmented matrix must be square");
  require(a_aug.rows() == y_dist.dim(), ErrorCode::kDimension,
          "augmented matrix does not match the observable dimension");
  y_dist.validate();
  Eigen::FullPivLU<Matrix> lu(a_aug);
  require(lu.isInvertible() && lu.rcond() > 1e-14, ErrorCode::kRankDeficient,
          "augmented matrix is singular");
  const Matrix inv = lu.inverse();
  GaussianParams out;
  out.mean = inv * y_dist.mean;
  out.cov = symmetric_part(inv * y_dist.cov * inv.transpose());
  return out;
}

GaussianParams flat_prior_regression_posterior(const Matrix& x, const Vector& y_obs,
                                               double sigma2) {
  require(x.rows() == y_obs.size(), ErrorCode::kDimension,
          "design rows do not match observation count");
  require(sigma2 > 0.0, ErrorCode::kDomain, "noise variance must be positive");
  Eigen::ColPivHouseholderQR<Matrix> qr(x);
  qr.setThreshold(1e-10);
  require(qr.rank() == x.cols(), ErrorCode::kRankDeficient,
          "design matrix does not have full column rank");
  const Matrix gram_inv = spd_inverse(x.transpose() * x, "X^T X");
  GaussianParams out;
  out.mean = gram_inv * (x.transpose() * y_obs);
  out.cov = sigma2 * gram_inv;
  return out;
}

GaussianParams regression_predictive(const GaussianParams& posterior, double x_star) {
  require(posterior.dim() == 2, ErrorCode::kDimension,
          "predictive needs a two-parameter posterior");
  Vector row(2);
  row << 1.0, x_star;
  GaussianParams out;
  out.mean = Vector::Constant(1, row.dot(posterior.mean));
  out.cov = Matrix::Constant(1, 1, row.dot(posterior.cov * row));
  return out;
}

}  // namespace siplab
