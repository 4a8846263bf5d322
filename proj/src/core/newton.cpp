#include "newton.hpp"

#include <cmath>
#include <limits>

namespace siplab {

NewtonResult newton_solve(const ForwardMap& map, const Vector& y_target,
                          const Vector& theta_tail, const Vector& theta_start,
                          const NewtonOptions& options) {
  const int p = map.input_dim();
  const int q = map.output_dim();
  require(y_target.size() == q, ErrorCode::kDimension, "target has wrong dimension");
  require(theta_tail.size() == p - q, ErrorCode::kDimension,
          "fixed tail has wrong dimension");
  require(theta_start.size() == q, ErrorCode::kDimension,
          "start point has wrong dimension");

  const double tol = options.tolerance * (1.0 + y_target.lpNorm<Eigen::Infinity>());
  Vector theta(p);
  theta.head(q) = theta_start;
  theta.tail(p - q) = theta_tail;

  NewtonResult result;
  result.head = theta_start;
  if (!map.domain().contains(theta)) {
    result.residual = std::numeric_limits<double>::infinity();
    return result;
  }

  Vector residual = map.eval_unchecked(theta) - y_target;
  double norm = residual.lpNorm<Eigen::Infinity>();
  for (int it = 0;; ++it) {
    result.head = theta.head(q);
    result.residual = norm;
    result.iterations = it;
    if (norm <= tol) {
      result.converged = true;
      return result;
    }
    if (it == options.max_iterations || !std::isfinite(norm)) return result;

    const Matrix block = map.jacobian(theta).leftCols(q);
    Eigen::FullPivLU<Matrix> lu(block);
    if (!lu.isInvertible()) return result;
    const Vector step = lu.solve(residual);

    double lambda = 1.0;
    bool accepted = false;
    for (int h = 0; h <= options.max_halvings; ++h, lambda *= 0.5) {
      Vector trial = theta;
      trial.head(q) -= lambda * step;
      if (!map.domain().contains(trial)) continue;
      Vector trial_residual = map.eval_unchecked(trial) - y_target;
      const double trial_norm = trial_residual.lpNorm<Eigen::Infinity>();
      if (trial_norm < norm) {
        theta = std::move(trial);
        residual = std::move(trial_residual);
        norm = trial_norm;
        accepted = true;
        break;
      }
    }
    if (!accepted) return result;
  }
}

}  // namespace siplab
