#pragma once

#include "common.hpp"
#include "densities.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace siplab {

struct JacobianReport {
  Matrix jacobian;   // q x p
  int row_rank = 0;  // numerical, smallest/largest singular value > 1e-8
  bool full_row_rank = false;
  bool analytic = false;
};

// Deterministic map g: R^p -> R^q with p >= q. Evaluation is pure, so a map
// may be shared between threads.
class ForwardMap {
 public:
  using EvalFn = std::function<Vector(const Vector&)>;
  using JacobianFn = std::function<Matrix(const Vector&)>;

  // An empty jacobian means central finite differences.
  ForwardMap(std::string name, int input_dim, int output_dim, EvalFn eval,
             JacobianFn jacobian, Support domain);

  const std::string& name() const { return name_; }
  int input_dim() const { return input_dim_; }
  int output_dim() const { return output_dim_; }
  const Support& domain() const { return domain_; }
  bool has_analytic_jacobian() const { return static_cast<bool>(jacobian_); }

  // Throws kDomain outside the domain.
  Vector eval(const Vector& theta) const;
  // Domain-free evaluation used inside solvers and difference stencils.
  Vector eval_unchecked(const Vector& theta) const { return eval_(theta); }

  Matrix jacobian(const Vector& theta) const;
  Matrix finite_difference_jacobian(const Vector& theta) const;
  JacobianReport jacobian_at(const Vector& theta) const;

  // Same map with the analytic Jacobian removed.
  ForwardMap with_finite_differences() const;

 private:
  void check_input(const Vector& theta) const;

  std::string name_;
  int input_dim_;
  int output_dim_;
  EvalFn eval_;
  JacobianFn jacobian_;
  Support domain_;
};

int numerical_row_rank(const Matrix& m);

// Built-in maps.
ForwardMap linear_map(const Matrix& a, std::string name = "linear");
// g(theta) = (theta1^2 + theta2^2) / 2 on 0 < theta1, theta2 <= 1.
ForwardMap half_squared_radius_map();
// g(theta) = theta^2 on (lo, hi).
ForwardMap square_map(double lo, double hi);
// g(theta) = theta1 + theta2.
ForwardMap sum_map();
ForwardMap identity_map(int dim);

// g(theta) = (g_base(theta), theta_{q+1}, ..., theta_p).
class AugmentedMap {
 public:
  const ForwardMap& base() const { return base_; }
  const ForwardMap& map() const { return augmented_; }
  int aux_count() const { return base_.input_dim() - base_.output_dim(); }

  Vector eval(const Vector& theta) const { return augmented_.eval(theta); }
  Matrix jacobian(const Vector& theta) const { return augmented_.jacobian(theta); }
  double determinant(const Vector& theta) const;

 private:
  friend AugmentedMap augment_identity(const ForwardMap&, const std::vector<Vector>&);
  AugmentedMap(ForwardMap base, ForwardMap augmented)
      : base_(std::move(base)), augmented_(std::move(augmented)) {}

  ForwardMap base_;
  ForwardMap augmented_;
};

// Probe points default to a deterministic set drawn from the domain box.
// Throws kRankDeficient when the left q x q Jacobian block is singular at a
// probe, naming the column order that would restore invertibility.
AugmentedMap augment_identity(const ForwardMap& map,
                              const std::vector<Vector>& probes = {});

// Deterministic probe points inside the domain (uniform on finite
// coordinates, standard normal on infinite ones).
std::vector<Vector> domain_probes(const Support& domain, int count,
                                  std::uint64_t seed);

// Orthonormal basis of the null space of row(A), as (p-q) x p rows.
Matrix null_space_rows(const Matrix& a);

}  // namespace siplab
