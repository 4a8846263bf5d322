#pragma once

#include "common.hpp"
#include "forward_maps.hpp"

namespace siplab {

struct NewtonOptions {
  int max_iterations = 50;
  int max_halvings = 30;
  double tolerance = 1e-10;  // scaled by (1 + |y|_inf)
};

struct NewtonResult {
  Vector head;
  bool converged = false;
  int iterations = 0;
  double residual = 0.0;  // |y - g(head, tail)|_inf
};

// Solves y = g(head, tail) for the leading q coordinates with damped Newton
// (step halving on the residual norm, iterates kept inside the domain).
// Nonconvergence is reported in the result, not thrown.
NewtonResult newton_solve(const ForwardMap& map, const Vector& y_target,
                          const Vector& theta_tail, const Vector& theta_start,
                          const NewtonOptions& options = {});

}  // namespace siplab
