#pragma once

#include <functional>
#include <string>
#include <vector>

#include "pgarch/types.hpp"

namespace pgarch {

/// Objective for unconstrained minimization. Must fill `grad` when non-null.
/// Returning +inf marks an infeasible point; the line search backs off.
using Objective = std::function<double(const Vector& x, Vector* grad)>;

struct MinimizeOptions {
  int max_iter = 500;
  double grad_tol = 1e-6;     // relative: ||g||_inf <= grad_tol * max(1, |f|)
  double armijo = 1e-4;
  int max_backtracks = 60;
  double max_step = 5.0;      // cap on ||step||_inf in the unconstrained space
};

struct MinimizeResult {
  Vector x;
  double value = 0.0;
  double initial_value = 0.0;
  double grad_norm = 0.0;
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
  std::string reason;
  std::vector<double> trajectory;  // objective after each accepted step
};

/// BFGS on the inverse Hessian with Armijo backtracking. The objective is
/// nonincreasing along the trajectory.
MinimizeResult minimize_bfgs(const Objective& f, Vector x0, const MinimizeOptions& options = {});

/// Central-difference gradient; step is h * max(1, |x_i|).
Vector central_difference(const std::function<double(const Vector&)>& f, const Vector& x,
                          double h = 1e-6);

}  // namespace pgarch
