#include "pgarch/optim.hpp"

#include <cmath>
#include <limits>

namespace pgarch {

MinimizeResult minimize_bfgs(const Objective& f, Vector x0, const MinimizeOptions& options) {
  const Index n = x0.size();
  MinimizeResult result;
  Vector g(n);
  double fx = f(x0, &g);
  ++result.evaluations;
  if (!std::isfinite(fx) || !g.allFinite()) {
    throw NumericalError("minimize_bfgs: objective is not finite at the starting point");
  }
  result.initial_value = fx;
  Vector x = std::move(x0);

  Matrix h_inv = Matrix::Identity(n, n);
  bool fresh_hessian = true;
  int stalls = 0;

  auto converged_on_gradient = [&](double value, const Vector& grad) {
    return grad.cwiseAbs().maxCoeff() <= options.grad_tol * std::max(1.0, std::abs(value));
  };

  result.reason = "max_iter";
  for (int iter = 0; iter < options.max_iter; ++iter) {
    if (converged_on_gradient(fx, g)) {
      result.converged = true;
      result.reason = "gradient";
      break;
    }
    Vector d = -h_inv * g;
    double slope = g.dot(d);
    if (!(slope < 0.0)) {
      h_inv.setIdentity();
      fresh_hessian = true;
      d = -g;
      slope = g.dot(d);
    }
    double step = 1.0;
    const double dmax = d.cwiseAbs().maxCoeff();
    if (dmax * step > options.max_step) step = options.max_step / dmax;
    if (fresh_hessian && iter == 0) step = std::min(step, 1.0 / std::max(1.0, g.norm()));

    Vector x_new(n), g_new(n);
    double f_new = std::numeric_limits<double>::infinity();
    bool accepted = false;
    for (int bt = 0; bt < options.max_backtracks; ++bt) {
      x_new = x + step * d;
      f_new = f(x_new, &g_new);
      ++result.evaluations;
      if (std::isfinite(f_new) && g_new.allFinite() && f_new <= fx + options.armijo * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      if (!fresh_hessian) {
        h_inv.setIdentity();
        fresh_hessian = true;
        continue;
      }
      result.reason = "line_search";
      break;
    }

    const Vector s = x_new - x;
    const Vector y = g_new - g;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      if (fresh_hessian) {
        h_inv *= sy / y.squaredNorm();
        fresh_hessian = false;
      }
      const double rho = 1.0 / sy;
      const Vector hy = h_inv * y;
      h_inv += (rho * rho * y.dot(hy) + rho) * (s * s.transpose()) -
               rho * (hy * s.transpose() + s * hy.transpose());
    }

    const double decrease = fx - f_new;
    x = std::move(x_new);
    g = std::move(g_new);
    fx = f_new;
    result.trajectory.push_back(fx);
    result.iterations = iter + 1;

    stalls = decrease <= 1e-14 * std::max(1.0, std::abs(fx)) ? stalls + 1 : 0;
    if (stalls >= 3) {
      result.converged = true;
      result.reason = "stalled";
      break;
    }
  }
  if (!result.converged && converged_on_gradient(fx, g)) {
    result.converged = true;
    result.reason = "gradient";
  }
  result.x = std::move(x);
  result.value = fx;
  result.grad_norm = g.cwiseAbs().maxCoeff();
  return result;
}

Vector central_difference(const std::function<double(const Vector&)>& f, const Vector& x,
                          double h) {
  Vector grad(x.size());
  Vector probe = x;
  for (Index i = 0; i < x.size(); ++i) {
    const double step = h * std::max(1.0, std::abs(x(i)));
    probe(i) = x(i) + step;
    const double up = f(probe);
    probe(i) = x(i) - step;
    const double down = f(probe);
    probe(i) = x(i);
    grad(i) = (up - down) / (2.0 * step);
  }
  return grad;
}

}  // namespace pgarch
