#include <doctest.h>

#include <cmath>

#include "pgarch/optim.hpp"

using namespace pgarch;

TEST_CASE("BFGS minimizes the Rosenbrock function") {
  Objective rosen = [](const Vector& x, Vector* g) {
    const double a = 1.0 - x(0);
    const double b = x(1) - x(0) * x(0);
    if (g) {
      g->resize(2);
      (*g)(0) = -2.0 * a - 400.0 * x(0) * b;
      (*g)(1) = 200.0 * b;
    }
    return a * a + 100.0 * b * b;
  };
  MinimizeOptions opt;
  opt.max_iter = 1000;
  opt.grad_tol = 1e-10;
  const MinimizeResult res = minimize_bfgs(rosen, Vector{{-1.2, 1.0}}, opt);
  CHECK(res.x(0) == doctest::Approx(1.0).epsilon(1e-5));
  CHECK(res.x(1) == doctest::Approx(1.0).epsilon(1e-5));
  CHECK(res.value < 1e-10);
  for (std::size_t i = 1; i < res.trajectory.size(); ++i) CHECK(res.trajectory[i] <= res.trajectory[i - 1]);
}

TEST_CASE("infinite values act as a barrier") {
  // minimum of (x - 2)^2 lies outside the feasible region x < 1
  Objective f = [](const Vector& x, Vector* g) {
    if (x(0) >= 1.0) return std::numeric_limits<double>::infinity();
    if (g) *g = Vector::Constant(1, 2.0 * (x(0) - 2.0));
    return (x(0) - 2.0) * (x(0) - 2.0);
  };
  const MinimizeResult res = minimize_bfgs(f, Vector::Constant(1, 0.0));
  CHECK(res.x(0) < 1.0);
  CHECK(res.x(0) > 0.9);
}

TEST_CASE("central differences are exact on quadratics") {
  auto q = [](const Vector& x) { return 3.0 * x(0) * x(0) + x(0) * x(1) - 2.0 * x(1); };
  const Vector g = central_difference(q, Vector{{1.5, -2.0}});
  CHECK(g(0) == doctest::Approx(3.0 * 2 * 1.5 - 2.0).epsilon(1e-8));
  CHECK(g(1) == doctest::Approx(1.5 - 2.0).epsilon(1e-8));
}
