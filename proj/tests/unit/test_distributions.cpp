#include <doctest.h>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "pgarch/distributions.hpp"

using namespace pgarch::dist;

TEST_CASE("normal quantile against scipy values") {
  CHECK(normal_quantile(0.01) == doctest::Approx(-2.3263478740408408).epsilon(1e-13));
  CHECK(normal_quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-13));
  CHECK(normal_quantile(1e-10) == doctest::Approx(-6.361340902404056).epsilon(1e-12));
  CHECK(normal_quantile(0.5) == doctest::Approx(0.0));
  CHECK(std::isinf(normal_quantile(0.0)));
  CHECK_THROWS(normal_quantile(1.5));
}

TEST_CASE("normal quantile against Boost on a grid") {
  boost::math::normal_distribution<double> n;
  for (double p = 1e-6; p < 1.0; p *= 1.7) {
    const double q = p < 0.5 ? p : 1.0 - p;
    CHECK(normal_quantile(q) == doctest::Approx(boost::math::quantile(n, q)).epsilon(1e-12));
  }
}

TEST_CASE("Student t against scipy and Boost") {
  CHECK(student_t_cdf(-2.5, 6) == doctest::Approx(0.02326411614208364).epsilon(1e-12));
  CHECK(student_t_quantile(0.05, 3) == doctest::Approx(-2.3533634348018273).epsilon(1e-12));
  CHECK(student_t_quantile(0.975, 30) == doctest::Approx(2.0422724563012373).epsilon(1e-12));
  CHECK(student_t_quantile(0.01, 6) * std::sqrt(4.0 / 6.0) ==
        doctest::Approx(-2.5659780062766857).epsilon(1e-12));
  for (double nu : {2.5, 4.0, 6.0, 12.0, 50.0}) {
    boost::math::students_t_distribution<double> t(nu);
    for (double p : {1e-4, 0.001, 0.01, 0.02, 0.05, 0.1, 0.3, 0.7, 0.99}) {
      CHECK(student_t_quantile(p, nu) == doctest::Approx(boost::math::quantile(t, p)).epsilon(1e-10));
      CHECK(student_t_cdf(-1.3, nu) == doctest::Approx(boost::math::cdf(t, -1.3)).epsilon(1e-12));
    }
  }
}

TEST_CASE("incomplete gamma, beta and chi-square") {
  CHECK(beta_inc(2.5, 1.5, 0.3) == doctest::Approx(0.08894372317066562).epsilon(1e-12));
  CHECK(chi2_cdf(10.0, 7.0) == doctest::Approx(0.8114265324865501).epsilon(1e-12));
  CHECK(chi2_sf(3.841458820694124, 1.0) == doctest::Approx(0.05).epsilon(1e-12));
  for (double a : {0.5, 1.0, 3.5, 20.0}) {
    for (double x : {0.01, 0.7, 3.0, 25.0, 80.0}) {
      CHECK(gamma_p(a, x) == doctest::Approx(boost::math::gamma_p(a, x)).epsilon(1e-10));
      CHECK(gamma_q(a, x) + gamma_p(a, x) == doctest::Approx(1.0));
    }
  }
  for (double x : {0.05, 0.4, 0.9}) {
    CHECK(beta_inc(0.7, 3.0, x) == doctest::Approx(boost::math::ibeta(0.7, 3.0, x)).epsilon(1e-12));
    const double y = beta_inc(4.0, 0.5, x);
    CHECK(beta_inc_inv(4.0, 0.5, y) == doctest::Approx(x).epsilon(1e-12));
  }
  boost::math::chi_squared_distribution<double> c2(2.0);
  CHECK(chi2_sf(7.3, 2.0) == doctest::Approx(boost::math::cdf(boost::math::complement(c2, 7.3))).epsilon(1e-12));
  CHECK(chi2_sf(0.0, 1.0) == 1.0);
}
