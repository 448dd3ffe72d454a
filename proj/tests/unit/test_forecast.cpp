#include <doctest.h>

#include <Eigen/Eigenvalues>

#include "pgarch/forecast.hpp"
#include "pgarch/simul.hpp"
#include "support.hpp"

using namespace pgarch;

TEST_CASE("quantile constants") {
  CHECK(quantile_value({QuantileKind::normal, 0.01}) == doctest::Approx(-2.3263478740408408).epsilon(1e-12));
  CHECK(quantile_value({QuantileKind::student_t, 0.01, 6.0}) ==
        doctest::Approx(-2.5659780062766857).epsilon(1e-12));
  CHECK_THROWS(quantile_value({QuantileKind::student_t, 0.01, 2.0}));
  CHECK_THROWS(quantile_value({QuantileKind::normal, 1.0}));
  CHECK(parse_quantile_kind("t") == QuantileKind::student_t);
  CHECK_THROWS(parse_quantile_kind("cauchy"));
}

TEST_CASE("empirical quantile picks the ceil(alpha n)-th smallest value") {
  std::vector<double> hist(200);
  for (std::size_t i = 0; i < hist.size(); ++i) hist[i] = static_cast<double>((i * 37) % 200);
  // values are a permutation of 0..199; ceil(0.05 * 200) = 10th smallest is 9
  CHECK(quantile_value({QuantileKind::empirical, 0.05}, hist) == 9.0);
  CHECK(quantile_value({QuantileKind::empirical, 0.013}, hist) == 2.0);  // ceil(2.6) = 3rd
  std::vector<double> short_hist(50, 0.0);
  CHECK_THROWS(quantile_value({QuantileKind::empirical, 0.01}, short_hist));
}

TEST_CASE("VaR from moments matches a direct computation") {
  const Matrix sigma{{0.04, 0.01}, {0.01, 0.09}};
  VolForecast vol;
  vol.sigma = sigma;
  const Portfolio w = Portfolio::equal_weight(2);
  const Vector mean{{0.001, 0.002}};
  CHECK(var_forecast(vol, w, mean, {QuantileKind::normal, 0.01}).var_value ==
        doctest::Approx(0.44899532868226033).epsilon(1e-12));
  CHECK(var_forecast(vol, w, mean, {QuantileKind::student_t, 0.01, 6}).var_value ==
        doctest::Approx(0.49539950425220575).epsilon(1e-12));
  CHECK_THROWS_AS(var_from_moments(0.0, 0.0, QuantileRule{}), NumericalError);
  CHECK_THROWS(var_forecast(vol, Portfolio::equal_weight(3), mean, QuantileRule{}));
}

TEST_CASE("P-GARCH forecast assembles factor and idiosyncratic parts") {
  DgpSpec spec;
  spec.p = 40;
  spec.T = 600;
  const Simulated sim = generate(spec, 3);
  const PgarchFit fit = fit_pgarch(sim.panel.returns, PgarchOptions{});
  const VolForecast& f = fit.forecast;
  CHECK((f.sigma - f.factor_part - f.idio_part).cwiseAbs().maxCoeff() < 1e-15);
  CHECK(f.sigma == f.sigma.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(f.sigma);
  CHECK(es.eigenvalues().minCoeff() > 0.0);
  CHECK(f.h_next.size() == 3);
  CHECK((f.h_next.array() > 0.0).all());

  // the free function gives the same answer from the pieces
  const VolForecast again = pgarch_forecast(fit.decomp, fit.theta, fit.fsq, ThresholdSpec{}, spec.T);
  CHECK((again.sigma - f.sigma).cwiseAbs().maxCoeff() < 1e-14);

  // portfolio variance path ends at the in-window value and is positive
  const Vector w = Vector::Constant(40, 1.0 / 40);
  const Vector path = fit.portfolio_variance_path(w);
  CHECK(path.size() == spec.T);
  CHECK((path.array() > 0.0).all());
  const Vector z = standardized_returns((sim.panel.returns * w).array() - w.dot(fit.mean), path);
  CHECK(z.size() == spec.T);

  // frozen theta reuse
  const PgarchFit frozen = fit_pgarch(sim.panel.returns, PgarchOptions{}, &fit.theta);
  CHECK((frozen.forecast.sigma - f.sigma).cwiseAbs().maxCoeff() < 1e-14);
  CHECK_THROWS(pgarch_forecast(fit.decomp, GarchParams::scalar(0.1, 0.1, 0.1), fit.fsq, ThresholdSpec{}, spec.T));
}
