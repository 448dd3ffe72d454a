#include <doctest.h>

#include <Eigen/Eigenvalues>

#include "pgarch/bench.hpp"
#include "pgarch/simul.hpp"
#include "pgarch/spectral.hpp"
#include "support.hpp"

using namespace pgarch;

namespace {

bool is_pd(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(m);
  return es.eigenvalues().minCoeff() > 0.0;
}

}  // namespace

TEST_CASE("GARCH(1,1) QMLE recovers (0.1, 0.1, 0.8)") {
  const GarchParams truth = GarchParams::scalar(0.1, 0.1, 0.8);
  const Matrix fsq = testing::simulate_fsq(truth, 10000, 8);
  // rebuild signed returns from the same draws
  const Matrix z = testing::gaussian(10000, 1, 8);
  const Vector x = fsq.col(0).cwiseSqrt().cwiseProduct(z.col(0).cwiseSign());
  const UnivariateGarch g = fit_garch11(x);
  CHECK_FALSE(g.fallback);
  CHECK(std::abs(g.params.omega - 0.1) < 0.05);
  CHECK(std::abs(g.params.a - 0.1) < 0.05);
  CHECK(std::abs(g.params.b - 0.8) < 0.05);
  CHECK(g.h.size() == 10000);
  CHECK(g.h_next == doctest::Approx(g.params.omega + g.params.a * x(9999) * x(9999) + g.params.b * g.h(9999)));
}

TEST_CASE("CCC on independent data has near-identity correlation") {
  const Matrix x = testing::gaussian(2000, 4, 17, 0.01);
  const BenchModel m = fit_ccc(x);
  CHECK(m.kind == BenchKind::ccc);
  CHECK(m.correlation.diagonal().isOnes());
  const double bound = 3.0 / std::sqrt(2000.0);
  for (Index i = 0; i < 4; ++i)
    for (Index j = 0; j < 4; ++j)
      if (i != j) CHECK(std::abs(m.correlation(i, j)) < bound);
  CHECK(is_pd(m.forecast));
  CHECK(m.variance_path.rows() == 2000);

  const BenchModel frozen = fit_ccc(x.topRows(1500), {}, &m);
  CHECK(frozen.margins[0].a == m.margins[0].a);
  CHECK_THROWS(fit_ccc(x.leftCols(2), {}, &m));
}

TEST_CASE("diagonal BEKK with variance targeting") {
  DgpSpec spec;
  spec.p = 20;
  spec.T = 800;
  const Simulated sim = generate(spec, 5);
  const Matrix sub = sim.panel.returns.leftCols(3);
  const BenchModel m = fit_bekk_diag_vt(sub);
  CHECK(m.bekk_a.size() == 3);
  CHECK(((m.bekk_a.array().square() + m.bekk_b.array().square()) < 1.0).all());
  CHECK(is_pd(m.forecast));
  CHECK(m.covariance_path.size() == 800);

  const Matrix c = sub.rowwise() - sub.colwise().mean();
  const double at_fit = bekk_objective(c, m.bekk_a, m.bekk_b);
  const double at_start = bekk_objective(c, Vector::Constant(3, std::sqrt(0.05)), Vector::Constant(3, std::sqrt(0.9)));
  CHECK(at_fit <= at_start + 1e-8);

  // Sigma_1 is the sample covariance
  CHECK((m.covariance_path.front() - sample_cov(c)).cwiseAbs().maxCoeff() < 1e-14);
  const Vector w = Vector::Constant(3, 1.0 / 3);
  const Vector path = m.portfolio_variance_path(w, 800);
  CHECK(path(10) == doctest::Approx(w.dot(m.covariance_path[10] * w)));
}

TEST_CASE("port-GARCH, Hist-Vol and static POET") {
  DgpSpec spec;
  spec.p = 30;
  spec.T = 500;
  const Simulated sim = generate(spec, 6);
  const Matrix& y = sim.panel.returns;

  const BenchModel hv = fit_hist_vol(y);
  const Matrix c = y.rowwise() - y.colwise().mean();
  CHECK((hv.forecast - sample_cov(c)).cwiseAbs().maxCoeff() < 1e-15);
  CHECK((hist_vol(y) - hv.forecast).cwiseAbs().maxCoeff() == 0.0);

  const Vector port = y * Vector::Constant(30, 1.0 / 30);
  const BenchModel pg = fit_port_garch(port);
  CHECK(pg.forecast.rows() == 1);
  CHECK(pg.forecast(0, 0) > 0.0);
  CHECK(pg.portfolio_variance_path(Vector::Ones(1), 500).size() == 500);

  const BenchModel sp = fit_static_poet(y, 3, ThresholdSpec{});
  CHECK(is_pd(sp.forecast));
  CHECK(sp.forecast == sp.forecast.transpose());

  CHECK(parse_bench_kind("bekk") == BenchKind::bekk_diag_vt);
  CHECK(to_string(BenchKind::port_garch) == "port_garch");
  CHECK_THROWS(parse_bench_kind("dcc"));
}
