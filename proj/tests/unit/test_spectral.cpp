#include <doctest.h>

#include "pgarch/simul.hpp"
#include "pgarch/spectral.hpp"
#include "support.hpp"

using namespace pgarch;

namespace {

const Matrix kS{{4, 1, 0.5, 0.2}, {1, 3, 0.4, 0.1}, {0.5, 0.4, 2, 0.3}, {0.2, 0.1, 0.3, 1}};

}  // namespace

TEST_CASE("sample_cov uses divisor T") {
  Matrix x{{1, 2}, {-1, 0}, {0, -2}};
  const Matrix s = sample_cov(x);
  CHECK(s(0, 0) == doctest::Approx(2.0 / 3.0));
  CHECK(s(0, 1) == doctest::Approx(2.0 / 3.0));
  CHECK(s(1, 1) == doctest::Approx(8.0 / 3.0));
  CHECK(s == s.transpose());
  CHECK_THROWS(sample_cov(Matrix(1, 2)));

  const Eigen::MatrixXf xf = x.cast<float>();
  CHECK(sample_cov(xf)(1, 1) == doctest::Approx(8.0 / 3.0));
}

TEST_CASE("eigh sorts descending with nonnegative column sums") {
  const EigenSystem e = eigh(kS);
  // numpy.linalg.eigh on the same matrix
  CHECK(e.values(0) == doctest::Approx(4.7857621211262265).epsilon(1e-12));
  CHECK(e.values(1) == doctest::Approx(2.392506247316279).epsilon(1e-12));
  CHECK(e.values(3) == doctest::Approx(0.9152298221907521).epsilon(1e-12));
  for (Index j = 0; j < 4; ++j) CHECK(e.vectors.col(j).sum() >= 0.0);
  const Matrix rebuilt = e.vectors * e.values.asDiagonal() * e.vectors.transpose();
  CHECK((rebuilt - kS).cwiseAbs().maxCoeff() < 1e-12);

  Matrix asym = kS;
  asym(0, 1) += 1e-3;
  CHECK_THROWS_AS(eigh(asym), std::invalid_argument);
}

TEST_CASE("poet_decompose matches the numpy split") {
  const FactorDecomposition d = poet_decompose(kS, 1);
  CHECK(d.rank == 1);
  CHECK(d.loadings(0, 0) == doctest::Approx(1.6437051396939344).epsilon(1e-12));
  CHECK(d.loadings(3, 0) == doctest::Approx(0.1504931137189064).epsilon(1e-12));
  CHECK(d.residual_cov(0, 0) == doctest::Approx(0.7674969528425732).epsilon(1e-12));
  CHECK(d.residual_cov(0, 1) == doctest::Approx(-1.029083890062155).epsilon(1e-12));
  CHECK((d.loadings.transpose() * d.loadings)(0, 0) == doctest::Approx(4.0));
  CHECK(d.mean_factor_vol()(0) == doctest::Approx(4.7857621211262265 / 4));

  CHECK_THROWS(poet_decompose(kS, 0));
  CHECK_THROWS(poet_decompose(kS, 4));
}

TEST_CASE("decomposition reconstructs the input and loadings are orthogonal") {
  const Matrix x = testing::gaussian(300, 30, 11);
  const Matrix s = sample_cov(x);
  for (int r : {1, 3, 7}) {
    const FactorDecomposition d = poet_decompose(s, r);
    const Matrix low = d.loadings * (d.eigvals / 30.0).asDiagonal() * d.loadings.transpose();
    CHECK((low + d.residual_cov - s).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((d.loadings.transpose() * d.loadings - 30.0 * Matrix::Identity(r, r)).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("extract_factors projects onto loadings over p") {
  const Matrix x = testing::gaussian(50, 6, 5);
  const Matrix c = x.rowwise() - x.colwise().mean();
  FactorDecomposition d = poet_decompose(sample_cov(c), 2);
  const Matrix f = extract_factors(d, c);
  CHECK(f.rows() == 50);
  CHECK(f.cols() == 2);
  CHECK(f(7, 1) == doctest::Approx(d.loadings.col(1).dot(c.row(7).transpose()) / 6.0));
  // factor sample variances equal lambda_i / p^2 * p = lambda_i / p
  const Matrix fs = sample_cov(f);
  CHECK(fs(0, 0) == doctest::Approx(d.eigvals(0) / 6.0));
  CHECK(std::abs(fs(0, 1)) < 1e-12);
}

TEST_CASE("estimate_rank finds three spikes in the simulation design") {
  DgpSpec spec;
  spec.p = 100;
  spec.T = 2000;
  const Simulated sim = generate(spec, 42);
  const Matrix c = sim.panel.returns.rowwise() - sim.panel.returns.colwise().mean();
  RankCriterion crit;
  crit.c1 = 0.01;
  CHECK(estimate_rank(sample_cov(c), 2000, crit) == 3);

  Matrix diag = Matrix::Zero(5, 5);
  CHECK_THROWS_AS(estimate_rank(diag, 100, RankCriterion{4, 1.0, 0.5}), NumericalError);
}
