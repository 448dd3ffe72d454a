#include <doctest.h>

#include "pgarch/rolling.hpp"
#include "pgarch/simul.hpp"

using namespace pgarch;

namespace {

Matrix panel(Index T, std::uint64_t seed) {
  DgpSpec spec;
  spec.p = 12;
  spec.T = T;
  return generate(spec, seed).panel.returns;
}

std::vector<PortfolioSpec> two_portfolios() {
  return {PortfolioSpec{"a", {0, 3, 5}, Vector::Constant(3, 1.0 / 3)},
          PortfolioSpec{"b", {7}, Vector::Ones(1)}};
}

}  // namespace

TEST_CASE("forecast count is T - window - 1") {
  CHECK(forecast_rows(4523, 252).size() == 4270);
  const auto rows = forecast_rows(100, 60);
  CHECK(rows.front() == 61);
  CHECK(rows.back() == 99);
  CHECK_THROWS_AS(forecast_rows(61, 60), DataError);
}

TEST_CASE("rolling VaR has no look-ahead") {
  const Matrix y = panel(160, 2);
  RollingConfig cfg;
  cfg.window = 100;
  cfg.refit_every = 20;
  cfg.rules = {QuantileRule{QuantileKind::normal, 0.05}, QuantileRule{QuantileKind::empirical, 0.05}};
  const auto pf = two_portfolios();
  const std::vector<std::string> models{"pgarch", "hist_vol", "port_garch"};
  const RollingResult base = rolling_var(y, pf, models, cfg);

  Matrix shocked = y;
  shocked.bottomRows(10).array() += 0.5;
  const RollingResult moved = rolling_var(shocked, pf, models, cfg);
  const Index N = static_cast<Index>(base.targets.size());
  const Index untouched = N - 10;  // forecasts whose windows end before the shock
  for (std::size_t i = 0; i < base.paths.size(); ++i) {
    CHECK(base.paths[i].var.head(untouched) == moved.paths[i].var.head(untouched));
    CHECK(base.paths[i].var.tail(9) != moved.paths[i].var.tail(9));
    CHECK(base.paths[i].var.allFinite());
  }
}

TEST_CASE("refit cadence") {
  const Matrix y = panel(200, 3);
  RollingConfig cfg;
  cfg.window = 120;
  cfg.refit_every = 25;
  const RollingResult r = rolling_var(y, two_portfolios(), {"hist_vol"}, cfg);
  REQUIRE(r.targets.size() == 79);
  for (std::size_t k = 0; k < r.refit.size(); ++k) CHECK(r.refit[k] == (k % 25 == 0));

  cfg.refit_every = static_cast<Index>(r.targets.size());
  const RollingResult once = rolling_var(y, two_portfolios(), {"pgarch"}, cfg);
  CHECK(std::count(once.refit.begin(), once.refit.end(), true) == 1);
  CHECK(once.paths.front().var.allFinite());
}

TEST_CASE("summaries average over portfolios of equal size") {
  const Matrix y = panel(260, 4);
  RollingConfig cfg;
  cfg.window = 150;
  cfg.refit_every = 50;
  cfg.rules = {QuantileRule{QuantileKind::normal, 0.05}};
  std::vector<PortfolioSpec> pf{PortfolioSpec{"x", {0}, Vector::Ones(1)}, PortfolioSpec{"y", {1}, Vector::Ones(1)}};
  const RollingResult r = rolling_var(y, pf, {"hist_vol", "ccc"}, cfg);
  const auto rows = summarize_backtests(r, pf, cfg.dq_lags);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].model == "hist_vol");
  CHECK(rows[0].n_portfolios == 2);
  const BacktestRow a = backtest_path(r.paths[0], 1, 4);
  const BacktestRow b = backtest_path(r.paths[1], 1, 4);
  CHECK(rows[0].hit_rate == doctest::Approx((a.hit_rate + b.hit_rate) / 2));
  CHECK(rows[0].lr_uc_p == doctest::Approx((a.lr_uc_p + b.lr_uc_p) / 2));
  const std::string csv = backtest_csv(rows);
  CHECK(csv.rfind("model,quantile_rule,alpha,portfolio_size,hit_rate,lr_uc_p,lr_cc_p,dq_hit_p,dq_var_p\n", 0) == 0);
}

TEST_CASE("bad configuration is rejected") {
  const Matrix y = panel(100, 5);
  RollingConfig cfg;
  cfg.window = 20;
  CHECK_THROWS(rolling_var(y, two_portfolios(), {"hist_vol"}, cfg));
  cfg.window = 50;
  cfg.refit_every = 0;
  CHECK_THROWS(rolling_var(y, two_portfolios(), {"hist_vol"}, cfg));
  cfg.refit_every = 5;
  std::vector<PortfolioSpec> bad{PortfolioSpec{"z", {40}, Vector::Ones(1)}};
  CHECK_THROWS_AS(rolling_var(y, bad, {"hist_vol"}, cfg), DataError);
  CHECK_THROWS(rolling_var(y, two_portfolios(), {"garch_x"}, cfg));
}
