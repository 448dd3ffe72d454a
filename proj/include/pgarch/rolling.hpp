#pragma once

#include <string>
#include <vector>

#include "pgarch/backtest.hpp"
#include "pgarch/fgarch.hpp"
#include "pgarch/forecast.hpp"
#include "pgarch/types.hpp"

namespace pgarch {

/// A portfolio over a subset of panel columns.
struct PortfolioSpec {
  std::string id;
  std::vector<Index> assets;
  Vector weights;  // same length as assets

  Vector full_weights(Index p) const;
};

struct RollingConfig {
  Index window = 252;
  Index refit_every = 10;
  std::vector<QuantileRule> rules;  // empty: normal at 1%
  PgarchOptions pgarch;
  FitConfig bench_fit;
  int dq_lags = 4;
  int threads = 0;

  void validate() const;
};

/// Rows whose returns are forecast, given T periods: window + 1 .. T - 1.
/// The forecast for row i uses rows [i - window, i - 1] only.
std::vector<Index> forecast_rows(Index periods, Index window);

struct VarPath {
  std::string model;
  std::size_t portfolio = 0;
  QuantileRule rule;
  Vector var;       // NaN where the model failed
  Vector realized;  // portfolio return on the target row
};

struct RollingResult {
  std::vector<Index> targets;
  std::vector<bool> refit;  // per forecast: theta re-estimated that day
  std::vector<VarPath> paths;
};

/// Daily one-step VaR for each model, portfolio and rule. Parameters are
/// re-estimated when the forecast counter is a multiple of refit_every; in
/// between the window, factors, loadings and filter state still roll daily.
RollingResult rolling_var(const Matrix& returns, const std::vector<PortfolioSpec>& portfolios,
                          const std::vector<std::string>& models, const RollingConfig& config);

struct BacktestRow {
  std::string model;
  std::string quantile_rule;
  double alpha = 0.0;
  Index portfolio_size = 0;
  double hit_rate = 0.0;
  double lr_uc_p = 0.0;
  double lr_cc_p = 0.0;
  double dq_hit_p = 0.0;
  double dq_var_p = 0.0;
  int n_portfolios = 0;
  Index n_forecasts = 0;
  int failures = 0;  // forecasts skipped because the model failed
};

/// Per-path tests (finite forecasts only).
BacktestRow backtest_path(const VarPath& path, Index portfolio_size, int dq_lags);

/// Averages hit rates and raw p-values over portfolios, grouped by model,
/// rule, alpha and portfolio size.
std::vector<BacktestRow> summarize_backtests(const RollingResult& result,
                                             const std::vector<PortfolioSpec>& portfolios,
                                             int dq_lags);

std::string backtest_csv(const std::vector<BacktestRow>& rows, bool with_counts = false);

}  // namespace pgarch
