#pragma once

#include <string>
#include <vector>

#include "pgarch/types.hpp"

namespace pgarch {

/// Exceedance indicators: hit_t = 1 iff return_t < -VaR_t.
struct HitSeries {
  Vector hits;
  double alpha = 0.01;
  Vector var_series;
  Vector returns;

  Index size() const { return hits.size(); }
  double hit_rate() const;
  double count() const { return hits.sum(); }
};

HitSeries hit_series(const Vector& returns, const Vector& var_forecasts, double alpha);

struct TestResult {
  double stat = 0.0;
  double p_value = 1.0;
  int dof = 0;
  std::vector<std::string> flags;  // e.g. dropped collinear regressors
};

/// Kupiec unconditional coverage; chi2(1). Zero counts use 0 log 0 = 0.
TestResult lr_uc(const Vector& hits, double alpha);

/// First-order Markov independence component of Christoffersen's test.
TestResult lr_ind(const Vector& hits);

/// Christoffersen conditional coverage: lr_uc + lr_ind, chi2(2).
TestResult lr_cc(const Vector& hits, double alpha);

enum class DqVariant { dq_hit, dq_var };

/// Dynamic quantile test. Regresses hit_t - alpha on a constant and
/// hit_{t-1..t-L} (plus VaR_t for dq_var); stat = b'X'Xb / (alpha(1-alpha)).
/// Collinear regressors are dropped greedily and reported in `flags`.
TestResult dq_test(const Vector& hits, const Vector& var_series, double alpha, int lags = 4,
                   DqVariant variant = DqVariant::dq_hit);

struct BacktestSummary {
  double hit_rate = 0.0;
  TestResult uc;
  TestResult cc;
  TestResult dq_hit;
  TestResult dq_var;
};

BacktestSummary run_backtests(const HitSeries& hs, int dq_lags = 4);

}  // namespace pgarch
