#include "pgarch/backtest.hpp"

#include <cmath>

#include <Eigen/QR>

#include "pgarch/distributions.hpp"

namespace pgarch {

namespace {

// n log(p), with the convention 0 log 0 = 0.
double xlogy(double n, double p) { return n == 0.0 ? 0.0 : n * std::log(p); }

double clamp_p(double p) { return std::min(1.0, std::max(0.0, p)); }

}  // namespace

double HitSeries::hit_rate() const { return hits.size() == 0 ? 0.0 : hits.mean(); }

HitSeries hit_series(const Vector& returns, const Vector& var_forecasts, double alpha) {
  if (returns.size() != var_forecasts.size()) {
    throw std::invalid_argument("hit_series: returns and VaR series differ in length");
  }
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("hit_series: alpha must lie in (0, 1)");
  HitSeries out;
  out.alpha = alpha;
  out.returns = returns;
  out.var_series = var_forecasts;
  out.hits = (returns.array() < -var_forecasts.array()).cast<double>();
  return out;
}

TestResult lr_uc(const Vector& hits, double alpha) {
  if (hits.size() < 1) throw std::invalid_argument("lr_uc: empty hit series");
  const double n = static_cast<double>(hits.size());
  const double x = hits.sum();
  const double pi = x / n;
  const double null_ll = xlogy(n - x, 1.0 - alpha) + xlogy(x, alpha);
  const double alt_ll = xlogy(n - x, 1.0 - pi) + xlogy(x, pi);
  TestResult out;
  out.dof = 1;
  out.stat = std::max(0.0, -2.0 * (null_ll - alt_ll));
  out.p_value = clamp_p(dist::chi2_sf(out.stat, 1.0));
  return out;
}

TestResult lr_ind(const Vector& hits) {
  if (hits.size() < 2) throw std::invalid_argument("lr_ind: need at least 2 observations");
  double n00 = 0, n01 = 0, n10 = 0, n11 = 0;
  for (Index t = 1; t < hits.size(); ++t) {
    const bool prev = hits(t - 1) > 0.5;
    const bool cur = hits(t) > 0.5;
    if (!prev) (cur ? n01 : n00) += 1.0;
    else (cur ? n11 : n10) += 1.0;
  }
  const double row0 = n00 + n01;
  const double row1 = n10 + n11;
  const double pi01 = row0 > 0 ? n01 / row0 : 0.0;
  const double pi11 = row1 > 0 ? n11 / row1 : 0.0;
  const double pi = (n01 + n11) / (row0 + row1);
  const double restricted = xlogy(n00 + n10, 1.0 - pi) + xlogy(n01 + n11, pi);
  const double unrestricted =
      xlogy(n00, 1.0 - pi01) + xlogy(n01, pi01) + xlogy(n10, 1.0 - pi11) + xlogy(n11, pi11);
  TestResult out;
  out.dof = 1;
  out.stat = std::max(0.0, -2.0 * (restricted - unrestricted));
  out.p_value = clamp_p(dist::chi2_sf(out.stat, 1.0));
  return out;
}

TestResult lr_cc(const Vector& hits, double alpha) {
  if (hits.size() < 2) throw std::invalid_argument("lr_cc: need at least 2 observations");
  const TestResult uc = lr_uc(hits, alpha);
  const TestResult ind = lr_ind(hits);
  TestResult out;
  out.dof = 2;
  out.stat = uc.stat + ind.stat;
  out.p_value = clamp_p(dist::chi2_sf(out.stat, 2.0));
  return out;
}

TestResult dq_test(const Vector& hits, const Vector& var_series, double alpha, int lags,
                   DqVariant variant) {
  if (lags < 0) throw std::invalid_argument("dq_test: lags must be non-negative");
  if (hits.size() <= lags + 2) throw std::invalid_argument("dq_test: series too short for lag count");
  if (variant == DqVariant::dq_var && var_series.size() != hits.size()) {
    throw std::invalid_argument("dq_test: VaR series length mismatch");
  }
  const Index n = hits.size() - lags;
  const Index k_full = 1 + lags + (variant == DqVariant::dq_var ? 1 : 0);
  Matrix x(n, k_full);
  std::vector<std::string> names;
  x.col(0).setOnes();
  names.emplace_back("const");
  for (int l = 1; l <= lags; ++l) {
    x.col(l) = hits.segment(lags - l, n);
    names.push_back("hit_lag" + std::to_string(l));
  }
  if (variant == DqVariant::dq_var) {
    x.col(k_full - 1) = var_series.tail(n);
    names.emplace_back("var");
  }
  const Vector y = hits.tail(n).array() - alpha;

  // Greedy forward selection: keep a column only if it raises the rank.
  TestResult out;
  std::vector<Index> keep;
  for (Index j = 0; j < k_full; ++j) {
    Matrix trial(n, static_cast<Index>(keep.size()) + 1);
    for (std::size_t i = 0; i < keep.size(); ++i) trial.col(static_cast<Index>(i)) = x.col(keep[i]);
    trial.col(trial.cols() - 1) = x.col(j);
    Eigen::ColPivHouseholderQR<Matrix> qr(trial);
    qr.setThreshold(1e-10);
    if (qr.rank() == trial.cols()) {
      keep.push_back(j);
    } else {
      out.flags.push_back("dropped:" + names[static_cast<std::size_t>(j)]);
    }
  }
  Matrix xs(n, static_cast<Index>(keep.size()));
  for (std::size_t i = 0; i < keep.size(); ++i) xs.col(static_cast<Index>(i)) = x.col(keep[i]);

  const Vector beta = xs.colPivHouseholderQr().solve(y);
  const Vector fitted = xs * beta;
  out.dof = static_cast<int>(xs.cols());
  out.stat = std::max(0.0, fitted.squaredNorm() / (alpha * (1.0 - alpha)));
  out.p_value = clamp_p(dist::chi2_sf(out.stat, out.dof));
  return out;
}

BacktestSummary run_backtests(const HitSeries& hs, int dq_lags) {
  BacktestSummary out;
  out.hit_rate = hs.hit_rate();
  out.uc = lr_uc(hs.hits, hs.alpha);
  out.cc = lr_cc(hs.hits, hs.alpha);
  out.dq_hit = dq_test(hs.hits, hs.var_series, hs.alpha, dq_lags, DqVariant::dq_hit);
  out.dq_var = dq_test(hs.hits, hs.var_series, hs.alpha, dq_lags, DqVariant::dq_var);
  return out;
}

}  // namespace pgarch
