#include "pgarch/rolling.hpp"

#include <cmath>
#include <limits>
#include <iomanip>
#include <map>
#include <optional>
#include <sstream>
#include <tuple>

#include "pgarch/bench.hpp"
#include "pgarch/parallel.hpp"

namespace pgarch {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool any_empirical(const std::vector<QuantileRule>& rules) {
  for (const auto& r : rules) {
    if (r.kind == QuantileKind::empirical) return true;
  }
  return false;
}

// Writes one day's VaR for every rule of a (model, portfolio) pair.
void fill_day(std::vector<VarPath>& paths, std::size_t base, const std::vector<QuantileRule>& rules,
              Index k, double mean_port, double var_port, const Vector& std_hist) {
  const std::span<const double> hist(std_hist.data(), static_cast<std::size_t>(std_hist.size()));
  for (std::size_t q = 0; q < rules.size(); ++q) {
    double v = kNaN;
    try {
      v = var_from_moments(mean_port, var_port, rules[q], hist).var_value;
    } catch (const std::exception&) {
    }
    paths[base + q].var(k) = v;
  }
}

Vector centered_std(const Vector& port, const Vector& var_path) {
  return standardized_returns(port.array() - port.mean(), var_path);
}

}  // namespace

Vector PortfolioSpec::full_weights(Index p) const {
  if (static_cast<Index>(assets.size()) != weights.size()) {
    throw std::invalid_argument("portfolio '" + id + "': assets and weights differ in length");
  }
  Vector w = Vector::Zero(p);
  for (std::size_t i = 0; i < assets.size(); ++i) {
    if (assets[i] < 0 || assets[i] >= p) throw DataError("portfolio '" + id + "' references an unknown asset");
    w(assets[i]) += weights(static_cast<Index>(i));
  }
  return w;
}

void RollingConfig::validate() const {
  if (window < 30) throw std::invalid_argument("window must be at least 30");
  if (refit_every < 1) throw std::invalid_argument("refit_every must be at least 1");
  for (const auto& r : rules) r.validate();
  if (dq_lags < 0) throw std::invalid_argument("dq_lags must be nonnegative");
}

std::vector<Index> forecast_rows(Index periods, Index window) {
  if (periods < window + 2) {
    throw DataError("panel of " + std::to_string(periods) + " rows is too short for window " +
                    std::to_string(window));
  }
  std::vector<Index> rows;
  rows.reserve(static_cast<std::size_t>(periods - window - 1));
  for (Index i = window + 1; i < periods; ++i) rows.push_back(i);
  return rows;
}

RollingResult rolling_var(const Matrix& returns, const std::vector<PortfolioSpec>& portfolios,
                          const std::vector<std::string>& models, const RollingConfig& config_in) {
  RollingConfig config = config_in;
  if (config.rules.empty()) config.rules.push_back(QuantileRule{});
  config.validate();
  if (portfolios.empty()) throw std::invalid_argument("rolling_var: no portfolios");
  for (const auto& m : models) {
    if (m != "pgarch") parse_bench_kind(m);
  }
  const Index p = returns.cols();
  const Index W = config.window;
  const bool need_hist = any_empirical(config.rules);

  RollingResult result;
  result.targets = forecast_rows(returns.rows(), W);
  const Index N = static_cast<Index>(result.targets.size());
  result.refit.resize(static_cast<std::size_t>(N));
  for (Index k = 0; k < N; ++k) result.refit[static_cast<std::size_t>(k)] = k % config.refit_every == 0;

  const std::size_t np = portfolios.size();
  const std::size_t nq = config.rules.size();
  std::vector<Vector> full_w(np);
  std::vector<Vector> port_series(np);
  for (std::size_t j = 0; j < np; ++j) {
    full_w[j] = portfolios[j].full_weights(p);
    port_series[j] = returns * full_w[j];
  }
  result.paths.resize(models.size() * np * nq);
  for (std::size_t m = 0; m < models.size(); ++m) {
    for (std::size_t j = 0; j < np; ++j) {
      for (std::size_t q = 0; q < nq; ++q) {
        VarPath& path = result.paths[(m * np + j) * nq + q];
        path.model = models[m];
        path.portfolio = j;
        path.rule = config.rules[q];
        path.var = Vector::Constant(N, kNaN);
        path.realized.resize(N);
        for (Index k = 0; k < N; ++k) path.realized(k) = port_series[j](result.targets[static_cast<std::size_t>(k)]);
      }
    }
  }

  for (std::size_t m = 0; m < models.size(); ++m) {
    const std::string& model = models[m];
    auto base = [&](std::size_t j) { return (m * np + j) * nq; };

    if (model == "pgarch" || model == "static_poet") {
      std::optional<GarchParams> theta;
      for (Index k = 0; k < N; ++k) {
        const Index first = result.targets[static_cast<std::size_t>(k)] - W;
        const Matrix window = returns.middleRows(first, W);
        try {
          if (model == "pgarch") {
            std::optional<PgarchFit> fit;
            if (result.refit[static_cast<std::size_t>(k)] || !theta) {
              try {
                fit = fit_pgarch(window, config.pgarch);
                theta = fit->theta;
              } catch (const std::exception&) {
                if (!theta) throw;
              }
            }
            if (!fit) fit = fit_pgarch(window, config.pgarch, &*theta);
            for (std::size_t j = 0; j < np; ++j) {
              const Vector& w = full_w[j];
              Vector hist;
              if (need_hist) hist = centered_std(window * w, fit->portfolio_variance_path(w));
              fill_day(result.paths, base(j), config.rules, k, w.dot(fit->mean),
                       w.dot(fit->forecast.sigma * w), hist);
            }
          } else {
            const BenchModel bm = fit_static_poet(window, config.pgarch.rank, config.pgarch.threshold);
            for (std::size_t j = 0; j < np; ++j) {
              const Vector& w = full_w[j];
              const double v = w.dot(bm.forecast * w);
              Vector hist;
              if (need_hist) hist = centered_std(window * w, Vector::Constant(W, v));
              fill_day(result.paths, base(j), config.rules, k, w.dot(bm.mean), v, hist);
            }
          }
        } catch (const std::exception&) {
          // the day stays NaN for every portfolio
        }
      }
      continue;
    }

    const BenchKind kind = parse_bench_kind(model);
    parallel_for(np, config.threads, [&](std::size_t j) {
      const PortfolioSpec& pf = portfolios[j];
      std::optional<BenchModel> frozen;
      for (Index k = 0; k < N; ++k) {
        const Index first = result.targets[static_cast<std::size_t>(k)] - W;
        const Vector port = port_series[j].segment(first, W);
        const bool refit = result.refit[static_cast<std::size_t>(k)] || !frozen;
        try {
          BenchModel bm;
          Vector w_model = pf.weights;
          switch (kind) {
            case BenchKind::hist_vol:
              bm = fit_hist_vol(port);
              w_model = Vector::Ones(1);
              break;
            case BenchKind::port_garch:
              bm = fit_port_garch(port, config.bench_fit, refit ? nullptr : &*frozen);
              w_model = Vector::Ones(1);
              break;
            case BenchKind::ccc:
            case BenchKind::bekk_diag_vt: {
              const Matrix sub = returns.middleRows(first, W)(Eigen::all, pf.assets);
              const BenchModel* fz = refit ? nullptr : &*frozen;
              bm = kind == BenchKind::ccc ? fit_ccc(sub, config.bench_fit, fz)
                                          : fit_bekk_diag_vt(sub, config.bench_fit, fz);
              break;
            }
            case BenchKind::static_poet:
              break;
          }
          if (refit) frozen = bm;
          Vector hist;
          if (need_hist) hist = centered_std(port, bm.portfolio_variance_path(w_model, W));
          fill_day(result.paths, base(j), config.rules, k, w_model.dot(bm.mean),
                   w_model.dot(bm.forecast * w_model), hist);
        } catch (const std::exception&) {
        }
      }
    });
  }
  return result;
}

BacktestRow backtest_path(const VarPath& path, Index portfolio_size, int dq_lags) {
  BacktestRow row;
  row.model = path.model;
  row.quantile_rule = path.rule.name();
  row.alpha = path.rule.alpha;
  row.portfolio_size = portfolio_size;
  row.n_portfolios = 1;
  std::vector<Index> ok;
  for (Index k = 0; k < path.var.size(); ++k) {
    if (std::isfinite(path.var(k))) ok.push_back(k);
  }
  row.failures = static_cast<int>(path.var.size() - static_cast<Index>(ok.size()));
  row.n_forecasts = static_cast<Index>(ok.size());
  if (static_cast<Index>(ok.size()) <= dq_lags + 2) {
    row.hit_rate = row.lr_uc_p = row.lr_cc_p = row.dq_hit_p = row.dq_var_p = kNaN;
    return row;
  }
  const HitSeries hs = hit_series(path.realized(ok), path.var(ok), path.rule.alpha);
  const BacktestSummary s = run_backtests(hs, dq_lags);
  row.hit_rate = s.hit_rate;
  row.lr_uc_p = s.uc.p_value;
  row.lr_cc_p = s.cc.p_value;
  row.dq_hit_p = s.dq_hit.p_value;
  row.dq_var_p = s.dq_var.p_value;
  return row;
}

std::vector<BacktestRow> summarize_backtests(const RollingResult& result,
                                             const std::vector<PortfolioSpec>& portfolios,
                                             int dq_lags) {
  using Key = std::tuple<std::string, std::string, double, Index>;
  std::map<Key, std::vector<BacktestRow>> groups;
  std::vector<Key> order;
  for (const auto& path : result.paths) {
    const Index size = static_cast<Index>(portfolios.at(path.portfolio).assets.size());
    Key key{path.model, path.rule.name(), path.rule.alpha, size};
    auto [it, inserted] = groups.try_emplace(key);
    if (inserted) order.push_back(key);
    it->second.push_back(backtest_path(path, size, dq_lags));
  }
  std::vector<BacktestRow> rows;
  for (const auto& key : order) {
    const auto& list = groups[key];
    BacktestRow agg = list.front();
    agg.n_portfolios = 0;
    agg.failures = 0;
    agg.n_forecasts = 0;
    double sums[5] = {0, 0, 0, 0, 0};
    for (const auto& r : list) {
      agg.failures += r.failures;
      agg.n_forecasts += r.n_forecasts;
      if (!std::isfinite(r.hit_rate)) continue;
      ++agg.n_portfolios;
      sums[0] += r.hit_rate;
      sums[1] += r.lr_uc_p;
      sums[2] += r.lr_cc_p;
      sums[3] += r.dq_hit_p;
      sums[4] += r.dq_var_p;
    }
    const double n = agg.n_portfolios > 0 ? agg.n_portfolios : kNaN;
    agg.hit_rate = sums[0] / n;
    agg.lr_uc_p = sums[1] / n;
    agg.lr_cc_p = sums[2] / n;
    agg.dq_hit_p = sums[3] / n;
    agg.dq_var_p = sums[4] / n;
    rows.push_back(agg);
  }
  return rows;
}

std::string backtest_csv(const std::vector<BacktestRow>& rows, bool with_counts) {
  std::ostringstream os;
  os << "model,quantile_rule,alpha,portfolio_size,hit_rate,lr_uc_p,lr_cc_p,dq_hit_p,dq_var_p";
  if (with_counts) os << ",n_portfolios,n_forecasts,failures";
  os << '\n' << std::setprecision(10);
  for (const auto& r : rows) {
    os << r.model << ',' << r.quantile_rule << ',' << r.alpha << ',' << r.portfolio_size << ','
       << r.hit_rate << ',' << r.lr_uc_p << ',' << r.lr_cc_p << ',' << r.dq_hit_p << ',' << r.dq_var_p;
    if (with_counts) os << ',' << r.n_portfolios << ',' << r.n_forecasts << ',' << r.failures;
    os << '\n';
  }
  return os.str();
}

}  // namespace pgarch
