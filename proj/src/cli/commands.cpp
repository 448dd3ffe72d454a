#include "pgarch/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <numeric>
#include <sstream>

#include <CLI11.hpp>
#include <Eigen/Core>
#include <json.hpp>

#include "pgarch/backtest.hpp"
#include "pgarch/bench.hpp"
#include "pgarch/forecast.hpp"
#include "pgarch/panel.hpp"
#include "pgarch/rolling.hpp"
#include "pgarch/simul.hpp"
#include "pgarch/spectral.hpp"

namespace pgarch::cli {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";

struct Options {
  std::string panel;
  std::string groups;
  std::string weights;
  std::string portfolios;
  std::string out_dir = ".";
  Index window = 252;
  Index refit_every = 10;
  std::vector<double> alphas;
  std::string rank = "3";
  double c_tau = 1.0;
  double s_p = 1.0;
  std::string threshold_mode = "soft";
  std::vector<std::string> models;
  std::vector<std::string> quantiles;
  double nu = 6.0;
  int reps = 50;
  std::uint64_t seed = 1;
  int threads = 0;
  int dq_lags = 4;
  Index p = 20;
  Index T = 500;
  std::vector<Index> portfolio_sizes;
  Index n_portfolios = 500;
  Index burn_in = 0;
  std::vector<std::string> metrics;
  bool write_series = false;
};

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

double parse_number(const std::string& cell, const std::string& where) {
  try {
    std::size_t used = 0;
    const double v = std::stod(cell, &used);
    if (used != cell.size()) throw std::invalid_argument(cell);
    return v;
  } catch (const std::exception&) {
    throw DataError(where + ": cannot parse number '" + cell + "'");
  }
}

std::vector<QuantileRule> make_rules(const Options& o) {
  std::vector<QuantileRule> rules;
  for (const auto& q : o.quantiles) {
    for (double a : o.alphas) {
      QuantileRule r{parse_quantile_kind(q), a, o.nu};
      r.validate();
      rules.push_back(r);
    }
  }
  return rules;
}

ThresholdSpec make_threshold(const Options& o, const std::vector<std::string>& asset_ids) {
  ThresholdSpec spec;
  spec.c_tau = o.c_tau;
  spec.s_p = o.s_p;
  spec.mode = parse_threshold_mode(o.threshold_mode);
  if (!o.groups.empty()) spec.groups = load_groups(o.groups, asset_ids);
  spec.validate();
  return spec;
}

int resolve_rank(const std::string& rank, const Matrix& window) {
  if (rank == "auto") {
    const Matrix centered = demean(window).first;
    RankCriterion crit;
    crit.r_max = static_cast<int>(std::min<Index>(crit.r_max, window.cols() - 1));
    if (crit.r_max < 1) throw std::invalid_argument("--rank auto needs at least 2 assets");
    return estimate_rank(sample_cov(centered), static_cast<int>(window.rows()), crit);
  }
  std::size_t used = 0;
  int r = 0;
  try {
    r = std::stoi(rank, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != rank.size() || r < 1) throw std::invalid_argument("--rank must be a positive integer or 'auto'");
  return r;
}

void check_models(const std::vector<std::string>& models) {
  if (models.empty()) throw std::invalid_argument("--models is empty");
  for (const auto& m : models) {
    if (m != "pgarch") parse_bench_kind(m);
  }
}

fs::path prepare_out(const Options& o) {
  fs::path dir(o.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw DataError("cannot create output directory " + dir.string());
  return dir;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
}

std::string matrix_csv(const Matrix& m, const std::vector<std::string>& header,
                       const std::vector<std::string>* row_labels = nullptr,
                       const std::string& label_name = "") {
  std::ostringstream os;
  os << std::setprecision(17);
  if (row_labels) os << label_name << ',';
  for (std::size_t j = 0; j < header.size(); ++j) os << (j ? "," : "") << header[j];
  os << '\n';
  for (Index i = 0; i < m.rows(); ++i) {
    if (row_labels) os << (*row_labels)[static_cast<std::size_t>(i)] << ',';
    for (Index j = 0; j < m.cols(); ++j) os << (j ? "," : "") << m(i, j);
    os << '\n';
  }
  return os.str();
}

json options_json(const Options& o, const std::string& command) {
  json j;
  j["command"] = command;
  j["panel"] = o.panel;
  j["groups"] = o.groups;
  j["weights"] = o.weights;
  j["portfolios"] = o.portfolios;
  j["out_dir"] = o.out_dir;
  j["window"] = o.window;
  j["refit_every"] = o.refit_every;
  j["alphas"] = o.alphas;
  j["rank"] = o.rank;
  j["c_tau"] = o.c_tau;
  j["s_p"] = o.s_p;
  j["threshold_mode"] = o.threshold_mode;
  j["models"] = o.models;
  j["quantiles"] = o.quantiles;
  j["nu"] = o.nu;
  j["reps"] = o.reps;
  j["seed"] = o.seed;
  j["dq_lags"] = o.dq_lags;
  j["p"] = o.p;
  j["T"] = o.T;
  j["portfolio_size"] = o.portfolio_sizes;
  j["n_portfolios"] = o.n_portfolios;
  j["burn_in"] = o.burn_in;
  j["metrics"] = o.metrics;
  return j;
}

void write_manifest(const fs::path& dir, const Options& o, const std::string& command,
                    const std::vector<std::string>& outputs, json extra = json::object()) {
  json m;
  m["tool"] = "pgarch";
  m["version"] = kVersion;
  m["eigen_version"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                       "." + std::to_string(EIGEN_MINOR_VERSION);
  m["seed"] = o.seed;
  m["config"] = options_json(o, command);
  m["outputs"] = outputs;
  for (auto& [k, v] : extra.items()) m[k] = v;
  write_text(dir / (command + "_manifest.json"), m.dump(2) + "\n");
}

LoadedPanel read_panel(const Options& o) {
  if (o.panel.empty()) throw std::invalid_argument("--panel is required");
  LoadedPanel loaded = load_panel(o.panel);
  for (const auto& id : loaded.dropped) std::cerr << "dropped asset with missing data: " << id << '\n';
  return loaded;
}

std::vector<PortfolioSpec> read_portfolios(const fs::path& path, const ReturnPanel& panel) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open portfolios file " + path.string());
  std::map<std::string, std::size_t> index;
  std::vector<PortfolioSpec> out;
  std::vector<std::vector<double>> weights;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != 3) throw DataError("portfolios line " + std::to_string(line_no) + ": expected 3 columns");
    if (line_no == 1 && cells[0] == "portfolio_id") continue;
    const Index col = panel.find_asset(cells[1]);
    if (col < 0) throw DataError("portfolio '" + cells[0] + "' references unknown asset '" + cells[1] + "'");
    auto [it, inserted] = index.try_emplace(cells[0], out.size());
    if (inserted) {
      out.push_back(PortfolioSpec{cells[0], {}, {}});
      weights.emplace_back();
    }
    out[it->second].assets.push_back(col);
    weights[it->second].push_back(parse_number(cells[2], "portfolios line " + std::to_string(line_no)));
  }
  if (out.empty()) throw DataError("portfolios file has no rows");
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i].weights = Eigen::Map<const Vector>(weights[i].data(), static_cast<Index>(weights[i].size()));
    Portfolio check(out[i].weights);
    (void)check;
  }
  return out;
}

std::vector<PortfolioSpec> random_portfolios(const Options& o, Index p) {
  std::vector<PortfolioSpec> out;
  auto rng = make_rng(o.seed, 7);
  for (Index size : o.portfolio_sizes) {
    if (size < 1 || size > p) throw std::invalid_argument("--portfolio-size must lie in [1, number of assets]");
    for (Index k = 0; k < o.n_portfolios; ++k) {
      std::vector<Index> all(static_cast<std::size_t>(p));
      std::iota(all.begin(), all.end(), Index{0});
      for (Index i = 0; i < size; ++i) {
        std::uniform_int_distribution<Index> pick(i, p - 1);
        std::swap(all[static_cast<std::size_t>(i)], all[static_cast<std::size_t>(pick(rng))]);
      }
      all.resize(static_cast<std::size_t>(size));
      std::sort(all.begin(), all.end());
      out.push_back(PortfolioSpec{"s" + std::to_string(size) + "_" + std::to_string(k + 1), all,
                                  Vector::Constant(size, 1.0 / static_cast<double>(size))});
    }
  }
  return out;
}

Vector read_weights(const fs::path& path, const ReturnPanel& panel) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open weights file " + path.string());
  Vector w = Vector::Zero(panel.assets());
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != 2) throw DataError("weights line " + std::to_string(line_no) + ": expected 'asset_id,weight'");
    if (line_no == 1 && cells[0] == "asset_id") continue;
    const Index col = panel.find_asset(cells[0]);
    if (col < 0) throw DataError("weights reference unknown asset '" + cells[0] + "'");
    w(col) += parse_number(cells[1], "weights line " + std::to_string(line_no));
  }
  return w;
}

// ---------------------------------------------------------------- simulate

MetricTable simulate_once(const Options& o, const std::vector<std::string>& models,
                          const std::vector<MetricKind>& metrics, Index portfolio_size, Index p, Index T) {
  DgpSpec spec;
  spec.p = p;
  spec.T = T;
  spec.burn_in = o.burn_in;
  ReplicationConfig cfg;
  cfg.models = models;
  cfg.metrics = metrics;
  cfg.portfolio_size = portfolio_size;
  cfg.var_rules = make_rules(o);
  cfg.seed = o.seed;
  cfg.threads = o.threads;
  cfg.pgarch.threshold = make_threshold(o, {});
  if (o.rank == "auto") {
    const Simulated pilot = Dgp(spec).draw(stream_seed(o.seed, 0));
    cfg.pgarch.rank = resolve_rank("auto", pilot.panel.returns);
  } else {
    cfg.pgarch.rank = resolve_rank(o.rank, Matrix());
  }
  return run_replications(spec, o.reps, cfg);
}

std::vector<MetricKind> parse_metrics(const std::vector<std::string>& names) {
  std::vector<MetricKind> out;
  for (const auto& n : names) out.push_back(parse_metric_kind(n));
  if (out.empty()) throw std::invalid_argument("--metric is empty");
  return out;
}

void print_table(const MetricTable& table) {
  std::cout << std::left << std::setw(14) << "model" << std::setw(26) << "metric" << std::right
            << std::setw(14) << "mean" << std::setw(14) << "sd" << std::setw(8) << "reps" << '\n';
  for (const auto& r : table.rows) {
    std::cout << std::left << std::setw(14) << r.model << std::setw(26) << r.metric << std::right
              << std::setw(14) << std::setprecision(6) << r.mean << std::setw(14) << r.sd << std::setw(8)
              << r.n_reps << '\n';
  }
}

int cmd_simulate(Options o) {
  if (o.models.empty()) o.models = {"pgarch"};
  if (o.metrics.empty()) o.metrics = {"frobenius", "spectral", "max", "rel_frobenius", "theta_mae"};
  if (o.quantiles.empty()) o.quantiles = {"normal"};
  if (o.alphas.empty()) o.alphas = {0.01};
  if (o.portfolio_sizes.empty()) o.portfolio_sizes = {0};
  if (o.reps < 1) throw std::invalid_argument("--reps must be at least 1");
  check_models(o.models);
  const auto metrics = parse_metrics(o.metrics);
  const fs::path dir = prepare_out(o);

  MetricTable all;
  for (Index s : o.portfolio_sizes) {
    MetricTable t = simulate_once(o, o.models, metrics, s, o.p, o.T);
    all.rows.insert(all.rows.end(), t.rows.begin(), t.rows.end());
  }
  all.write_csv(dir / "simulate_metrics.csv");
  write_manifest(dir, o, "simulate", {"simulate_metrics.csv"});
  print_table(all);
  return ok;
}

int cmd_compare(Options o) {
  if (o.models.empty()) o.models = {"pgarch", "ccc", "bekk_diag_vt", "port_garch", "static_poet", "hist_vol"};
  if (o.metrics.empty()) o.metrics = {"frobenius", "spectral", "max", "rel_frobenius", "var_mae"};
  if (o.quantiles.empty()) o.quantiles = {"normal"};
  if (o.alphas.empty()) o.alphas = {0.01};
  if (o.portfolio_sizes.empty()) o.portfolio_sizes = {5};
  if (o.reps < 1) throw std::invalid_argument("--reps must be at least 1");
  check_models(o.models);
  const auto metrics = parse_metrics(o.metrics);
  const fs::path dir = prepare_out(o);

  std::ostringstream os;
  os << "p,T,portfolio_size,model,metric,mean,sd,n_reps,failures,rank\n" << std::setprecision(10);
  MetricTable printed;
  for (Index s : o.portfolio_sizes) {
    const MetricTable t = simulate_once(o, o.models, metrics, s, o.p, o.T);
    for (const auto& r : t.rows) {
      int rank = 1;
      for (const auto& other : t.rows) {
        if (other.metric == r.metric && other.model != r.model && other.mean < r.mean) ++rank;
      }
      os << r.p << ',' << r.T << ',' << s << ',' << r.model << ',' << r.metric << ',' << r.mean << ','
         << r.sd << ',' << r.n_reps << ',' << r.failures << ',' << rank << '\n';
    }
    printed.rows.insert(printed.rows.end(), t.rows.begin(), t.rows.end());
  }
  write_text(dir / "compare_metrics.csv", os.str());
  write_manifest(dir, o, "compare", {"compare_metrics.csv"});
  print_table(printed);
  return ok;
}

// ---------------------------------------------------------------- fit

Matrix last_window(const ReturnPanel& panel, Index window) {
  if (window == 0) return panel.returns;
  if (window < 30) throw std::invalid_argument("--window must be at least 30 (or 0 for the full panel)");
  if (window > panel.periods()) {
    throw DataError("window " + std::to_string(window) + " exceeds the panel length " +
                    std::to_string(panel.periods()));
  }
  return panel.returns.bottomRows(window);
}

int cmd_fit(Options o) {
  const LoadedPanel loaded = read_panel(o);
  const ReturnPanel& panel = loaded.panel;
  const Matrix window = last_window(panel, o.window);
  PgarchOptions opts;
  opts.rank = resolve_rank(o.rank, window);
  opts.threshold = make_threshold(o, panel.asset_ids);
  const PgarchFit fit = fit_pgarch(window, opts);
  const fs::path dir = prepare_out(o);

  const int r = opts.rank;
  std::ostringstream theta_csv;
  theta_csv << "parameter,value\n" << std::setprecision(17);
  const auto names = theta_metric_names(r);
  const Vector theta = fit.theta.to_vec();
  for (Index i = 0; i < theta.size(); ++i) {
    theta_csv << names[static_cast<std::size_t>(i)].substr(4) << ',' << theta(i) << '\n';
  }
  write_text(dir / "fit_theta.csv", theta_csv.str());

  std::vector<std::string> fheader;
  for (int i = 1; i <= r; ++i) fheader.push_back("f" + std::to_string(i));
  std::vector<std::string> stamps(panel.timestamps.end() - window.rows(), panel.timestamps.end());
  write_text(dir / "fit_factors.csv", matrix_csv(fit.decomp.factors, fheader, &stamps, "date"));
  std::vector<std::string> hheader;
  for (int i = 1; i <= r; ++i) hheader.push_back("h" + std::to_string(i));
  write_text(dir / "fit_volatility.csv", matrix_csv(fit.path.h, hheader, &stamps, "date"));

  json summary;
  summary["rank"] = r;
  summary["periods"] = window.rows();
  summary["assets"] = window.cols();
  summary["eigvals"] = std::vector<double>(fit.decomp.eigvals.data(), fit.decomp.eigvals.data() + r);
  summary["h_next"] = std::vector<double>(fit.forecast.h_next.data(), fit.forecast.h_next.data() + r);
  summary["tau"] = threshold_level(opts.threshold, window.cols(), window.rows());
  summary["objective"] = fit.diagnostics.objective;
  summary["iterations"] = fit.diagnostics.iterations;
  summary["converged"] = fit.diagnostics.converged;
  summary["stop_reason"] = fit.diagnostics.stop_reason;
  summary["small_sample"] = fit.diagnostics.small_sample;
  summary["B_spectral_norm"] = spectral_norm(fit.theta.B);
  summary["dropped_assets"] = loaded.dropped;
  write_text(dir / "fit_summary.json", summary.dump(2) + "\n");
  write_manifest(dir, o, "fit", {"fit_theta.csv", "fit_factors.csv", "fit_volatility.csv", "fit_summary.json"});

  std::cout << "rank " << r << ", objective " << std::setprecision(10) << fit.diagnostics.objective << ", "
            << (fit.diagnostics.converged ? "converged" : "not converged") << " (" << fit.diagnostics.stop_reason
            << ")\n";
  for (Index i = 0; i < theta.size(); ++i) {
    std::cout << "  " << names[static_cast<std::size_t>(i)].substr(4) << " = " << theta(i) << '\n';
  }
  return ok;
}

// ---------------------------------------------------------------- forecast

int cmd_forecast(Options o) {
  if (o.models.empty()) o.models = {"pgarch"};
  if (o.quantiles.empty()) o.quantiles = {"normal", "student_t", "empirical"};
  if (o.alphas.empty()) o.alphas = {0.10, 0.05, 0.02, 0.01};
  check_models(o.models);
  const LoadedPanel loaded = read_panel(o);
  const ReturnPanel& panel = loaded.panel;
  const Matrix window = last_window(panel, o.window);
  const Index W = window.rows();
  const auto rules = make_rules(o);

  const Vector w = o.weights.empty() ? Vector::Constant(panel.assets(), 1.0 / static_cast<double>(panel.assets()))
                                     : read_weights(o.weights, panel);
  const Portfolio portfolio(w);
  std::vector<Index> support;
  for (Index j = 0; j < w.size(); ++j) {
    if (w(j) != 0.0) support.push_back(j);
  }
  const Vector w_support = w(support);
  const Vector port = window * w;
  const fs::path dir = prepare_out(o);
  std::vector<std::string> outputs;

  std::ostringstream var_csv;
  var_csv << "model,quantile_rule,alpha,var,sigma_port,mean_port,c_alpha\n" << std::setprecision(17);
  for (const auto& model : o.models) {
    double mean_port = 0.0;
    double var_port = 0.0;
    Vector var_path;
    if (model == "pgarch") {
      PgarchOptions opts;
      opts.rank = resolve_rank(o.rank, window);
      opts.threshold = make_threshold(o, panel.asset_ids);
      const PgarchFit fit = fit_pgarch(window, opts);
      mean_port = w.dot(fit.mean);
      var_port = w.dot(fit.forecast.sigma * w);
      var_path = fit.portfolio_variance_path(w);
      write_text(dir / "forecast_sigma.csv", matrix_csv(fit.forecast.sigma, panel.asset_ids, &panel.asset_ids, "asset_id"));
      write_text(dir / "forecast_factor_part.csv",
                 matrix_csv(fit.forecast.factor_part, panel.asset_ids, &panel.asset_ids, "asset_id"));
      write_text(dir / "forecast_idio_part.csv",
                 matrix_csv(fit.forecast.idio_part, panel.asset_ids, &panel.asset_ids, "asset_id"));
      outputs.insert(outputs.end(), {"forecast_sigma.csv", "forecast_factor_part.csv", "forecast_idio_part.csv"});
    } else {
      const BenchKind kind = parse_bench_kind(model);
      BenchModel bm;
      Vector wm = w_support;
      const Matrix sub = window(Eigen::all, support);
      switch (kind) {
        case BenchKind::ccc: bm = fit_ccc(sub); break;
        case BenchKind::bekk_diag_vt: bm = fit_bekk_diag_vt(sub); break;
        case BenchKind::hist_vol: bm = fit_hist_vol(sub); break;
        case BenchKind::static_poet: {
          bm = fit_static_poet(window, resolve_rank(o.rank, window), make_threshold(o, panel.asset_ids));
          wm = w;
          break;
        }
        case BenchKind::port_garch:
          bm = fit_port_garch(port);
          wm = Vector::Ones(1);
          break;
      }
      mean_port = wm.dot(bm.mean);
      var_port = wm.dot(bm.forecast * wm);
      var_path = bm.portfolio_variance_path(wm, W);
    }
    const Vector hist = standardized_returns(port.array() - port.mean(), var_path);
    const std::span<const double> h(hist.data(), static_cast<std::size_t>(hist.size()));
    for (const auto& rule : rules) {
      const VarForecast v = var_from_moments(mean_port, var_port, rule, h);
      var_csv << model << ',' << rule.name() << ',' << rule.alpha << ',' << v.var_value << ',' << v.sigma_port << ','
              << v.mean_port << ',' << v.c_alpha << '\n';
      std::cout << model << ' ' << rule.name() << " alpha=" << rule.alpha << " VaR=" << v.var_value << '\n';
    }
  }
  write_text(dir / "forecast_var.csv", var_csv.str());
  outputs.push_back("forecast_var.csv");
  write_manifest(dir, o, "forecast", outputs, json{{"forecast_after", panel.timestamps.back()}});
  return ok;
}

// ---------------------------------------------------------------- backtest

int cmd_backtest(Options o) {
  if (o.models.empty()) o.models = {"pgarch"};
  if (o.quantiles.empty()) o.quantiles = {"normal", "student_t", "empirical"};
  if (o.alphas.empty()) o.alphas = {0.10, 0.05, 0.02, 0.01};
  if (o.portfolio_sizes.empty()) o.portfolio_sizes = {5, 20};
  check_models(o.models);
  const LoadedPanel loaded = read_panel(o);
  const ReturnPanel& panel = loaded.panel;

  RollingConfig cfg;
  cfg.window = o.window;
  cfg.refit_every = o.refit_every;
  cfg.rules = make_rules(o);
  cfg.dq_lags = o.dq_lags;
  cfg.threads = o.threads;
  cfg.validate();
  const auto rows = forecast_rows(panel.periods(), cfg.window);
  cfg.pgarch.rank = resolve_rank(o.rank, panel.returns.middleRows(rows.front() - cfg.window, cfg.window));
  cfg.pgarch.threshold = make_threshold(o, panel.asset_ids);

  const auto portfolios =
      o.portfolios.empty() ? random_portfolios(o, panel.assets()) : read_portfolios(o.portfolios, panel);
  const fs::path dir = prepare_out(o);
  const RollingResult result = rolling_var(panel.returns, portfolios, o.models, cfg);
  const auto summary = summarize_backtests(result, portfolios, cfg.dq_lags);
  write_text(dir / "backtest_report.csv", backtest_csv(summary));

  std::ostringstream detail;
  detail << "portfolio_id,model,quantile_rule,alpha,portfolio_size,hit_rate,lr_uc_p,lr_cc_p,dq_hit_p,dq_var_p,"
            "n_forecasts,failures\n"
         << std::setprecision(10);
  for (const auto& path : result.paths) {
    const auto& pf = portfolios[path.portfolio];
    const BacktestRow r = backtest_path(path, static_cast<Index>(pf.assets.size()), cfg.dq_lags);
    detail << pf.id << ',' << r.model << ',' << r.quantile_rule << ',' << r.alpha << ',' << r.portfolio_size << ','
           << r.hit_rate << ',' << r.lr_uc_p << ',' << r.lr_cc_p << ',' << r.dq_hit_p << ',' << r.dq_var_p << ','
           << r.n_forecasts << ',' << r.failures << '\n';
  }
  write_text(dir / "backtest_detail.csv", detail.str());
  std::vector<std::string> outputs{"backtest_report.csv", "backtest_detail.csv"};

  if (o.write_series) {
    std::ostringstream series;
    series << "portfolio_id,model,quantile_rule,alpha,date,return,var,hit\n" << std::setprecision(17);
    for (const auto& path : result.paths) {
      for (Index k = 0; k < path.var.size(); ++k) {
        const double v = path.var(k);
        series << portfolios[path.portfolio].id << ',' << path.model << ',' << path.rule.name() << ','
               << path.rule.alpha << ',' << panel.timestamps[static_cast<std::size_t>(result.targets[static_cast<std::size_t>(k)])]
               << ',' << path.realized(k) << ',' << v << ',' << (std::isfinite(v) ? (path.realized(k) < -v ? 1 : 0) : -1)
               << '\n';
      }
    }
    write_text(dir / "backtest_series.csv", series.str());
    outputs.push_back("backtest_series.csv");
  }
  const Index refits = std::count(result.refit.begin(), result.refit.end(), true);
  write_manifest(dir, o, "backtest", outputs,
                 json{{"n_forecasts", result.targets.size()}, {"n_refits", refits}, {"rank", cfg.pgarch.rank},
                      {"n_portfolios", portfolios.size()}, {"dropped_assets", loaded.dropped}});

  std::cout << "forecasts per portfolio: " << result.targets.size() << ", refits: " << refits << '\n';
  std::cout << backtest_csv(summary);
  return ok;
}

// ---------------------------------------------------------------- wiring

void add_common(CLI::App* sub, Options& o) {
  sub->add_option("--out-dir", o.out_dir, "Output directory")->capture_default_str();
  sub->add_option("--seed", o.seed, "Random seed")->capture_default_str();
  sub->add_option("--threads", o.threads, "Worker threads (0: all cores)")->capture_default_str();
}

void add_model_flags(CLI::App* sub, Options& o) {
  sub->add_option("--rank", o.rank, "Number of factors, or 'auto'")->capture_default_str();
  sub->add_option("--c-tau", o.c_tau, "Threshold constant C_tau")->capture_default_str();
  sub->add_option("--s-p", o.s_p, "Sparsity term s_p")->capture_default_str();
  sub->add_option("--threshold-mode", o.threshold_mode, "soft, hard or sector_block")->capture_default_str();
  sub->add_option("--groups", o.groups, "asset_id,group sidecar for sector_block")->check(CLI::ExistingFile);
  sub->add_option("--models", o.models, "Comma-separated model list")->delimiter(',');
  sub->add_option("--quantiles", o.quantiles, "normal, student_t, empirical")->delimiter(',');
  sub->add_option("--alpha", o.alphas, "VaR level (repeatable)")->delimiter(',');
  sub->add_option("--nu", o.nu, "Student-t degrees of freedom")->capture_default_str();
}

void add_sim_flags(CLI::App* sub, Options& o) {
  sub->add_option("--p", o.p, "Number of assets")->capture_default_str();
  sub->add_option("--T", o.T, "Sample length")->capture_default_str();
  sub->add_option("--reps", o.reps, "Monte Carlo replications")->capture_default_str();
  sub->add_option("--portfolio-size", o.portfolio_sizes, "Portfolio size(s); 0 is the whole panel")->delimiter(',');
  sub->add_option("--metric", o.metrics, "frobenius, spectral, max, rel_frobenius, theta_mae, var_mae")
      ->delimiter(',');
  sub->add_option("--burn-in", o.burn_in, "Discarded steps before recording")->capture_default_str();
}

int dispatch(CLI::App& app, CLI::App* simulate, CLI::App* fit, CLI::App* forecast, CLI::App* backtest,
             CLI::App* compare, const Options& o) {
  if (simulate->parsed()) return cmd_simulate(o);
  if (fit->parsed()) return cmd_fit(o);
  if (forecast->parsed()) return cmd_forecast(o);
  if (backtest->parsed()) return cmd_backtest(o);
  if (compare->parsed()) return cmd_compare(o);
  std::cerr << app.help();
  return usage;
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"P-GARCH volatility and Value-at-Risk toolkit", "pgarch"};
  app.set_config("--config", "", "INI config file; sections name subcommands");
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);
  Options o;

  auto* simulate = app.add_subcommand("simulate", "Monte Carlo study on the factor GARCH DGP");
  add_common(simulate, o);
  add_model_flags(simulate, o);
  add_sim_flags(simulate, o);

  auto* compare = app.add_subcommand("compare", "Simulated model comparison on small portfolios");
  add_common(compare, o);
  add_model_flags(compare, o);
  add_sim_flags(compare, o);

  auto* fit = app.add_subcommand("fit", "Fit P-GARCH on the last window of a panel");
  add_common(fit, o);
  add_model_flags(fit, o);
  fit->add_option("--panel", o.panel, "Wide CSV of returns")->required();
  fit->add_option("--window", o.window, "Window length (0: whole panel)")->capture_default_str();

  auto* forecast = app.add_subcommand("forecast", "One-step covariance and VaR forecast");
  add_common(forecast, o);
  add_model_flags(forecast, o);
  forecast->add_option("--panel", o.panel, "Wide CSV of returns")->required();
  forecast->add_option("--window", o.window, "Window length (0: whole panel)")->capture_default_str();
  forecast->add_option("--weights", o.weights, "asset_id,weight file (default: equal weights)");

  auto* backtest = app.add_subcommand("backtest", "Rolling-window VaR backtest");
  add_common(backtest, o);
  add_model_flags(backtest, o);
  backtest->add_option("--panel", o.panel, "Wide CSV of returns")->required();
  backtest->add_option("--window", o.window, "Rolling window length")->capture_default_str();
  backtest->add_option("--refit-every", o.refit_every, "Days between parameter refits")->capture_default_str();
  backtest->add_option("--portfolios", o.portfolios, "portfolio_id,asset_id,weight file");
  backtest->add_option("--portfolio-size", o.portfolio_sizes, "Random portfolio size(s)")->delimiter(',');
  backtest->add_option("--n-portfolios", o.n_portfolios, "Random portfolios per size")->capture_default_str();
  backtest->add_option("--dq-lags", o.dq_lags, "Lagged hits in the DQ regression")->capture_default_str();
  backtest->add_flag("--write-series", o.write_series, "Also write the daily VaR and hit series");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(std::move(reversed));
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? ok : usage;
  }
  try {
    return dispatch(app, simulate, fit, forecast, backtest, compare, o);
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return data_error;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return numerical_error;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return usage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return data_error;
  }
}

int run(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args);
}

}  // namespace pgarch::cli
