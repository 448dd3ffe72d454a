#include "pgarch/simul.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <numeric>
#include <sstream>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "pgarch/bench.hpp"
#include "pgarch/distributions.hpp"
#include "pgarch/parallel.hpp"
#include "pgarch/spectral.hpp"

namespace pgarch {

namespace {

enum : std::uint64_t { kStreamLoadings = 1, kStreamInnovations = 2, kStreamPortfolio = 3 };

bool is_bench(const std::string& model) { return model != "pgarch"; }

std::vector<Index> sample_without_replacement(Index p, Index s, std::mt19937_64& rng) {
  std::vector<Index> all(static_cast<std::size_t>(p));
  std::iota(all.begin(), all.end(), Index{0});
  // Partial Fisher-Yates.
  for (Index i = 0; i < s; ++i) {
    std::uniform_int_distribution<Index> pick(i, p - 1);
    std::swap(all[static_cast<std::size_t>(i)], all[static_cast<std::size_t>(pick(rng))]);
  }
  all.resize(static_cast<std::size_t>(s));
  std::sort(all.begin(), all.end());
  return all;
}

Matrix block(const Matrix& m, const std::vector<Index>& idx) { return m(idx, idx); }

struct ModelOutput {
  Matrix sigma;        // covariance forecast on the evaluated assets; empty for port_garch
  double mean_port = 0.0;
  double var_port = 0.0;
  Vector std_history;  // standardized in-window portfolio returns
  std::optional<GarchParams> theta;
};

Vector standardized(const Vector& port, const Vector& var_path) {
  return standardized_returns(port.array() - port.mean(), var_path);
}

ModelOutput evaluate_model(const std::string& model, const Matrix& returns,
                           const std::vector<Index>& assets, const Vector& w_block,
                           const ReplicationConfig& config) {
  const Index p = returns.cols();
  const Index T = returns.rows();
  Vector w_full = Vector::Zero(p);
  w_full(assets) = w_block;
  const Matrix sub = returns(Eigen::all, assets);
  const Vector port = returns * w_full;

  ModelOutput out;
  if (model == "pgarch" || model == "static_poet") {
    if (model == "pgarch") {
      const PgarchFit fit = fit_pgarch(returns, config.pgarch);
      out.sigma = block(fit.forecast.sigma, assets);
      out.mean_port = w_full.dot(fit.mean);
      out.std_history = standardized(port, fit.portfolio_variance_path(w_full));
      out.theta = fit.theta;
    } else {
      const BenchModel m = fit_static_poet(returns, config.pgarch.rank, config.pgarch.threshold);
      out.sigma = block(m.forecast, assets);
      out.mean_port = w_full.dot(m.mean);
      out.std_history = standardized(port, m.portfolio_variance_path(w_full, T));
    }
    out.var_port = w_block.dot(out.sigma * w_block);
    return out;
  }
  BenchModel m;
  Vector w_model = w_block;
  switch (parse_bench_kind(model)) {
    case BenchKind::ccc: m = fit_ccc(sub, config.bench_fit); break;
    case BenchKind::bekk_diag_vt: m = fit_bekk_diag_vt(sub, config.bench_fit); break;
    case BenchKind::hist_vol: m = fit_hist_vol(sub); break;
    case BenchKind::static_poet: break;
    case BenchKind::port_garch:
      m = fit_port_garch(port, config.bench_fit);
      w_model = Vector::Ones(1);
      break;
  }
  if (m.kind != BenchKind::port_garch) out.sigma = m.forecast;
  out.mean_port = w_model.dot(m.mean);
  out.var_port = w_model.dot(m.forecast * w_model);
  out.std_history = standardized(port, m.portfolio_variance_path(w_model, T));
  return out;
}

using RepValues = std::map<std::string, std::map<std::string, double>>;

struct RepResult {
  RepValues values;
  std::vector<std::string> failed;
};

}  // namespace

std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream) {
  return std::mt19937_64(stream_seed(seed, stream));
}

GarchParams default_theta0() {
  GarchParams theta;
  theta.omega = Vector{{0.003, 0.002, 0.001}};
  theta.A = Matrix{{0.2, 0.3, 0.4}, {0.15, 0.12, 0.2}, {0.1, 0.1, 0.1}};
  theta.B = Matrix{{0.2, 0.1, 0.1}, {0.2, 0.05, 0.07}, {0.1, 0.0, 0.05}};
  return theta;
}

Matrix banded_idio_cov(Index p, double scale, double decay) {
  Matrix s(p, p);
  for (Index i = 0; i < p; ++i) {
    for (Index j = 0; j < p; ++j) s(i, j) = scale * std::pow(decay, static_cast<double>(std::abs(i - j)));
  }
  return s;
}

void DgpSpec::validate() const {
  pgarch::validate(theta0);
  if (rank() < 1) throw std::invalid_argument("DgpSpec: rank must be at least 1");
  if (p <= rank()) throw std::invalid_argument("DgpSpec: p must exceed the rank");
  if (T < 2) throw std::invalid_argument("DgpSpec: T must be at least 2");
  if (burn_in < 0) throw std::invalid_argument("DgpSpec: burn_in must be nonnegative");
  if (!(idio_scale > 0.0)) throw std::invalid_argument("DgpSpec: idio_scale must be positive");
  if (!(std::abs(idio_decay) < 1.0)) throw std::invalid_argument("DgpSpec: |idio_decay| must be below 1");
  h_init(theta0);
}

Matrix SimTruth::sigma_at(Index t) const {
  Matrix s = loadings * h.row(t).transpose().asDiagonal() * loadings.transpose() + sigma_u;
  return 0.5 * (s + s.transpose());
}

Matrix SimTruth::sigma_next() const {
  Matrix s = loadings * h_next.asDiagonal() * loadings.transpose() + sigma_u;
  return 0.5 * (s + s.transpose());
}

Dgp::Dgp(DgpSpec spec) : spec_(std::move(spec)) {
  spec_.validate();
  sigma_u_ = banded_idio_cov(spec_.p, spec_.idio_scale, spec_.idio_decay);
  Eigen::LLT<Matrix> llt(sigma_u_);
  if (llt.info() != Eigen::Success) throw NumericalError("Dgp: idiosyncratic covariance is not positive definite");
  chol_ = llt.matrixL();
}

Matrix Dgp::draw_loadings(std::uint64_t seed) const {
  auto rng = make_rng(seed, kStreamLoadings);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Matrix m(spec_.T, spec_.p);
  for (Index j = 0; j < m.cols(); ++j) {
    for (Index i = 0; i < m.rows(); ++i) m(i, j) = unif(rng);
  }
  Matrix gram = Matrix::Zero(spec_.p, spec_.p);
  gram.selfadjointView<Eigen::Lower>().rankUpdate(m.transpose());
  gram.triangularView<Eigen::StrictlyUpper>() = gram.transpose();
  const EigenSystem eig = eigh(gram);
  return std::sqrt(static_cast<double>(spec_.p)) * eig.vectors.leftCols(spec_.rank());
}

Simulated Dgp::draw(std::uint64_t seed) const { return draw(seed, spec_.T); }

Simulated Dgp::draw(std::uint64_t seed, Index periods) const {
  if (periods < 2) throw std::invalid_argument("Dgp::draw: need at least 2 periods");
  const Index p = spec_.p;
  const int r = spec_.rank();
  const GarchParams& theta = spec_.theta0;

  SimTruth truth;
  truth.sigma_u = sigma_u_;
  truth.loadings = draw_loadings(spec_.loading_seed.value_or(seed));
  truth.factors.resize(periods, r);
  truth.h.resize(periods, r);

  auto rng = make_rng(seed, kStreamInnovations);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto draw_normal = [&](Index n) {
    Vector z(n);
    for (Index i = 0; i < n; ++i) z(i) = normal(rng);
    return z;
  };

  Vector h = h_init(theta);
  for (Index b = 0; b < spec_.burn_in; ++b) {
    const Vector f = h.cwiseSqrt().cwiseProduct(draw_normal(r));
    h = advance_h(theta, f.cwiseAbs2(), h);
  }
  Matrix y(periods, p);
  for (Index t = 0; t < periods; ++t) {
    const Vector f = h.cwiseSqrt().cwiseProduct(draw_normal(r));
    const Vector u = chol_ * draw_normal(p);
    truth.h.row(t) = h.transpose();
    truth.factors.row(t) = f.transpose();
    y.row(t) = (truth.loadings * f + u).transpose();
    h = advance_h(theta, f.cwiseAbs2(), h);
  }
  truth.h_next = h;

  std::vector<std::string> ids(static_cast<std::size_t>(p));
  for (Index j = 0; j < p; ++j) ids[static_cast<std::size_t>(j)] = "A" + std::to_string(j + 1);
  std::vector<std::string> stamps(static_cast<std::size_t>(periods));
  for (Index t = 0; t < periods; ++t) {
    std::ostringstream os;
    os << 't' << std::setw(7) << std::setfill('0') << t + 1;
    stamps[static_cast<std::size_t>(t)] = os.str();
  }
  return Simulated{make_panel(std::move(y), std::move(ids), std::move(stamps)), std::move(truth)};
}

MetricKind parse_metric_kind(const std::string& name) {
  if (name == "frobenius") return MetricKind::frobenius;
  if (name == "spectral") return MetricKind::spectral;
  if (name == "max") return MetricKind::max;
  if (name == "rel_frobenius") return MetricKind::rel_frobenius;
  if (name == "theta_mae" || name == "mae") return MetricKind::theta_mae;
  if (name == "var_mae") return MetricKind::var_mae;
  throw std::invalid_argument("unknown metric '" + name + "'");
}

std::string to_string(MetricKind kind) {
  switch (kind) {
    case MetricKind::frobenius: return "frobenius";
    case MetricKind::spectral: return "spectral";
    case MetricKind::max: return "max";
    case MetricKind::rel_frobenius: return "rel_frobenius";
    case MetricKind::theta_mae: return "theta_mae";
    case MetricKind::var_mae: return "var_mae";
  }
  return "unknown";
}

double matrix_error(MetricKind kind, const Matrix& est, const Matrix& truth) {
  if (est.rows() != truth.rows() || est.cols() != truth.cols()) {
    throw std::invalid_argument("matrix_error: dimension mismatch");
  }
  const Matrix diff = est - truth;
  switch (kind) {
    case MetricKind::frobenius: return diff.norm();
    case MetricKind::spectral: return spectral_norm(diff);
    case MetricKind::max: return diff.cwiseAbs().maxCoeff();
    case MetricKind::rel_frobenius: {
      Eigen::SelfAdjointEigenSolver<Matrix> es(truth);
      if (es.info() != Eigen::Success || es.eigenvalues().minCoeff() <= 0.0) {
        throw NumericalError("matrix_error: reference matrix is not positive definite");
      }
      const Matrix inv_sqrt = es.operatorInverseSqrt();
      return (inv_sqrt * diff * inv_sqrt).squaredNorm() / static_cast<double>(truth.rows());
    }
    default: break;
  }
  throw std::invalid_argument("matrix_error: not a matrix norm");
}

std::vector<std::string> theta_metric_names(int rank) {
  std::vector<std::string> names;
  for (int i = 1; i <= rank; ++i) names.push_back("mae_omega_" + std::to_string(i));
  for (const char* m : {"A", "B"}) {
    for (int j = 1; j <= rank; ++j) {
      for (int i = 1; i <= rank; ++i) names.push_back(std::string("mae_") + m + "_" + std::to_string(i) + std::to_string(j));
    }
  }
  return names;
}

std::string var_metric_name(const QuantileRule& rule) {
  std::ostringstream os;
  os << "var_mae_" << rule.name() << "_" << rule.alpha;
  return os.str();
}

const MetricRow* MetricTable::find(const std::string& model, const std::string& metric) const {
  for (const auto& row : rows) {
    if (row.model == model && row.metric == metric) return &row;
  }
  return nullptr;
}

std::string MetricTable::to_csv() const {
  std::ostringstream os;
  os << "p,T,model,metric,mean,sd,n_reps,failures\n" << std::setprecision(10);
  for (const auto& r : rows) {
    os << r.p << ',' << r.T << ',' << r.model << ',' << r.metric << ',' << r.mean << ',' << r.sd << ','
       << r.n_reps << ',' << r.failures << '\n';
  }
  return os.str();
}

void MetricTable::write_csv(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << to_csv();
}

MetricTable run_replications(const DgpSpec& spec, int n_reps, const ReplicationConfig& config) {
  if (n_reps < 1) throw std::invalid_argument("run_replications: n_reps must be at least 1");
  if (config.portfolio_size < 0 || config.portfolio_size > spec.p) {
    throw std::invalid_argument("run_replications: portfolio_size outside [0, p]");
  }
  for (const auto& m : config.models) {
    if (m != "pgarch") parse_bench_kind(m);
  }
  for (const auto& rule : config.var_rules) rule.validate();
  const Dgp dgp(spec);
  const int r = spec.rank();

  auto wants = [&](MetricKind k) {
    return std::find(config.metrics.begin(), config.metrics.end(), k) != config.metrics.end();
  };
  std::vector<MetricKind> norms;
  for (MetricKind k : config.metrics) {
    if (k != MetricKind::theta_mae && k != MetricKind::var_mae) norms.push_back(k);
  }

  std::vector<RepResult> results(static_cast<std::size_t>(n_reps));
  parallel_for(results.size(), config.threads, [&](std::size_t rep) {
    const std::uint64_t seed = stream_seed(config.seed, rep);
    const Simulated sim = dgp.draw(seed);
    const Index p = spec.p;
    std::vector<Index> assets;
    if (config.portfolio_size > 0) {
      auto rng = make_rng(seed, kStreamPortfolio);
      assets = sample_without_replacement(p, config.portfolio_size, rng);
    } else {
      assets.resize(static_cast<std::size_t>(p));
      std::iota(assets.begin(), assets.end(), Index{0});
    }
    const Index s = static_cast<Index>(assets.size());
    const Vector w = Vector::Constant(s, 1.0 / static_cast<double>(s));
    const Matrix truth = block(sim.truth.sigma_next(), assets);
    const double true_sd = std::sqrt(w.dot(truth * w));

    RepResult& res = results[rep];
    for (const auto& model : config.models) {
      try {
        const ModelOutput out = evaluate_model(model, sim.panel.returns, assets, w, config);
        auto& vals = res.values[model];
        if (out.sigma.size() > 0) {
          for (MetricKind k : norms) vals[to_string(k)] = matrix_error(k, out.sigma, truth);
        }
        if (wants(MetricKind::theta_mae) && out.theta) {
          const Vector est = out.theta->to_vec();
          const Vector ref = spec.theta0.to_vec();
          const auto names = theta_metric_names(r);
          for (Index i = 0; i < est.size(); ++i) vals[names[static_cast<std::size_t>(i)]] = std::abs(est(i) - ref(i));
        }
        if (wants(MetricKind::var_mae)) {
          const std::span<const double> hist(out.std_history.data(), static_cast<std::size_t>(out.std_history.size()));
          for (const auto& rule : config.var_rules) {
            const double est = var_from_moments(out.mean_port, out.var_port, rule, hist).var_value;
            const double ref = -dist::normal_quantile(rule.alpha) * true_sd;
            vals[var_metric_name(rule)] = std::abs(est - ref);
          }
        }
      } catch (const std::exception&) {
        res.values.erase(model);
        res.failed.push_back(model);
      }
    }
  });

  MetricTable table;
  for (const auto& model : config.models) {
    std::vector<std::string> names;
    if (model != "port_garch") {
      for (MetricKind k : norms) names.push_back(to_string(k));
    }
    if (wants(MetricKind::theta_mae) && !is_bench(model)) {
      for (auto& n : theta_metric_names(r)) names.push_back(n);
    }
    if (wants(MetricKind::var_mae)) {
      for (const auto& rule : config.var_rules) names.push_back(var_metric_name(rule));
    }
    int failures = 0;
    for (const auto& res : results) failures += static_cast<int>(std::count(res.failed.begin(), res.failed.end(), model));
    for (const auto& name : names) {
      std::vector<double> xs;
      for (const auto& res : results) {
        auto it = res.values.find(model);
        if (it == res.values.end()) continue;
        auto jt = it->second.find(name);
        if (jt != it->second.end()) xs.push_back(jt->second);
      }
      MetricRow row{spec.p, spec.T, model, name, 0.0, 0.0, static_cast<int>(xs.size()), failures};
      if (!xs.empty()) {
        const double n = static_cast<double>(xs.size());
        row.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
        double ss = 0.0;
        for (double x : xs) ss += (x - row.mean) * (x - row.mean);
        row.sd = xs.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
      } else {
        row.mean = std::numeric_limits<double>::quiet_NaN();
        row.sd = std::numeric_limits<double>::quiet_NaN();
      }
      table.rows.push_back(std::move(row));
    }
  }
  return table;
}

}  // namespace pgarch
