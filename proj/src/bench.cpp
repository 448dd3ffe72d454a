#include "pgarch/bench.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/Cholesky>

#include "pgarch/forecast.hpp"
#include "pgarch/optim.hpp"
#include "pgarch/panel.hpp"
#include "pgarch/spectral.hpp"

namespace pgarch {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kBekkMax = 0.9999;

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }
double logit(double u) { return std::log(u / (1.0 - u)); }

void decode_bekk(const Vector& x, Vector& a, Vector& b) {
  const Index s = x.size() / 2;
  a.resize(s);
  b.resize(s);
  for (Index i = 0; i < s; ++i) {
    const double q = kBekkMax * logistic(x(i));
    const double phi = 0.5 * std::numbers::pi * logistic(x(s + i));
    a(i) = std::sqrt(q) * std::cos(phi);
    b(i) = std::sqrt(q) * std::sin(phi);
  }
}

Vector encode_bekk(const Vector& a, const Vector& b) {
  const Index s = a.size();
  Vector x(2 * s);
  for (Index i = 0; i < s; ++i) {
    const double q = std::clamp((a(i) * a(i) + b(i) * b(i)) / kBekkMax, 1e-8, 1.0 - 1e-8);
    const double phi = std::atan2(b(i), a(i)) / (0.5 * std::numbers::pi);
    x(i) = logit(q);
    x(s + i) = logit(std::clamp(phi, 1e-8, 1.0 - 1e-8));
  }
  return x;
}

Matrix bekk_intercept(const Matrix& sbar, const Vector& a, const Vector& b) {
  const Index s = sbar.rows();
  const Matrix k = Matrix::Ones(s, s) - a * a.transpose() - b * b.transpose();
  return sbar.cwiseProduct(k);
}

struct BekkFilter {
  double objective = kInf;
  std::vector<Matrix> path;
  Matrix next;
};

BekkFilter run_bekk(const Matrix& x, const Matrix& sbar, const Matrix& intercept, const Vector& a,
                    const Vector& b, bool keep_path) {
  const Matrix aa = a * a.transpose();
  const Matrix bb = b * b.transpose();
  BekkFilter out;
  Matrix sigma = sbar;
  double total = 0.0;
  Eigen::LLT<Matrix> llt;
  for (Index t = 0; t < x.rows(); ++t) {
    if (t > 0) {
      const Vector prev = x.row(t - 1).transpose();
      sigma = intercept + aa.cwiseProduct(prev * prev.transpose()) + bb.cwiseProduct(sigma);
    }
    llt.compute(sigma);
    if (llt.info() != Eigen::Success) return out;
    const Vector xt = x.row(t).transpose();
    const Vector solved = llt.matrixL().solve(xt);
    total += 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum() + solved.squaredNorm();
    if (keep_path) out.path.push_back(sigma);
  }
  const Vector last = x.row(x.rows() - 1).transpose();
  out.next = intercept + aa.cwiseProduct(last * last.transpose()) + bb.cwiseProduct(sigma);
  out.objective = std::isfinite(total) ? total : kInf;
  return out;
}

}  // namespace

BenchKind parse_bench_kind(const std::string& name) {
  if (name == "ccc") return BenchKind::ccc;
  if (name == "bekk" || name == "bekk_diag_vt") return BenchKind::bekk_diag_vt;
  if (name == "port_garch" || name == "port-garch") return BenchKind::port_garch;
  if (name == "hist_vol" || name == "hist-vol") return BenchKind::hist_vol;
  if (name == "static_poet" || name == "poet") return BenchKind::static_poet;
  throw std::invalid_argument("unknown benchmark model '" + name + "'");
}

std::string to_string(BenchKind kind) {
  switch (kind) {
    case BenchKind::ccc: return "ccc";
    case BenchKind::bekk_diag_vt: return "bekk_diag_vt";
    case BenchKind::port_garch: return "port_garch";
    case BenchKind::hist_vol: return "hist_vol";
    case BenchKind::static_poet: return "static_poet";
  }
  return "unknown";
}

UnivariateGarch filter_garch11(const Vector& centered, const Garch11& params) {
  const GarchParams theta = GarchParams::scalar(params.omega, params.a, params.b);
  const Matrix fsq = centered.cwiseAbs2();
  UnivariateGarch out;
  out.params = params;
  out.h = recurse_h(theta, fsq).h.col(0);
  const Index last = centered.size() - 1;
  out.h_next = params.omega + params.a * fsq(last, 0) + params.b * out.h(last);
  return out;
}

UnivariateGarch fit_garch11(const Vector& centered, const FitConfig& config) {
  if (centered.size() < 2) throw std::invalid_argument("fit_garch11: need at least 2 observations");
  const Matrix fsq = centered.cwiseAbs2();
  try {
    FitResult fit = qmle_fit(fsq, config);
    if (std::isfinite(fit.diagnostics.objective)) {
      UnivariateGarch out = filter_garch11(
          centered, Garch11{fit.theta.omega(0), fit.theta.A(0, 0), fit.theta.B(0, 0)});
      out.diagnostics = std::move(fit.diagnostics);
      return out;
    }
  } catch (const std::exception&) {
    // falls through to variance targeting
  }
  const double variance = std::max(fsq.mean(), 1e-12);
  UnivariateGarch out = filter_garch11(centered, Garch11{0.05 * variance, 0.05, 0.9});
  out.fallback = true;
  return out;
}

Vector BenchModel::portfolio_variance_path(const Vector& weights, Index periods) const {
  switch (kind) {
    case BenchKind::ccc: {
      Vector out(variance_path.rows());
      for (Index t = 0; t < variance_path.rows(); ++t) {
        const Vector scaled = weights.cwiseProduct(variance_path.row(t).transpose().cwiseSqrt());
        out(t) = scaled.dot(correlation * scaled);
      }
      return out;
    }
    case BenchKind::bekk_diag_vt: {
      Vector out(static_cast<Index>(covariance_path.size()));
      for (std::size_t t = 0; t < covariance_path.size(); ++t) {
        out(static_cast<Index>(t)) = weights.dot(covariance_path[t] * weights);
      }
      return out;
    }
    case BenchKind::port_garch:
      return variance_path.col(0) * (weights.size() == 1 ? weights(0) * weights(0) : 1.0);
    case BenchKind::hist_vol:
    case BenchKind::static_poet:
      return Vector::Constant(periods, weights.dot(forecast * weights));
  }
  return {};
}

BenchModel fit_ccc(const Matrix& returns, const FitConfig& config, const BenchModel* frozen) {
  if (returns.rows() < 2 || returns.cols() < 1) throw std::invalid_argument("fit_ccc: empty window");
  if (frozen && (frozen->kind != BenchKind::ccc ||
                 static_cast<Index>(frozen->margins.size()) != returns.cols())) {
    throw std::invalid_argument("fit_ccc: frozen model does not match");
  }
  auto [x, mean] = demean(returns);
  const Index s = x.cols();
  BenchModel model;
  model.kind = BenchKind::ccc;
  model.mean = mean;
  model.variance_path.resize(x.rows(), s);
  Vector h_next(s);
  for (Index j = 0; j < s; ++j) {
    UnivariateGarch g = frozen ? filter_garch11(x.col(j), frozen->margins[static_cast<std::size_t>(j)])
                               : fit_garch11(x.col(j), config);
    if (g.fallback) model.flags.push_back("margin_fallback:" + std::to_string(j));
    model.margins.push_back(g.params);
    model.variance_path.col(j) = g.h;
    h_next(j) = g.h_next;
  }
  const Matrix z = x.cwiseQuotient(model.variance_path.cwiseSqrt());
  Matrix q = z.transpose() * z / static_cast<double>(x.rows());
  const Vector d = q.diagonal().cwiseSqrt().cwiseInverse();
  model.correlation = d.asDiagonal() * q * d.asDiagonal();
  model.correlation.diagonal().setOnes();
  const Vector sd = h_next.cwiseSqrt();
  model.forecast = sd.asDiagonal() * model.correlation * sd.asDiagonal();
  return model;
}

double bekk_objective(const Matrix& centered, const Vector& a, const Vector& b) {
  const Matrix sbar = sample_cov(centered);
  return run_bekk(centered, sbar, bekk_intercept(sbar, a, b), a, b, false).objective;
}

BenchModel fit_bekk_diag_vt(const Matrix& returns, const FitConfig& config, const BenchModel* frozen) {
  if (returns.rows() < 2 || returns.cols() < 1) throw std::invalid_argument("fit_bekk_diag_vt: empty window");
  auto [x, mean] = demean(returns);
  const Index s = x.cols();
  const Matrix sbar = sample_cov(x);

  BenchModel model;
  model.kind = BenchKind::bekk_diag_vt;
  model.mean = mean;
  Vector a, b;
  if (frozen) {
    if (frozen->kind != BenchKind::bekk_diag_vt || frozen->bekk_a.size() != s) {
      throw std::invalid_argument("fit_bekk_diag_vt: frozen model does not match");
    }
    a = frozen->bekk_a;
    b = frozen->bekk_b;
  } else {
    const Vector x0 = encode_bekk(Vector::Constant(s, std::sqrt(0.05)), Vector::Constant(s, std::sqrt(0.9)));
    auto value = [&](const Vector& v) {
      Vector av, bv;
      decode_bekk(v, av, bv);
      return run_bekk(x, sbar, bekk_intercept(sbar, av, bv), av, bv, false).objective;
    };
    Objective objective = [&](const Vector& v, Vector* grad) {
      const double f = value(v);
      if (grad && std::isfinite(f)) *grad = central_difference(value, v, 1e-5);
      return f;
    };
    MinimizeOptions options;
    options.max_iter = config.max_iter;
    options.grad_tol = config.grad_tol;
    try {
      const MinimizeResult res = minimize_bfgs(objective, x0, options);
      decode_bekk(res.x, a, b);
      if (!res.converged) model.flags.push_back("not_converged");
    } catch (const NumericalError&) {
      decode_bekk(x0, a, b);
      model.flags.push_back("optimizer_failed");
    }
  }
  model.bekk_a = a;
  model.bekk_b = b;

  Matrix intercept = bekk_intercept(sbar, a, b);
  Eigen::SelfAdjointEigenSolver<Matrix> check(intercept, Eigen::EigenvaluesOnly);
  if (check.eigenvalues().minCoeff() < 0.0) {
    intercept = psd_repair(intercept);
    model.flags.push_back("intercept_repaired");
  }
  BekkFilter filt = run_bekk(x, sbar, intercept, a, b, true);
  if (!std::isfinite(filt.objective)) {
    throw NumericalError("fit_bekk_diag_vt: conditional covariance lost definiteness");
  }
  model.covariance_path = std::move(filt.path);
  model.forecast = 0.5 * (filt.next + filt.next.transpose());
  return model;
}

BenchModel fit_port_garch(const Vector& portfolio_returns, const FitConfig& config,
                          const BenchModel* frozen) {
  if (portfolio_returns.size() < 2) throw std::invalid_argument("fit_port_garch: need at least 2 observations");
  BenchModel model;
  model.kind = BenchKind::port_garch;
  const double mean = portfolio_returns.mean();
  const Vector x = portfolio_returns.array() - mean;
  UnivariateGarch g;
  if (frozen) {
    if (frozen->kind != BenchKind::port_garch || frozen->margins.size() != 1) {
      throw std::invalid_argument("fit_port_garch: frozen model does not match");
    }
    g = filter_garch11(x, frozen->margins.front());
  } else {
    g = fit_garch11(x, config);
    if (g.fallback) model.flags.push_back("fallback");
    else if (!g.diagnostics.converged) model.flags.push_back("not_converged");
  }
  model.mean = Vector::Constant(1, mean);
  model.margins.push_back(g.params);
  model.variance_path = g.h;
  model.forecast = Matrix::Constant(1, 1, g.h_next);
  return model;
}

Matrix hist_vol(const Matrix& returns) { return sample_cov(demean(returns).first); }

BenchModel fit_hist_vol(const Matrix& returns) {
  BenchModel model;
  model.kind = BenchKind::hist_vol;
  auto [x, mean] = demean(returns);
  model.mean = std::move(mean);
  model.forecast = sample_cov(x);
  return model;
}

Matrix static_poet(const Matrix& returns, int rank, const ThresholdSpec& spec) {
  auto x = demean(returns).first;
  const FactorDecomposition d = poet_decompose(sample_cov(x), rank);
  Matrix idio = regularized_idiosyncratic(d, spec, returns.rows());
  return assemble_forecast(d.loadings, d.mean_factor_vol(), std::move(idio)).sigma;
}

BenchModel fit_static_poet(const Matrix& returns, int rank, const ThresholdSpec& spec) {
  BenchModel model;
  model.kind = BenchKind::static_poet;
  model.mean = returns.colwise().mean();
  model.forecast = static_poet(returns, rank, spec);
  return model;
}

}  // namespace pgarch
