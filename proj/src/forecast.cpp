#include "pgarch/forecast.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "pgarch/distributions.hpp"

namespace pgarch {

Matrix regularized_idiosyncratic(const FactorDecomposition& decomp, const ThresholdSpec& spec,
                                 Index periods) {
  const Index p = decomp.assets();
  const double tau = threshold_level(spec, p, periods);
  Matrix idio = apply_threshold(decomp.residual_cov, tau, spec);
  if (spec.repair_psd) idio = psd_repair(idio);
  return idio;
}

VolForecast assemble_forecast(const Matrix& loadings, const Vector& h_next, Matrix idio_part) {
  VolForecast out;
  out.h_next = h_next;
  out.factor_part = loadings * h_next.asDiagonal() * loadings.transpose();
  out.factor_part = 0.5 * (out.factor_part + out.factor_part.transpose()).eval();
  out.idio_part = std::move(idio_part);
  out.sigma = out.factor_part + out.idio_part;
  return out;
}

VolForecast pgarch_forecast(const FactorDecomposition& decomp, const GarchParams& theta,
                            const Matrix& fsq, const ThresholdSpec& spec, Index periods) {
  if (decomp.rank < 1) throw std::invalid_argument("pgarch_forecast: rank must be at least 1");
  if (theta.rank() != decomp.rank || fsq.cols() != decomp.rank) {
    throw std::invalid_argument("pgarch_forecast: theta, factors and decomposition disagree on rank");
  }
  if (fsq.rows() < 1) throw std::invalid_argument("pgarch_forecast: empty factor history");
  const VolPath path = recurse_h(theta, fsq);
  const Index last = fsq.rows() - 1;
  const Vector h_next = advance_h(theta, fsq.row(last).transpose(), path.h.row(last).transpose());
  return assemble_forecast(decomp.loadings, h_next, regularized_idiosyncratic(decomp, spec, periods));
}

void QuantileRule::validate() const {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("QuantileRule: alpha must lie in (0, 1)");
  if (kind == QuantileKind::student_t && !(nu > 2.0)) {
    throw std::invalid_argument("QuantileRule: student_t needs nu > 2");
  }
}

std::string QuantileRule::name() const {
  switch (kind) {
    case QuantileKind::normal: return "normal";
    case QuantileKind::student_t: return "student_t";
    case QuantileKind::empirical: return "empirical";
  }
  return "unknown";
}

QuantileKind parse_quantile_kind(const std::string& name) {
  if (name == "normal") return QuantileKind::normal;
  if (name == "t" || name == "student_t" || name == "student-t") return QuantileKind::student_t;
  if (name == "empirical" || name == "sample") return QuantileKind::empirical;
  throw std::invalid_argument("unknown quantile rule '" + name + "'");
}

double quantile_value(const QuantileRule& rule, std::span<const double> history) {
  rule.validate();
  switch (rule.kind) {
    case QuantileKind::normal:
      return dist::normal_quantile(rule.alpha);
    case QuantileKind::student_t:
      return dist::student_t_quantile(rule.alpha, rule.nu) * std::sqrt((rule.nu - 2.0) / rule.nu);
    case QuantileKind::empirical: {
      const auto n = static_cast<double>(history.size());
      const auto needed = static_cast<std::size_t>(std::ceil(1.0 / rule.alpha - 1e-9));
      if (history.size() < needed) {
        throw std::invalid_argument("quantile_value: empirical rule needs at least " +
                                    std::to_string(needed) + " observations");
      }
      auto k = static_cast<std::size_t>(std::ceil(rule.alpha * n - 1e-9));
      k = std::clamp<std::size_t>(k, 1, history.size());
      std::vector<double> sorted(history.begin(), history.end());
      std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(k - 1), sorted.end());
      return sorted[k - 1];
    }
  }
  return 0.0;
}

VarForecast var_from_moments(double mean_port, double variance_port, const QuantileRule& rule,
                             std::span<const double> history) {
  if (!(variance_port > 0.0) || !std::isfinite(variance_port)) {
    throw NumericalError("var_forecast: portfolio variance is not positive");
  }
  VarForecast out;
  out.mean_port = mean_port;
  out.sigma_port = std::sqrt(variance_port);
  out.c_alpha = quantile_value(rule, history);
  out.var_value = -out.mean_port - out.c_alpha * out.sigma_port;
  return out;
}

VarForecast var_forecast(const VolForecast& vol, const Portfolio& w, const Vector& mean,
                         const QuantileRule& rule, std::span<const double> history) {
  if (w.size() != vol.sigma.rows() || mean.size() != w.size()) {
    throw std::invalid_argument("var_forecast: dimension mismatch");
  }
  const Vector& wv = w.weights();
  return var_from_moments(wv.dot(mean), wv.dot(vol.sigma * wv), rule, history);
}

Vector standardized_returns(const Vector& centered_portfolio, const Vector& variance_path) {
  if (centered_portfolio.size() != variance_path.size()) {
    throw std::invalid_argument("standardized_returns: length mismatch");
  }
  if ((variance_path.array() <= 0.0).any()) {
    throw NumericalError("standardized_returns: non-positive conditional variance");
  }
  return centered_portfolio.cwiseQuotient(variance_path.cwiseSqrt());
}

Vector PgarchFit::portfolio_variance_path(const Vector& weights) const {
  const Vector exposure = decomp.loadings.transpose() * weights;
  const double idio = weights.dot(forecast.idio_part * weights);
  return (path.h * exposure.cwiseAbs2()).array() + idio;
}

PgarchFit fit_pgarch(const Matrix& window, const PgarchOptions& options,
                     const GarchParams* frozen_theta) {
  PgarchFit out;
  auto [centered, mean] = demean(window);
  out.mean = std::move(mean);
  out.decomp = poet_decompose(sample_cov(centered), options.rank);
  out.decomp.factors = extract_factors(out.decomp, centered);
  out.fsq = out.decomp.factors.cwiseAbs2();
  if (frozen_theta) {
    out.theta = *frozen_theta;
  } else {
    FitResult fit = qmle_fit(out.fsq, options.fit);
    out.theta = std::move(fit.theta);
    out.diagnostics = std::move(fit.diagnostics);
  }
  out.path = recurse_h(out.theta, out.fsq);
  const Index last = out.fsq.rows() - 1;
  const Vector h_next =
      advance_h(out.theta, out.fsq.row(last).transpose(), out.path.h.row(last).transpose());
  out.forecast = assemble_forecast(out.decomp.loadings, h_next,
                                   regularized_idiosyncratic(out.decomp, options.threshold, window.rows()));
  return out;
}

}  // namespace pgarch
