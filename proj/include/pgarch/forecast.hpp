#pragma once

#include <span>
#include <string>

#include "pgarch/fgarch.hpp"
#include "pgarch/panel.hpp"
#include "pgarch/shrink.hpp"
#include "pgarch/spectral.hpp"
#include "pgarch/types.hpp"

namespace pgarch {

/// One-step-ahead covariance: sigma = factor_part + idio_part, with
/// factor_part = V diag(h_next) V' and idio_part the thresholded residual.
struct VolForecast {
  Matrix sigma;
  Matrix factor_part;
  Matrix idio_part;
  Vector h_next;
};

/// Thresholded (and, if requested, PSD-repaired) idiosyncratic covariance.
Matrix regularized_idiosyncratic(const FactorDecomposition& decomp, const ThresholdSpec& spec,
                                 Index periods);

VolForecast assemble_forecast(const Matrix& loadings, const Vector& h_next, Matrix idio_part);

/// P-GARCH forecast from a decomposition, fitted theta and the in-window
/// squared factors: h_next = omega + A fsq_T + B h_T.
VolForecast pgarch_forecast(const FactorDecomposition& decomp, const GarchParams& theta,
                            const Matrix& fsq, const ThresholdSpec& spec, Index periods);

enum class QuantileKind { normal, student_t, empirical };

struct QuantileRule {
  QuantileKind kind = QuantileKind::normal;
  double alpha = 0.01;
  double nu = 6.0;

  void validate() const;
  std::string name() const;  // "normal", "student_t", "empirical"
};

/// Parses "normal", "t"/"student_t", "empirical"/"sample".
QuantileKind parse_quantile_kind(const std::string& name);

/// c_alpha under the rule: Phi^{-1}(alpha); t_nu^{-1}(alpha) sqrt((nu-2)/nu);
/// or the ceil(alpha T)-th smallest standardized return in `history`.
double quantile_value(const QuantileRule& rule, std::span<const double> history = {});

struct VarForecast {
  double var_value = 0.0;  // -mean_port - c_alpha * sigma_port
  double sigma_port = 0.0;
  double mean_port = 0.0;
  double c_alpha = 0.0;
};

VarForecast var_from_moments(double mean_port, double variance_port, const QuantileRule& rule,
                             std::span<const double> history = {});

VarForecast var_forecast(const VolForecast& vol, const Portfolio& w, const Vector& mean,
                         const QuantileRule& rule, std::span<const double> history = {});

/// (w'(y_t - ybar)) / sqrt(w' Sigma_t w) given the centred portfolio series
/// and its in-window conditional variance path.
Vector standardized_returns(const Vector& centered_portfolio, const Vector& variance_path);

struct PgarchOptions {
  int rank = 3;
  ThresholdSpec threshold;
  FitConfig fit;
};

/// Everything the P-GARCH pipeline computes on one estimation window.
struct PgarchFit {
  Vector mean;
  FactorDecomposition decomp;  // factors filled
  Matrix fsq;
  GarchParams theta;
  FitDiagnostics diagnostics;  // empty when theta was supplied
  VolPath path;
  VolForecast forecast;

  /// w' Sigma_t w for every in-window t.
  Vector portfolio_variance_path(const Vector& weights) const;
};

/// Demean, POET-decompose the sample covariance, extract factors, fit theta
/// (or reuse `frozen_theta`) and forecast one step ahead.
PgarchFit fit_pgarch(const Matrix& window, const PgarchOptions& options,
                     const GarchParams* frozen_theta = nullptr);

}  // namespace pgarch
