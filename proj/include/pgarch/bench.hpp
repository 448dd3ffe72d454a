#pragma once

#include <string>
#include <vector>

#include "pgarch/fgarch.hpp"
#include "pgarch/shrink.hpp"
#include "pgarch/types.hpp"

namespace pgarch {

enum class BenchKind { ccc, bekk_diag_vt, port_garch, hist_vol, static_poet };

BenchKind parse_bench_kind(const std::string& name);
std::string to_string(BenchKind kind);

/// Univariate GARCH(1,1): h_t = omega + a x_{t-1}^2 + b h_{t-1}.
struct Garch11 {
  double omega = 0.0;
  double a = 0.0;
  double b = 0.0;
};

struct UnivariateGarch {
  Garch11 params;
  Vector h;             // in-sample conditional variances
  double h_next = 0.0;  // one-step forecast
  bool fallback = false;
  FitDiagnostics diagnostics;
};

/// QMLE of a GARCH(1,1) on a centred series; this is the rank-1 case of
/// qmle_fit, so every benchmark margin shares the factor-GARCH optimizer.
/// On failure falls back to variance targeting with (a, b) = (0.05, 0.9).
UnivariateGarch fit_garch11(const Vector& centered, const FitConfig& config = {});

/// Runs the recursion for fixed parameters.
UnivariateGarch filter_garch11(const Vector& centered, const Garch11& params);

/// A fitted small-portfolio benchmark. `forecast` is s x s (1 x 1 for
/// port_garch, which models the portfolio return directly).
struct BenchModel {
  BenchKind kind = BenchKind::hist_vol;
  Matrix forecast;
  Vector mean;
  std::vector<Garch11> margins;      // ccc: one per asset; port_garch: one
  Matrix correlation;                // ccc
  Vector bekk_a;                     // bekk_diag_vt diagonal of A
  Vector bekk_b;                     // bekk_diag_vt diagonal of B
  Matrix variance_path;              // ccc: T x s; port_garch: T x 1
  std::vector<Matrix> covariance_path;  // bekk_diag_vt: Sigma_1..Sigma_T
  std::vector<std::string> flags;

  /// w' Sigma_t w over the estimation window (constant for static kinds).
  Vector portfolio_variance_path(const Vector& weights, Index periods) const;
};

/// Constant conditional correlation: GARCH(1,1) margins plus the correlation
/// of standardized residuals (divisor T). `frozen` reuses its margins.
BenchModel fit_ccc(const Matrix& returns, const FitConfig& config = {},
                   const BenchModel* frozen = nullptr);

/// Diagonal BEKK with variance targeting:
///   Sigma_t = C + (a a') o (x x')_{t-1} + (b b') o Sigma_{t-1},
///   C = Sbar o (1 1' - a a' - b b'),
/// fitted by Gaussian QMLE over (a, b) with a_i^2 + b_i^2 < 1.
BenchModel fit_bekk_diag_vt(const Matrix& returns, const FitConfig& config = {},
                            const BenchModel* frozen = nullptr);

/// Variance-targeted BEKK quasi-likelihood sum_t (log det Sigma_t + x_t' Sigma_t^{-1} x_t)
/// for centred returns; +inf if some Sigma_t is not positive definite.
double bekk_objective(const Matrix& centered, const Vector& a, const Vector& b);

/// Univariate GARCH(1,1) on the portfolio return series.
BenchModel fit_port_garch(const Vector& portfolio_returns, const FitConfig& config = {},
                          const BenchModel* frozen = nullptr);

/// Window sample covariance (divisor T) used directly as the forecast.
Matrix hist_vol(const Matrix& returns);
BenchModel fit_hist_vol(const Matrix& returns);

/// POET with the mean factor variance and no dynamics:
/// V diag(lambda / p) V' plus the regularized residual.
Matrix static_poet(const Matrix& returns, int rank, const ThresholdSpec& spec);
BenchModel fit_static_poet(const Matrix& returns, int rank, const ThresholdSpec& spec);

}  // namespace pgarch
