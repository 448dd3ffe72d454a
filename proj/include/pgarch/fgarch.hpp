#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pgarch/optim.hpp"
#include "pgarch/types.hpp"

namespace pgarch {

/// theta = (omega, vec(A), vec(B)) of the diagonal-volatility factor GARCH
///   h_t = omega + A f_{t-1}^2 + B h_{t-1}.
/// vec() is column-major, so theta has r + 2 r^2 entries.
struct GarchParams {
  Vector omega;
  Matrix A;
  Matrix B;

  int rank() const { return static_cast<int>(omega.size()); }
  static int size_for_rank(int r) { return r + 2 * r * r; }

  Vector to_vec() const;
  static GarchParams from_vec(const Vector& theta, int r);
  static GarchParams scalar(double omega, double a, double b);
};

/// Throws std::invalid_argument unless dimensions agree, omega > 0 and A, B
/// are elementwise nonnegative and finite.
void validate(const GarchParams& theta);

/// Unconditional factor variance (I - A - B)^{-1} omega. Throws NumericalError
/// when I - A - B is singular or the result is not strictly positive.
Vector h_init(const GarchParams& theta);

struct VolPath {
  Matrix h;  // T x r conditional variances
  GarchParams theta;
};

/// h_1 = h_init(theta), h_t = omega + A fsq_{t-1} + B h_{t-1}.
VolPath recurse_h(const GarchParams& theta, const Matrix& fsq);

/// One step of the recursion: omega + A fsq + B h.
Vector advance_h(const GarchParams& theta, const Vector& fsq, const Vector& h);

/// Gaussian quasi-likelihood sum_t sum_i (log h_it + fsq_it / h_it).
/// Returns +inf where theta has no positive unconditional variance or the
/// recursion overflows. When `grad` is non-null it receives d/d theta in the
/// to_vec() layout.
double qmle_objective(const GarchParams& theta, const Matrix& fsq, Vector* grad = nullptr,
                      double h_floor = 1e-12);

struct FitConfig {
  int max_iter = 500;
  double grad_tol = 1e-6;
  double a0 = 0.1;                // diagonal of the starting A
  double b0 = 0.8;                // diagonal of the starting B
  double offdiag0 = -1.0;         // off-diagonal start for A and B; < 0 means 0.02 / r
  double omega_init_scale = 0.1;  // omega0 = scale * mean(fsq) * (1 - a0 - b0)
  double param_max = 0.9999;      // upper bound on A, B entries
  double omega_min = 1e-10;
  double omega_max_factor = 10.0; // omega_i <= factor * mean(fsq_i)
  double h_floor = 1e-12;
  double norm_margin = 1e-4;      // ||B|| is penalized beyond 1 - norm_margin
  std::optional<GarchParams> initial;

  /// Flat `key = value` text, one entry per line.
  std::string to_text() const;
  static FitConfig from_text(const std::string& text);
};

struct FitDiagnostics {
  int iterations = 0;
  int evaluations = 0;
  double grad_norm = 0.0;
  bool converged = false;
  std::string stop_reason;
  double initial_objective = 0.0;
  double objective = 0.0;
  bool small_sample = false;  // T < 20 (r + 2 r^2)
  std::vector<double> trajectory;
};

struct FitResult {
  GarchParams theta;
  FitDiagnostics diagnostics;
};

/// Quasi-maximum-likelihood fit of theta on squared factors (T x r).
FitResult qmle_fit(const Matrix& fsq, const FitConfig& config = {});

/// Largest singular value.
double spectral_norm(const Matrix& m);

}  // namespace pgarch
