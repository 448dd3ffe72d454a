#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pgarch/types.hpp"

namespace pgarch {

enum class ThresholdMode { soft, hard, sector_block };

ThresholdMode parse_threshold_mode(const std::string& name);
std::string to_string(ThresholdMode mode);

struct ThresholdSpec {
  double c_tau = 1.0;
  double s_p = 1.0;
  ThresholdMode mode = ThresholdMode::soft;
  std::vector<std::string> groups;  // one label per asset, sector_block only
  bool repair_psd = true;

  /// Throws std::invalid_argument unless c_tau > 0, s_p >= 0 and sector mode
  /// carries labels.
  void validate() const;
};

/// tau_T = c_tau (sqrt(log p / T) + sqrt(s_p / p)).
double threshold_level(const ThresholdSpec& spec, Index p, Index periods);

/// Correlation-scaled thresholding of an idiosyncratic covariance. The
/// diagonal is kept; an off-diagonal entry survives iff
/// |s_ij| >= tau sqrt(s_ii s_jj) and is then shrunk (soft) or kept (hard).
/// sector_block ignores tau: within-group entries are kept, the rest zeroed.
/// Diagonal entries <= 0 are floored at 1e-10 trace/p first.
Matrix apply_threshold(const Matrix& sigma_u, double tau, const ThresholdSpec& spec);

/// Clips eigenvalues at `floor` (default 1e-8 times the largest |eigenvalue|)
/// and reassembles the matrix.
Matrix psd_repair(const Matrix& m, std::optional<double> floor = std::nullopt);

/// Soft-threshold scalar operator sign(x) max(|x| - t, 0).
template <typename Scalar>
Scalar soft_threshold(Scalar x, Scalar t) {
  const Scalar mag = std::abs(x) - t;
  if (mag <= Scalar(0)) return Scalar(0);
  return x > Scalar(0) ? mag : -mag;
}

}  // namespace pgarch
