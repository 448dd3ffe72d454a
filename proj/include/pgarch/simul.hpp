#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "pgarch/fgarch.hpp"
#include "pgarch/forecast.hpp"
#include "pgarch/panel.hpp"
#include "pgarch/types.hpp"

namespace pgarch {

/// SplitMix64 mix of (seed, stream); distinct streams give independent
/// mt19937_64 seeds, so replications can run in any order.
std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream);
std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream);

/// The r = 3 parameters used throughout the simulation study.
GarchParams default_theta0();

/// Sigma_u(i, j) = scale * decay^|i - j|.
Matrix banded_idio_cov(Index p, double scale = 0.01, double decay = 0.5);

struct DgpSpec {
  Index p = 100;
  Index T = 500;
  GarchParams theta0 = default_theta0();
  double idio_scale = 0.01;
  double idio_decay = 0.5;
  std::optional<std::uint64_t> loading_seed;  // fixes V across replications
  Index burn_in = 0;

  int rank() const { return theta0.rank(); }
  void validate() const;
};

struct SimTruth {
  Matrix loadings;  // p x r, loadings' loadings = p I
  Matrix factors;   // T x r
  Matrix h;         // T x r
  Vector h_next;    // r, variance for period T + 1
  Matrix sigma_u;

  /// Sigma_t = V diag(h_t) V' + Sigma_u (0-based t).
  Matrix sigma_at(Index t) const;
  Matrix sigma_next() const;
};

struct Simulated {
  ReturnPanel panel;
  SimTruth truth;
};

/// Draws loadings from the top-r right singular vectors of a T x p Unif(0,1)
/// matrix, then y_t = V f_t + u_t with f_t ~ N(0, diag(h_t)), u_t ~ N(0, Sigma_u).
class Dgp {
 public:
  explicit Dgp(DgpSpec spec);
  const DgpSpec& spec() const { return spec_; }
  Matrix draw_loadings(std::uint64_t seed) const;
  Simulated draw(std::uint64_t seed) const;
  /// Same, with `periods` rows instead of spec().T.
  Simulated draw(std::uint64_t seed, Index periods) const;

 private:
  DgpSpec spec_;
  Matrix sigma_u_;
  Matrix chol_;  // lower Cholesky factor of sigma_u_
};

inline Simulated generate(const DgpSpec& spec, std::uint64_t seed) { return Dgp(spec).draw(seed); }

enum class MetricKind { frobenius, spectral, max, rel_frobenius, theta_mae, var_mae };

MetricKind parse_metric_kind(const std::string& name);
std::string to_string(MetricKind kind);

/// Norm of est - truth; rel_frobenius is p^{-1} ||truth^{-1/2} (est - truth) truth^{-1/2}||_F^2.
double matrix_error(MetricKind kind, const Matrix& est, const Matrix& truth);

struct ReplicationConfig {
  std::vector<std::string> models{"pgarch"};
  std::vector<MetricKind> metrics{MetricKind::frobenius, MetricKind::spectral, MetricKind::max,
                                  MetricKind::rel_frobenius};
  Index portfolio_size = 0;  // 0: whole panel; s > 0: random equal-weight s-asset portfolio
  std::vector<QuantileRule> var_rules{QuantileRule{}};
  PgarchOptions pgarch;
  FitConfig bench_fit;
  std::uint64_t seed = 1;
  int threads = 0;  // 0: hardware concurrency
};

struct MetricRow {
  Index p = 0;
  Index T = 0;
  std::string model;
  std::string metric;
  double mean = 0.0;
  double sd = 0.0;
  int n_reps = 0;
  int failures = 0;
};

struct MetricTable {
  std::vector<MetricRow> rows;

  const MetricRow* find(const std::string& model, const std::string& metric) const;
  std::string to_csv() const;
  void write_csv(const std::filesystem::path& path) const;
};

/// Names of the theta MAE metrics: mae_omega_i, mae_A_ij, mae_B_ij (1-based).
std::vector<std::string> theta_metric_names(int rank);

std::string var_metric_name(const QuantileRule& rule);

/// Monte Carlo over n_reps independent draws. Model failures are counted in
/// MetricRow::failures and excluded from the moments.
MetricTable run_replications(const DgpSpec& spec, int n_reps, const ReplicationConfig& config);

}  // namespace pgarch
