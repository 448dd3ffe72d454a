#pragma once

#include "pgarch/types.hpp"

namespace pgarch {

/// Sample covariance X'X / T of an already centred T x p matrix.
template <typename Derived>
MatrixX<typename Derived::Scalar> sample_cov(const Eigen::MatrixBase<Derived>& centered) {
  using Scalar = typename Derived::Scalar;
  if (centered.rows() < 2) {
    throw std::invalid_argument("sample_cov: need at least 2 rows, got " +
                                std::to_string(centered.rows()));
  }
  MatrixX<Scalar> s = MatrixX<Scalar>::Zero(centered.cols(), centered.cols());
  s.template selfadjointView<Eigen::Lower>().rankUpdate(centered.transpose(),
                                                       Scalar(1) / Scalar(centered.rows()));
  s.template triangularView<Eigen::StrictlyUpper>() = s.transpose();
  return s;
}

/// Eigenpairs in descending eigenvalue order; columns of `vectors` are
/// orthonormal and sign-normalized (see normalize_signs).
struct EigenSystem {
  Vector values;
  Matrix vectors;
};

/// Symmetric eigendecomposition. Throws std::invalid_argument when S is not
/// symmetric to 1e-10 relative, NumericalError when the solver fails.
EigenSystem eigh(const Matrix& s);

/// Flips columns so each has a nonnegative sum; a column summing to zero gets
/// its first nonzero entry positive.
void normalize_signs(Matrix& columns);

struct FactorDecomposition {
  Matrix loadings;      // p x r, loadings' loadings = p I
  Vector eigvals;       // r leading eigenvalues, nonincreasing
  Matrix factors;       // T x r, empty until extract_factors
  Matrix residual_cov;  // p x p, sum of the non-pervasive eigen-components
  int rank = 0;

  Index assets() const { return loadings.rows(); }
  /// Mean factor variance estimate p^{-1} (lambda_1, ..., lambda_r).
  Vector mean_factor_vol() const { return eigvals / static_cast<double>(assets()); }
};

/// POET split of S into the top-r principal components and the remainder.
/// Requires 1 <= r < p.
FactorDecomposition poet_decompose(const Matrix& s, int rank);
FactorDecomposition poet_decompose(const EigenSystem& eig, int rank);

/// f_t = p^{-1} V' (y_t - ybar) for every row of the centred matrix.
Matrix extract_factors(const FactorDecomposition& decomp, const Matrix& centered);

struct RankCriterion {
  int r_max = 10;
  double c1 = 1.0;
  double c2 = 0.5;
};

/// Penalized eigenvalue-ratio rank selector. Evaluates
///   g(j) = lambda_j / p + j * c1 * (sqrt(log p / T) + log p / p)^c2
/// for j = 1..r_max+1 (capped at p) and returns argmin_j g(j) - 1, clamped to
/// [1, r_max]. Ties go to the smaller j.
int estimate_rank(const Matrix& s, int periods, const RankCriterion& criterion = {});

}  // namespace pgarch
