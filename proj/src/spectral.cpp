#include "pgarch/spectral.hpp"

#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

namespace pgarch {

EigenSystem eigh(const Matrix& s) {
  if (s.rows() != s.cols()) throw std::invalid_argument("eigh: matrix is not square");
  if (!s.allFinite()) throw std::invalid_argument("eigh: matrix has non-finite entries");
  const double scale = std::max(1.0, s.cwiseAbs().maxCoeff());
  if ((s - s.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
    throw std::invalid_argument("eigh: matrix is not symmetric");
  }

  Eigen::SelfAdjointEigenSolver<Matrix> solver(s);
  if (solver.info() != Eigen::Success) throw NumericalError("eigh: eigensolver did not converge");

  // Eigen returns ascending order.
  EigenSystem out{solver.eigenvalues().reverse(), solver.eigenvectors().rowwise().reverse()};
  normalize_signs(out.vectors);
  return out;
}

void normalize_signs(Matrix& columns) {
  for (Index j = 0; j < columns.cols(); ++j) {
    auto col = columns.col(j);
    const double sum = col.sum();
    const double tol = 1e-12 * std::max(1.0, col.cwiseAbs().sum());
    bool flip = false;
    if (std::abs(sum) > tol) {
      flip = sum < 0.0;
    } else {
      for (Index i = 0; i < col.size(); ++i) {
        if (std::abs(col(i)) > 1e-14) {
          flip = col(i) < 0.0;
          break;
        }
      }
    }
    if (flip) col = -col;
  }
}

FactorDecomposition poet_decompose(const EigenSystem& eig, int rank) {
  const Index p = eig.vectors.rows();
  if (rank < 1 || rank >= p) {
    throw std::invalid_argument("poet_decompose: rank " + std::to_string(rank) +
                                " outside [1, " + std::to_string(p - 1) + "]");
  }
  FactorDecomposition d;
  d.rank = rank;
  d.eigvals = eig.values.head(rank);
  d.loadings = std::sqrt(static_cast<double>(p)) * eig.vectors.leftCols(rank);
  const auto tail = eig.vectors.rightCols(p - rank);
  d.residual_cov = tail * eig.values.tail(p - rank).asDiagonal() * tail.transpose();
  d.residual_cov = 0.5 * (d.residual_cov + d.residual_cov.transpose()).eval();
  return d;
}

FactorDecomposition poet_decompose(const Matrix& s, int rank) {
  if (rank < 1 || rank >= s.rows()) {
    throw std::invalid_argument("poet_decompose: rank " + std::to_string(rank) +
                                " outside [1, " + std::to_string(s.rows() - 1) + "]");
  }
  return poet_decompose(eigh(s), rank);
}

Matrix extract_factors(const FactorDecomposition& decomp, const Matrix& centered) {
  if (centered.cols() != decomp.assets()) {
    throw std::invalid_argument("extract_factors: panel has " + std::to_string(centered.cols()) +
                                " assets, loadings have " + std::to_string(decomp.assets()));
  }
  return centered * decomp.loadings / static_cast<double>(decomp.assets());
}

int estimate_rank(const Matrix& s, int periods, const RankCriterion& criterion) {
  const Index p = s.rows();
  if (criterion.r_max < 1 || criterion.r_max >= p) {
    throw std::invalid_argument("estimate_rank: r_max must lie in [1, p)");
  }
  if (!(criterion.c1 > 0.0) || !(criterion.c2 > 0.0) || criterion.c2 > 1.0) {
    throw std::invalid_argument("estimate_rank: need c1 > 0 and 0 < c2 <= 1");
  }
  if (periods < 2) throw std::invalid_argument("estimate_rank: need T >= 2");

  const EigenSystem eig = eigh(s);
  if (eig.values.cwiseAbs().maxCoeff() <= 0.0) {
    throw NumericalError("estimate_rank: covariance has no nonzero eigenvalue");
  }
  const double pd = static_cast<double>(p);
  const double log_p = std::log(pd);
  const double penalty =
      criterion.c1 * std::pow(std::sqrt(log_p / periods) + log_p / pd, criterion.c2);

  const Index j_max = std::min<Index>(criterion.r_max + 1, p);
  Index best = 1;
  double best_value = eig.values(0) / pd + penalty;
  for (Index j = 2; j <= j_max; ++j) {
    const double value = eig.values(j - 1) / pd + static_cast<double>(j) * penalty;
    if (value < best_value) {
      best_value = value;
      best = j;
    }
  }
  return static_cast<int>(std::clamp<Index>(best - 1, 1, criterion.r_max));
}

}  // namespace pgarch
