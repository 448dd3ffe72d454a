#include "pgarch/shrink.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

namespace pgarch {

ThresholdMode parse_threshold_mode(const std::string& name) {
  if (name == "soft") return ThresholdMode::soft;
  if (name == "hard") return ThresholdMode::hard;
  if (name == "sector" || name == "sector_block") return ThresholdMode::sector_block;
  throw std::invalid_argument("unknown threshold mode '" + name + "'");
}

std::string to_string(ThresholdMode mode) {
  switch (mode) {
    case ThresholdMode::soft: return "soft";
    case ThresholdMode::hard: return "hard";
    case ThresholdMode::sector_block: return "sector_block";
  }
  return "unknown";
}

void ThresholdSpec::validate() const {
  if (!(c_tau > 0.0)) throw std::invalid_argument("ThresholdSpec: c_tau must be positive");
  if (!(s_p >= 0.0)) throw std::invalid_argument("ThresholdSpec: s_p must be nonnegative");
  if (mode == ThresholdMode::sector_block && groups.empty()) {
    throw std::invalid_argument("ThresholdSpec: sector_block needs group labels");
  }
}

double threshold_level(const ThresholdSpec& spec, Index p, Index periods) {
  spec.validate();
  if (p < 2 || periods < 2) throw std::invalid_argument("threshold_level: need p >= 2 and T >= 2");
  const double pd = static_cast<double>(p);
  return spec.c_tau * (std::sqrt(std::log(pd) / static_cast<double>(periods)) + std::sqrt(spec.s_p / pd));
}

Matrix apply_threshold(const Matrix& sigma_u, double tau, const ThresholdSpec& spec) {
  spec.validate();
  const Index p = sigma_u.rows();
  if (sigma_u.cols() != p) throw std::invalid_argument("apply_threshold: matrix is not square");
  const double scale = std::max(1.0, sigma_u.cwiseAbs().maxCoeff());
  if ((sigma_u - sigma_u.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
    throw std::invalid_argument("apply_threshold: matrix is not symmetric");
  }
  if (spec.mode == ThresholdMode::sector_block && static_cast<Index>(spec.groups.size()) != p) {
    throw std::invalid_argument("apply_threshold: group labels do not match dimension");
  }

  const double mean_diag = sigma_u.trace() / static_cast<double>(p);
  const double floor = 1e-10 * (mean_diag > 0.0 ? mean_diag : 1.0);
  const Vector diag = sigma_u.diagonal().cwiseMax(floor);
  const Vector sd = diag.cwiseSqrt();

  Matrix out = Matrix::Zero(p, p);
  out.diagonal() = diag;
  for (Index j = 0; j < p; ++j) {
    for (Index i = j + 1; i < p; ++i) {
      const double x = sigma_u(i, j);
      double kept = 0.0;
      if (spec.mode == ThresholdMode::sector_block) {
        if (spec.groups[static_cast<std::size_t>(i)] == spec.groups[static_cast<std::size_t>(j)]) kept = x;
      } else {
        const double cut = tau * sd(i) * sd(j);
        if (std::abs(x) >= cut) kept = spec.mode == ThresholdMode::soft ? soft_threshold(x, cut) : x;
      }
      out(i, j) = kept;
      out(j, i) = kept;
    }
  }
  return out;
}

Matrix psd_repair(const Matrix& m, std::optional<double> floor) {
  if (m.rows() != m.cols()) throw std::invalid_argument("psd_repair: matrix is not square");
  if (m.size() == 0) return m;
  const Matrix sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(sym);
  if (solver.info() != Eigen::Success) throw NumericalError("psd_repair: eigensolver failed");
  const Vector& values = solver.eigenvalues();
  const double cut = floor.value_or(1e-8 * values.cwiseAbs().maxCoeff());
  if (values.minCoeff() >= cut) return sym;
  const Vector clipped = values.cwiseMax(cut);
  const Matrix& q = solver.eigenvectors();
  Matrix out = q * clipped.asDiagonal() * q.transpose();
  return 0.5 * (out + out.transpose());
}

}  // namespace pgarch
