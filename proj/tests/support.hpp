#pragma once

#include <cstdlib>
#include <filesystem>
#include <random>
#include <string>

#include "pgarch/fgarch.hpp"
#include "pgarch/types.hpp"

namespace testing {

inline std::filesystem::path scratch_dir(const std::string& name) {
  const char* env = std::getenv("PGARCH_TEST_TMP");
  std::filesystem::path base = env ? env : std::filesystem::temp_directory_path() / "pgarch_tests";
  auto dir = base / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline pgarch::Matrix gaussian(pgarch::Index rows, pgarch::Index cols, std::uint64_t seed, double sd = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, sd);
  pgarch::Matrix m(rows, cols);
  for (pgarch::Index j = 0; j < cols; ++j)
    for (pgarch::Index i = 0; i < rows; ++i) m(i, j) = n(rng);
  return m;
}

/// Squared factors from the recursion itself: f_t = sqrt(h_t) z_t.
inline pgarch::Matrix simulate_fsq(const pgarch::GarchParams& theta, pgarch::Index T, std::uint64_t seed) {
  const pgarch::Matrix z = gaussian(T, theta.rank(), seed);
  pgarch::Matrix fsq(T, theta.rank());
  pgarch::Vector h = pgarch::h_init(theta);
  for (pgarch::Index t = 0; t < T; ++t) {
    const pgarch::Vector f = h.cwiseSqrt().cwiseProduct(z.row(t).transpose());
    fsq.row(t) = f.cwiseAbs2().transpose();
    h = pgarch::advance_h(theta, fsq.row(t).transpose(), h);
  }
  return fsq;
}

}  // namespace testing
