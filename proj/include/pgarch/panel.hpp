#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pgarch/types.hpp"

namespace pgarch {

/// T x p panel of log returns. Immutable once built through make_panel or
/// load_panel; both enforce no missing values, T >= 2, p >= 1, unique asset
/// ids and strictly increasing timestamps.
struct ReturnPanel {
  Matrix returns;
  std::vector<std::string> asset_ids;
  std::vector<std::string> timestamps;
  std::optional<std::vector<std::string>> groups;

  Index periods() const { return returns.rows(); }
  Index assets() const { return returns.cols(); }

  /// Column position of an asset id, or -1.
  Index find_asset(const std::string& id) const;
};

ReturnPanel make_panel(Matrix returns, std::vector<std::string> asset_ids,
                       std::vector<std::string> timestamps,
                       std::optional<std::vector<std::string>> groups = std::nullopt);

/// Row range [first, first + count) as a new panel (used by rolling windows).
ReturnPanel slice_rows(const ReturnPanel& panel, Index first, Index count);

/// Column subset as a new panel.
ReturnPanel select_assets(const ReturnPanel& panel, const std::vector<Index>& columns);

struct LoadedPanel {
  ReturnPanel panel;
  std::vector<std::string> dropped;  // asset ids removed for missing cells
};

enum class PanelFormat { csv };

/// Wide CSV: `date,<id1>,<id2>,...`, one row per date. Blank, `NA` and `NaN`
/// cells are missing; any asset with a missing cell is dropped and reported.
LoadedPanel load_panel(const std::filesystem::path& path, PanelFormat format = PanelFormat::csv);

/// Writes the wide CSV layout with round-trip precision.
void write_panel(const ReturnPanel& panel, const std::filesystem::path& path);

/// Sidecar `asset_id,group` file. Returns one label per panel asset; assets
/// missing from the file raise DataError.
std::vector<std::string> load_groups(const std::filesystem::path& path,
                                     const std::vector<std::string>& asset_ids);

/// Column-centred returns and the per-asset sample mean.
std::pair<Matrix, Vector> demean(const Matrix& returns);
inline std::pair<Matrix, Vector> demean(const ReturnPanel& panel) { return demean(panel.returns); }

class Portfolio {
 public:
  explicit Portfolio(Vector weights);

  static Portfolio equal_weight(Index size);

  const Vector& weights() const { return weights_; }
  Index size() const { return weights_.size(); }
  double gross_exposure() const { return weights_.lpNorm<1>(); }

 private:
  Vector weights_;
};

/// r_t = w' y_t for every row of the panel.
Vector portfolio_returns(const Matrix& returns, const Portfolio& w);
inline Vector portfolio_returns(const ReturnPanel& panel, const Portfolio& w) {
  return portfolio_returns(panel.returns, w);
}

}  // namespace pgarch
