#include "pgarch/panel.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>
#include <unordered_map>

namespace pgarch {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n\"");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n\"");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) cells.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

bool is_missing(const std::string& cell) {
  return cell.empty() || cell == "NA" || cell == "NaN" || cell == "nan" || cell == "null";
}

double parse_number(const std::string& cell, std::size_t line_no) {
  double value = 0.0;
  const char* begin = cell.data();
  const char* end = cell.data() + cell.size();
  if (*begin == '+') ++begin;
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end || !std::isfinite(value)) {
    throw DataError("load_panel: line " + std::to_string(line_no) + ": cannot parse '" + cell +
                    "' as a number");
  }
  return value;
}

}  // namespace

Index ReturnPanel::find_asset(const std::string& id) const {
  auto it = std::find(asset_ids.begin(), asset_ids.end(), id);
  return it == asset_ids.end() ? -1 : static_cast<Index>(it - asset_ids.begin());
}

ReturnPanel make_panel(Matrix returns, std::vector<std::string> asset_ids,
                       std::vector<std::string> timestamps,
                       std::optional<std::vector<std::string>> groups) {
  if (returns.rows() < 2) {
    throw DataError("panel needs at least 2 complete rows, got " + std::to_string(returns.rows()));
  }
  if (returns.cols() < 1) throw DataError("panel needs at least one asset");
  if (static_cast<Index>(asset_ids.size()) != returns.cols()) {
    throw DataError("panel: asset id count does not match column count");
  }
  if (static_cast<Index>(timestamps.size()) != returns.rows()) {
    throw DataError("panel: timestamp count does not match row count");
  }
  if (!returns.allFinite()) throw DataError("panel: returns contain non-finite values");
  std::set<std::string> seen;
  for (const auto& id : asset_ids) {
    if (!seen.insert(id).second) throw DataError("panel: duplicate asset id '" + id + "'");
  }
  for (std::size_t t = 1; t < timestamps.size(); ++t) {
    if (!(timestamps[t - 1] < timestamps[t])) {
      throw DataError("panel: timestamps not strictly increasing at '" + timestamps[t] + "'");
    }
  }
  if (groups && static_cast<Index>(groups->size()) != returns.cols()) {
    throw DataError("panel: group label count does not match column count");
  }
  return ReturnPanel{std::move(returns), std::move(asset_ids), std::move(timestamps),
                     std::move(groups)};
}

ReturnPanel slice_rows(const ReturnPanel& panel, Index first, Index count) {
  if (first < 0 || count < 0 || first + count > panel.periods()) {
    throw std::out_of_range("slice_rows: range outside panel");
  }
  ReturnPanel out;
  out.returns = panel.returns.middleRows(first, count);
  out.asset_ids = panel.asset_ids;
  out.timestamps.assign(panel.timestamps.begin() + first, panel.timestamps.begin() + first + count);
  out.groups = panel.groups;
  return out;
}

ReturnPanel select_assets(const ReturnPanel& panel, const std::vector<Index>& columns) {
  ReturnPanel out;
  out.returns.resize(panel.periods(), static_cast<Index>(columns.size()));
  std::vector<std::string> groups;
  for (std::size_t j = 0; j < columns.size(); ++j) {
    const Index c = columns[j];
    if (c < 0 || c >= panel.assets()) throw std::out_of_range("select_assets: bad column");
    out.returns.col(static_cast<Index>(j)) = panel.returns.col(c);
    out.asset_ids.push_back(panel.asset_ids[c]);
    if (panel.groups) groups.push_back((*panel.groups)[c]);
  }
  out.timestamps = panel.timestamps;
  if (panel.groups) out.groups = std::move(groups);
  return out;
}

LoadedPanel load_panel(const std::filesystem::path& path, PanelFormat /*format*/) {
  std::ifstream in(path);
  if (!in) throw DataError("load_panel: cannot open " + path.string());

  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (!trim(line).empty()) {
      header = split_csv_line(line);
      break;
    }
  }
  if (header.size() < 2) throw DataError("load_panel: header needs a date column and at least one asset");

  const std::size_t p = header.size() - 1;
  std::vector<std::string> ids(header.begin() + 1, header.end());
  {
    std::set<std::string> seen;
    for (const auto& id : ids) {
      if (id.empty()) throw DataError("load_panel: empty asset id in header");
      if (!seen.insert(id).second) throw DataError("load_panel: duplicate asset id '" + id + "'");
    }
  }

  std::vector<std::string> dates;
  std::vector<std::vector<double>> rows;
  std::vector<bool> missing(p, false);
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto cells = split_csv_line(line);
    if (cells.size() != header.size()) {
      throw DataError("load_panel: line " + std::to_string(line_no) + " has " +
                      std::to_string(cells.size()) + " cells, expected " +
                      std::to_string(header.size()));
    }
    dates.push_back(cells[0]);
    std::vector<double> row(p, 0.0);
    for (std::size_t j = 0; j < p; ++j) {
      if (is_missing(cells[j + 1])) {
        missing[j] = true;
      } else {
        row[j] = parse_number(cells[j + 1], line_no);
      }
    }
    rows.push_back(std::move(row));
  }

  LoadedPanel result;
  std::vector<std::size_t> keep;
  for (std::size_t j = 0; j < p; ++j) {
    if (missing[j]) {
      result.dropped.push_back(ids[j]);
    } else {
      keep.push_back(j);
    }
  }
  if (keep.empty()) throw DataError("load_panel: every asset has missing data");

  Matrix returns(static_cast<Index>(rows.size()), static_cast<Index>(keep.size()));
  for (std::size_t t = 0; t < rows.size(); ++t) {
    for (std::size_t k = 0; k < keep.size(); ++k) {
      returns(static_cast<Index>(t), static_cast<Index>(k)) = rows[t][keep[k]];
    }
  }
  std::vector<std::string> kept_ids;
  for (auto j : keep) kept_ids.push_back(ids[j]);
  result.panel = make_panel(std::move(returns), std::move(kept_ids), std::move(dates));
  return result;
}

void write_panel(const ReturnPanel& panel, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("write_panel: cannot open " + path.string());
  out << "date";
  for (const auto& id : panel.asset_ids) out << ',' << id;
  out << '\n' << std::setprecision(17);
  for (Index t = 0; t < panel.periods(); ++t) {
    out << panel.timestamps[static_cast<std::size_t>(t)];
    for (Index j = 0; j < panel.assets(); ++j) out << ',' << panel.returns(t, j);
    out << '\n';
  }
}

std::vector<std::string> load_groups(const std::filesystem::path& path,
                                     const std::vector<std::string>& asset_ids) {
  std::ifstream in(path);
  if (!in) throw DataError("load_groups: cannot open " + path.string());
  std::unordered_map<std::string, std::string> lookup;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    auto cells = split_csv_line(line);
    if (cells.size() != 2) throw DataError("load_groups: expected two columns 'asset_id,group'");
    if (first && cells[0] == "asset_id") {
      first = false;
      continue;
    }
    first = false;
    lookup[cells[0]] = cells[1];
  }
  std::vector<std::string> groups;
  groups.reserve(asset_ids.size());
  for (const auto& id : asset_ids) {
    auto it = lookup.find(id);
    if (it == lookup.end()) throw DataError("load_groups: no group for asset '" + id + "'");
    groups.push_back(it->second);
  }
  return groups;
}

std::pair<Matrix, Vector> demean(const Matrix& returns) {
  Vector mean = returns.colwise().mean();
  Matrix centered = returns.rowwise() - mean.transpose();
  return {std::move(centered), std::move(mean)};
}

Portfolio::Portfolio(Vector weights) : weights_(std::move(weights)) {
  if (weights_.size() == 0) throw std::invalid_argument("Portfolio: empty weight vector");
  if (!weights_.allFinite()) throw std::invalid_argument("Portfolio: non-finite weight");
  if ((weights_.array() == 0.0).all()) throw std::invalid_argument("Portfolio: all weights are zero");
}

Portfolio Portfolio::equal_weight(Index size) {
  if (size < 1) throw std::invalid_argument("Portfolio::equal_weight: size must be positive");
  return Portfolio(Vector::Constant(size, 1.0 / static_cast<double>(size)));
}

Vector portfolio_returns(const Matrix& returns, const Portfolio& w) {
  if (returns.cols() != w.size()) {
    throw std::invalid_argument("portfolio_returns: " + std::to_string(w.size()) +
                                " weights for " + std::to_string(returns.cols()) + " assets");
  }
  return returns * w.weights();
}

}  // namespace pgarch
