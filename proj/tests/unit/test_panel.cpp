#include <doctest.h>

#include <fstream>

#include "pgarch/panel.hpp"
#include "support.hpp"

using namespace pgarch;

namespace {

ReturnPanel small_panel() {
  Matrix r{{0.01, -0.02}, {0.03, 0.00}, {-0.01, 0.02}};
  return make_panel(r, {"AAA", "BBB"}, {"2020-01-01", "2020-01-02", "2020-01-03"});
}

}  // namespace

TEST_CASE("make_panel validates shape and identifiers") {
  const ReturnPanel p = small_panel();
  CHECK(p.periods() == 3);
  CHECK(p.assets() == 2);
  CHECK(p.find_asset("BBB") == 1);
  CHECK(p.find_asset("ZZZ") == -1);

  CHECK_THROWS_AS(make_panel(Matrix(1, 2), {"a", "b"}, {"1"}), DataError);
  CHECK_THROWS_AS(make_panel(Matrix::Zero(2, 2), {"a", "a"}, {"1", "2"}), DataError);
  CHECK_THROWS_AS(make_panel(Matrix::Zero(2, 2), {"a", "b"}, {"2", "1"}), DataError);
  Matrix bad = Matrix::Zero(2, 2);
  bad(0, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(make_panel(bad, {"a", "b"}, {"1", "2"}), DataError);
}

TEST_CASE("load_panel drops assets with missing cells and reports them") {
  const auto dir = testing::scratch_dir("panel_load");
  {
    std::ofstream out(dir / "p.csv");
    out << "date,A,B,C\n2020-01-01,0.01,NA,0.5\n2020-01-02,0.02,0.1,\n2020-01-03,-0.01,0.2,0.4\n";
  }
  const LoadedPanel lp = load_panel(dir / "p.csv");
  CHECK(lp.panel.assets() == 1);
  CHECK(lp.panel.asset_ids == std::vector<std::string>{"A"});
  CHECK(lp.dropped == std::vector<std::string>{"B", "C"});
  CHECK(lp.panel.returns(2, 0) == doctest::Approx(-0.01));
}

TEST_CASE("load_panel rejects ragged rows and garbage cells") {
  const auto dir = testing::scratch_dir("panel_bad");
  {
    std::ofstream out(dir / "ragged.csv");
    out << "date,A,B\n1,0.1,0.2\n2,0.3\n";
    std::ofstream out2(dir / "junk.csv");
    out2 << "date,A\n1,0.1\n2,abc\n";
  }
  CHECK_THROWS_AS(load_panel(dir / "ragged.csv"), DataError);
  CHECK_THROWS_AS(load_panel(dir / "junk.csv"), DataError);
  CHECK_THROWS_AS(load_panel(dir / "missing.csv"), DataError);
}

TEST_CASE("write_panel round-trips exactly") {
  const auto dir = testing::scratch_dir("panel_rt");
  const Matrix r = testing::gaussian(20, 4, 3, 0.02);
  const ReturnPanel p = make_panel(r, {"w", "x", "y", "z"}, [] {
    std::vector<std::string> ts;
    for (int i = 0; i < 20; ++i) ts.push_back(std::to_string(1000 + i));
    return ts;
  }());
  write_panel(p, dir / "rt.csv");
  const LoadedPanel back = load_panel(dir / "rt.csv");
  CHECK(back.dropped.empty());
  CHECK(back.panel.returns == p.returns);
  CHECK(back.panel.timestamps == p.timestamps);
}

TEST_CASE("load_groups maps labels onto panel order") {
  const auto dir = testing::scratch_dir("panel_groups");
  {
    std::ofstream out(dir / "g.csv");
    out << "asset_id,group\nB,tech\nA,energy\n";
  }
  const auto g = load_groups(dir / "g.csv", {"A", "B"});
  CHECK(g == std::vector<std::string>{"energy", "tech"});
  CHECK_THROWS_AS(load_groups(dir / "g.csv", {"A", "C"}), DataError);
}

TEST_CASE("demean, slices and portfolios") {
  const ReturnPanel p = small_panel();
  auto [c, mean] = demean(p);
  CHECK(mean(0) == doctest::Approx(0.01));
  CHECK(c.colwise().sum().cwiseAbs().maxCoeff() < 1e-15);

  const ReturnPanel s = slice_rows(p, 1, 2);
  CHECK(s.periods() == 2);
  CHECK(s.timestamps.front() == "2020-01-02");
  CHECK_THROWS(slice_rows(p, 2, 5));
  const ReturnPanel one = select_assets(p, {1});
  CHECK(one.asset_ids.front() == "BBB");

  const Portfolio w = Portfolio::equal_weight(2);
  CHECK(w.gross_exposure() == doctest::Approx(1.0));
  const Vector r = portfolio_returns(p, w);
  CHECK(r(0) == doctest::Approx(-0.005));
  CHECK_THROWS_AS(portfolio_returns(p, Portfolio::equal_weight(3)), std::invalid_argument);
  CHECK_THROWS_AS(Portfolio(Vector::Zero(3)), std::invalid_argument);
}
