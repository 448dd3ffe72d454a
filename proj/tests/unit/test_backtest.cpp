#include <doctest.h>

#include <random>

#include "pgarch/backtest.hpp"

using namespace pgarch;

namespace {

Vector from(const std::vector<int>& v) {
  Vector out(static_cast<Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out(static_cast<Index>(i)) = v[i];
  return out;
}

std::vector<int> clustered() {
  std::vector<int> h(40, 0);
  h.insert(h.end(), {1, 1, 1});
  h.insert(h.end(), 30, 0);
  h.push_back(1);
  h.insert(h.end(), 26, 0);
  return h;
}

Vector bernoulli(Index n, double a, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution b(a);
  Vector h(n);
  for (Index i = 0; i < n; ++i) h(i) = b(rng) ? 1.0 : 0.0;
  return h;
}

}  // namespace

TEST_CASE("hit series follows the exceedance definition") {
  const Vector var = Vector::Constant(4, 0.02);
  const HitSeries all_above = hit_series(Vector::Constant(4, -0.01), var, 0.01);
  CHECK(all_above.hit_rate() == 0.0);
  const HitSeries all_below = hit_series(Vector::Constant(4, -0.02 - 1e-9), var, 0.01);
  CHECK(all_below.hit_rate() == 1.0);
  CHECK(hit_series(Vector::Constant(1, -0.02), Vector::Constant(1, 0.02), 0.01).count() == 0.0);
  CHECK_THROWS(hit_series(Vector::Zero(3), Vector::Zero(4), 0.01));
}

TEST_CASE("Kupiec LR against closed forms") {
  Vector h = Vector::Zero(250);
  h.head(5).setOnes();
  const TestResult r = lr_uc(h, 0.01);
  CHECK(r.stat == doctest::Approx(1.956809788230622).epsilon(1e-12));
  CHECK(r.p_value == doctest::Approx(0.1618549171960387).epsilon(1e-10));
  CHECK(lr_uc(Vector::Zero(250), 0.01).stat == doctest::Approx(5.025167926750726).epsilon(1e-12));
  Vector exact = Vector::Zero(1000);
  exact.head(20).setOnes();
  CHECK(lr_uc(exact, 0.02).stat == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(lr_uc(exact, 0.02).p_value == doctest::Approx(1.0));
  CHECK(std::isfinite(lr_uc(Vector::Ones(10), 0.01).stat));
}

TEST_CASE("Kupiec statistic grows with the coverage gap") {
  double prev = -1.0;
  for (int x : {10, 14, 18, 25, 40}) {
    Vector h = Vector::Zero(1000);
    h.head(x).setOnes();
    const double s = lr_uc(h, 0.01).stat;
    CHECK(s > prev);
    prev = s;
  }
}

TEST_CASE("Christoffersen LR against transition counts") {
  const Vector h = from(clustered());
  const TestResult ind = lr_ind(h);
  CHECK(ind.stat == doctest::Approx(8.561073633750002).epsilon(1e-12));
  const TestResult uc = lr_uc(h, 0.05);
  CHECK(uc.stat == doctest::Approx(0.22534116400704107).epsilon(1e-12));
  const TestResult cc = lr_cc(h, 0.05);
  CHECK(cc.stat == uc.stat + ind.stat);
  CHECK(cc.dof == 2);

  Vector alt(200);
  for (Index i = 0; i < 200; ++i) alt(i) = static_cast<double>(i % 2);
  CHECK(lr_ind(alt).stat == doctest::Approx(275.8675527160809).epsilon(1e-12));
  CHECK(lr_cc(alt, 0.5).p_value < 1e-10);

  const Vector zeros = Vector::Zero(100);
  CHECK(lr_ind(zeros).stat == 0.0);
  CHECK(lr_cc(zeros, 0.01).stat == lr_uc(zeros, 0.01).stat);
}

TEST_CASE("DQ test against a least-squares oracle") {
  const Vector h = from(clustered());
  Vector var(h.size());
  for (Index i = 0; i < var.size(); ++i) var(i) = 1.0 + 0.01 * static_cast<double>((i * 7) % 13);
  const TestResult hit = dq_test(h, var, 0.05, 2, DqVariant::dq_hit);
  CHECK(hit.stat == doctest::Approx(18.698220371071578).epsilon(1e-10));
  CHECK(hit.p_value == doctest::Approx(0.00031562491220904433).epsilon(1e-8));
  CHECK(hit.dof == 3);
  const TestResult v = dq_test(h, var, 0.05, 2, DqVariant::dq_var);
  CHECK(v.stat == doctest::Approx(18.830722366972036).epsilon(1e-10));
  CHECK(v.p_value == doctest::Approx(0.0008484669456963197).epsilon(1e-8));
  CHECK_THROWS(dq_test(h.head(4), var.head(4), 0.05, 2));
}

TEST_CASE("DQ drops a constant VaR column and flags it") {
  const Vector h = bernoulli(500, 0.05, 3);
  const Vector var = Vector::Constant(500, 0.03);
  const TestResult a = dq_test(h, var, 0.05, 4, DqVariant::dq_hit);
  const TestResult b = dq_test(h, var, 0.05, 4, DqVariant::dq_var);
  CHECK(b.stat == doctest::Approx(a.stat).epsilon(1e-10));
  CHECK(b.dof == a.dof);
  REQUIRE(b.flags.size() == 1);
  CHECK(b.flags.front() == "dropped:var");
}

TEST_CASE("tests have roughly nominal size under correct coverage") {
  int uc = 0, cc = 0, dq = 0;
  const int reps = 500;
  for (int rep = 0; rep < reps; ++rep) {
    const Vector h = bernoulli(4000, 0.01, 1000 + rep);
    const Vector var = Vector::Constant(4000, 1.0);
    uc += lr_uc(h, 0.01).p_value < 0.05;
    cc += lr_cc(h, 0.01).p_value < 0.05;
    dq += dq_test(h, var, 0.01, 4).p_value < 0.05;
  }
  CHECK(uc / double(reps) < 0.09);
  CHECK(cc / double(reps) < 0.09);
  CHECK(dq / double(reps) < 0.12);
  CHECK(uc > 0);
}

TEST_CASE("p-values stay in range and hit rate is near alpha") {
  const Vector h = bernoulli(4000, 0.01, 77);
  CHECK(std::abs(h.mean() - 0.01) < 3.0 * std::sqrt(0.01 * 0.99 / 4000));
  const HitSeries hs{h, 0.01, Vector::Constant(4000, 1.0), Vector::Zero(4000)};
  const BacktestSummary s = run_backtests(hs);
  for (const TestResult* t : {&s.uc, &s.cc, &s.dq_hit, &s.dq_var}) {
    CHECK(t->p_value >= 0.0);
    CHECK(t->p_value <= 1.0);
    CHECK(t->stat >= 0.0);
  }
}
