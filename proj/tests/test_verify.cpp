#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "fpwalk/approx.hpp"
#include "fpwalk/exact.hpp"
#include "fpwalk/ladder.hpp"
#include "fpwalk/verify.hpp"
#include "oracles.hpp"

using namespace fpwalk;

namespace {

VerifyGrid small_grid() {
  VerifyGrid g;
  g.n = {16, 32, 64, 128, 256};
  g.be_n = {1, 2, 4, 8, 16, 32, 64, 128, 256};
  g.u = {0, 1, 2, 3, 5, 10};
  return g;
}

const BoundReport& find(const std::vector<BoundReport>& v, const std::string& id) {
  const auto it = std::find_if(v.begin(), v.end(), [&](const BoundReport& r) { return r.bound_id == id; });
  if (it == v.end()) throw std::runtime_error("no report " + id);
  return *it;
}

TEST(VerifyGrid, ScaledStartPoints) {
  VerifyGrid g;
  const auto xs = g.x_values(4096);
  EXPECT_TRUE(std::find(xs.begin(), xs.end(), 8) != xs.end());
  EXPECT_TRUE(std::find(xs.begin(), xs.end(), 64) != xs.end());
  EXPECT_TRUE(std::is_sorted(xs.begin(), xs.end()));
  EXPECT_EQ(g.n_max(), 4096);
}

TEST(FitRate, RecoversPowerLaw) {
  std::vector<std::int64_t> n{64, 128, 256, 512, 1024, 2048};
  std::vector<double> e;
  for (auto v : n) e.push_back(3.0 / static_cast<double>(v));
  const auto f = fit_rate(n, e);
  EXPECT_NEAR(f.slope, -1.0, 1e-12);
  EXPECT_NEAR(f.intercept, std::log(3.0), 1e-12);
  EXPECT_NEAR(f.r2, 1.0, 1e-12);
  EXPECT_EQ(f.n_min, 64);
  EXPECT_EQ(f.n_max, 2048);
  EXPECT_EQ(f.points, 6u);
}

TEST(Workbench, RecordsMatchEngine) {
  Workbench wb(walks::lazy(), small_grid());
  EXPECT_NEAR(wb.sigma(), std::sqrt(0.5), 1e-15);
  const auto& rec = wb.walk(2);
  EXPECT_NEAR(rec.live[100], survival_prob(walks::lazy(), 2, 100), 1e-13);
  const auto t = survival_evolve(walks::lazy(), 2, 64);
  for (std::int64_t w = 1; w <= 40; ++w) EXPECT_NEAR(rec.rows.at(64).at(w), t.at(64, w), 1e-14);
  EXPECT_NEAR(wb.stats(5).overshoot1, ladder_stats(walks::lazy(), 5).overshoot1, 1e-15);
  EXPECT_THROW((void)wb.walk(12345), std::out_of_range);
}

TEST(ClassicalBE, OneStepSimpleWalk) {
  auto g = small_grid();
  g.be_n = {1};
  Workbench wb(walks::ssrw(), g);
  const auto r = check_classical_be(wb);
  EXPECT_NEAR(r.max_ratio, static_cast<double>(oracle::normal_cdf(1.0L)) - 0.5, 1e-14);
  EXPECT_TRUE(r.holds);
}

TEST(Mogulskii, LazyWalkAtZero) {
  Workbench wb(walks::lazy(), small_grid());
  const auto r = check_mogulskii(wb);
  ASSERT_FALSE(r.rows.empty());
  EXPECT_EQ(r.rows.front().x, 0);
  EXPECT_NEAR(r.rows.front().lhs, 0.25, 1e-13);
  EXPECT_TRUE(r.holds);
}

TEST(Concentration, DegenerateWindowIsPointMass) {
  Workbench wb(walks::ssrw(), small_grid());
  const auto r = check_concentration(wb);
  for (const auto& row : r.rows) {
    if (row.z != 0.0) continue;
    const auto& pmf = wb.free(row.n);
    double atom = 0.0;
    for (double v : pmf.mass) atom = std::max(atom, v);
    EXPECT_NEAR(row.lhs, atom, 1e-15);
  }
  EXPECT_TRUE(r.holds);
}

TEST(ExplicitBounds, HoldOnBuiltinWalks) {
  for (const auto& d : {walks::ssrw(), walks::lazy(), walks::skew_m1_0_2()}) {
    Workbench wb(d, small_grid());
    const auto reports = check_explicit_bounds(wb);
    EXPECT_EQ(reports.size(), d == walks::skew_m1_0_2() ? 8u : 7u);
    for (const auto& r : reports) {
      EXPECT_TRUE(r.holds) << wb.name() << " " << r.bound_id << " " << r.max_ratio;
      EXPECT_GE(r.max_ratio, 0.0);
      EXPECT_GT(r.evaluated, 0u);
    }
  }
}

TEST(ExplicitBounds, HoldOnRandomWalks) {
  std::mt19937_64 rng(51);
  auto g = small_grid();
  g.n = {16, 32, 64, 128};
  g.be_n = {1, 4, 16, 64, 128};
  int checked = 0;
  while (checked < 12) {
    const auto d = oracle::random_walk(rng);
    std::int64_t gcd = 0;
    for (auto o : d.offsets()) gcd = std::gcd(gcd, o);
    if (gcd != 1) continue;
    ++checked;
    Workbench wb(d, g);
    for (const auto& r : check_explicit_bounds(wb)) EXPECT_TRUE(r.holds) << d.describe() << " " << r.bound_id << " " << r.max_ratio;
  }
}

TEST(LocalClt, OnlyForUnitVarianceSpanOne) {
  EXPECT_FALSE(check_local_clt_lattice(Workbench(walks::lazy(), small_grid())).has_value());
  EXPECT_FALSE(check_local_clt_lattice(Workbench(walks::ssrw(), small_grid())).has_value());
  const auto r = check_local_clt_lattice(Workbench(walks::skew_m1_0_2(), small_grid()));
  ASSERT_TRUE(r.has_value());
  EXPECT_NEAR(*r->constant, 76.0 / std::numbers::pi + 24.0 / (std::numbers::pi * peakedness_V(walks::skew_m1_0_2()).V), 1e-12);
  EXPECT_LT(r->max_ratio, *r->constant / 10.0);  // slack by a large factor
}

TEST(EstimatedConstants, MonotoneUnderGridRefinement) {
  auto coarse = small_grid();
  coarse.n = {16, 64, 256};
  coarse.x = {0, 2, 10};
  coarse.u = {0, 2, 10};
  const auto fine = small_grid();
  for (const auto& d : {walks::lazy(), walks::skew_m1_0_2()}) {
    const auto a = estimate_constants(Workbench(d, coarse));
    const auto b = estimate_constants(Workbench(d, fine));
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      EXPECT_EQ(a[i].bound_id, b[i].bound_id);
      EXPECT_LE(a[i].estimated_constant, b[i].estimated_constant * (1.0 + 1e-12)) << a[i].bound_id;
    }
  }
}

TEST(EstimatedConstants, ReportedWithoutExplicitConstant) {
  const auto est = estimate_constants(Workbench(walks::lazy(), small_grid()));
  for (const auto& r : est) {
    EXPECT_FALSE(r.constant.has_value()) << r.bound_id;
    EXPECT_TRUE(std::isfinite(r.estimated_constant)) << r.bound_id;
  }
  (void)find(est, "second_moment");
  (void)find(est, "third_moment");
}

TEST(SupTailError, PureReflectionAgainstDirectScan) {
  const auto t = survival_evolve(walks::ssrw(), 3, 100);
  FreePmf row;
  row.min_position = t.row_lo(100);
  row.mass.assign(t.row(100).begin(), t.row(100).end());
  double best = 0.0;
  for (std::int64_t y = 0; y <= 200; ++y)
    best = std::max(best, std::abs(tail_prob(walks::ssrw(), 3, static_cast<double>(y), 100) - reflection_term(3.0, static_cast<double>(y), 100.0, 1.0)));
  EXPECT_NEAR(sup_tail_error(row, 3.0, 100, 1.0, 0.0), best, 1e-14);
}

TEST(Thm1, CorrectionBeatsReflection) {
  auto g = small_grid();
  g.n = {64, 128, 256, 512, 1024};
  for (const auto& d : {walks::lazy(), walks::skew_m1_0_2()}) {
    const auto res = check_thm1(Workbench(d, g));
    ASSERT_EQ(res.curve.n.size(), 5u);
    for (std::size_t i = 0; i < res.curve.n.size(); ++i) EXPECT_LT(res.curve.corrected[i], res.curve.reflection[i]);
    EXPECT_GE(res.rate.slope, -1.3);
    EXPECT_LE(res.rate.slope, -0.7);
    EXPECT_TRUE(std::isfinite(res.report.estimated_constant));
  }
}

TEST(Improved, LazyWalkUsesInversePeakedness) {
  const auto res = check_improved(Workbench(walks::lazy(), small_grid()));
  EXPECT_NEAR(res.R, 2.0, 1e-9);
  EXPECT_TRUE(std::isfinite(res.envelope.estimated_constant));
  EXPECT_THROW((void)check_improved(Workbench(walks::ssrw(), small_grid())), std::domain_error);
}

TEST(Corollary, ConditionedLawAndSurvivalError) {
  const auto res = check_corollary(Workbench(walks::lazy(), small_grid()));
  EXPECT_GT(res.A2, 0.0);
  EXPECT_TRUE(std::isfinite(res.A3));
  EXPECT_FALSE(res.survival_error.empty());
  for (const auto& row : res.rayleigh.rows) {
    EXPECT_GE(row.lhs, 0.0);
    EXPECT_LE(row.lhs, 1.0);
  }
}

}  // namespace
