#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <stdexcept>

#include <gtest/gtest.h>

#include "fpwalk/increments.hpp"
#include "oracles.hpp"

using namespace fpwalk;

namespace {

constexpr double kPi = std::numbers::pi;

TEST(Moments, SimpleSymmetricWalk) {
  const auto m = moments(walks::ssrw());
  EXPECT_DOUBLE_EQ(m.mean, 0.0);
  EXPECT_DOUBLE_EQ(m.sigma2, 1.0);
  EXPECT_DOUBLE_EQ(m.beta3, 1.0);
  EXPECT_DOUBLE_EQ(m.lyapunov, 1.0);
}

TEST(Moments, LazyWalk) {
  const auto m = moments(walks::lazy());
  EXPECT_DOUBLE_EQ(m.sigma2, 0.5);
  EXPECT_DOUBLE_EQ(m.beta3, 0.5);
  EXPECT_NEAR(m.lyapunov, 0.5 / std::pow(0.5, 1.5), 1e-15);
}

TEST(Moments, SkewWalk) {
  const auto m = moments(walks::skew_m1_0_2());
  EXPECT_NEAR(m.sigma2, 1.0, 1e-15);
  EXPECT_NEAR(m.beta3, 5.0 / 3.0, 1e-15);
}

TEST(Moments, ContinuousFamilies) {
  const auto g = moments(ContinuousIncrement(ContinuousFamily::gaussian, 2.0));
  EXPECT_NEAR(g.sigma2, 4.0, 1e-15);
  EXPECT_NEAR(g.beta3, 8.0 * 2.0 * std::sqrt(2.0 / kPi), 1e-13);
  const auto l = moments(ContinuousIncrement(ContinuousFamily::laplace, 1.5));
  EXPECT_NEAR(l.sigma2, 2.0 * 1.5 * 1.5, 1e-14);
  EXPECT_NEAR(l.beta3, 6.0 * std::pow(1.5, 3), 1e-13);
  const auto u = moments(ContinuousIncrement(ContinuousFamily::uniform_symmetric, 3.0));
  EXPECT_NEAR(u.sigma2, 3.0, 1e-14);
  EXPECT_NEAR(u.beta3, 81.0 / 12.0, 1e-13);
}

TEST(Validation, RejectsDriftInsteadOfRecentring) {
  EXPECT_THROW(LatticeIncrement({-1, 1}, {0.4, 0.6}), std::invalid_argument);
}

TEST(Validation, RejectsBadMassAndSupport) {
  EXPECT_THROW(LatticeIncrement({-1, 1}, {0.5, 0.6}), std::invalid_argument);
  EXPECT_THROW(LatticeIncrement({-1, 1}, {-0.5, 1.5}), std::invalid_argument);
  EXPECT_THROW(LatticeIncrement({0}, {1.0}), std::invalid_argument);
  EXPECT_THROW(LatticeIncrement({-1, 1}, {0.5}), std::invalid_argument);
  EXPECT_THROW(ContinuousIncrement(ContinuousFamily::gaussian, 0.0), std::invalid_argument);
}

TEST(Charfn, KnownValues) {
  EXPECT_NEAR(std::abs(charfn(walks::ssrw(), 0.0) - 1.0), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(charfn(walks::ssrw(), kPi) + 1.0), 0.0, 1e-15);
  for (double t = -6.0; t <= 6.0; t += 0.01) {
    const auto c = charfn(walks::lazy(), t);
    EXPECT_NEAR(c.real(), std::pow(std::cos(t / 2.0), 2), 1e-15);
    EXPECT_NEAR(c.imag(), 0.0, 1e-15);
  }
}

TEST(Charfn, DefectMatchesDirectFormulaAwayFromZero) {
  const auto d = walks::skew_m1_0_2();
  for (double t = 0.1; t < 6.2; t += 0.1) EXPECT_NEAR(charfn_defect(d, t), 1.0 - std::norm(charfn(d, t)), 1e-14);
}

TEST(Span, Examples) {
  EXPECT_EQ(span(walks::ssrw()), 2);
  EXPECT_EQ(span(walks::lazy()), 1);
  EXPECT_EQ(span(walks::skew_m1_0_2()), 1);
  EXPECT_EQ(span(LatticeIncrement({-3, 3}, {0.5, 0.5})), 6);
}

TEST(Peakedness, LazyWalkIsOneHalf) {
  const auto p = peakedness_V(walks::lazy());
  EXPECT_NEAR(p.V, 0.5, 1e-9);
  EXPECT_TRUE(p.at_endpoint);
  EXPECT_EQ(p.grid_points, std::size_t{1} << 16);
}

TEST(Peakedness, SkewWalkFrozen) {
  // Frozen from the library at 2^16 grid points with Brent refinement; an
  // independent dense scan below confirms the first six digits.
  const auto p = peakedness_V(walks::skew_m1_0_2());
  EXPECT_NEAR(p.V, 0.428228, 5e-7);
  const auto d = walks::skew_m1_0_2();
  double sup = -moments(d).sigma2;
  for (int i = 1; i < 2000000; ++i) {
    const double t = 2.0 * kPi * i / 2000000.0;
    sup = std::max(sup, std::log(std::abs(charfn(d, t))) / (1.0 - std::cos(t)));
  }
  EXPECT_NEAR(p.V, -sup, 1e-9);
}

TEST(Peakedness, RequiresSpanOne) {
  EXPECT_THROW((void)peakedness_V(walks::ssrw()), std::domain_error);
}

TEST(Parsing, RoundTripsThroughJson) {
  const auto j = nlohmann::json::parse(R"({"offsets":[2,-1,0],"probs":[0.16666666666666666,0.33333333333333331,0.5]})");
  const auto m = parse_increment(j);
  ASSERT_TRUE(std::holds_alternative<LatticeIncrement>(m));
  const auto& d = std::get<LatticeIncrement>(m);
  EXPECT_EQ(d.offsets().front(), -1);
  EXPECT_EQ(parse_increment(to_json(m)), m);
  const auto g = parse_increment(nlohmann::json::parse(R"({"family":"laplace","scale":0.5})"));
  EXPECT_EQ(parse_increment(to_json(g)), g);
}

TEST(Parsing, RejectsUnknownKeysAndFamilies) {
  EXPECT_THROW((void)parse_increment(nlohmann::json::parse(R"({"offsets":[-1,1],"probs":[0.5,0.5],"x":1})")),
               std::invalid_argument);
  EXPECT_THROW((void)parse_increment(nlohmann::json::parse(R"({"family":"cauchy","scale":1})")), std::invalid_argument);
  EXPECT_THROW((void)load_increment("/nonexistent/walk.json"), std::invalid_argument);
}

// Properties over random mean-zero laws.

TEST(IncrementProperties, CharfnBoundedAndHermitian) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const auto d = oracle::random_walk(rng);
    for (double t = -7.0; t <= 7.0; t += 0.37) {
      const auto a = charfn(d, t);
      EXPECT_LE(std::abs(a), 1.0 + 1e-15);
      EXPECT_NEAR(std::abs(charfn(d, -t) - std::conj(a)), 0.0, 1e-15);
    }
  }
}

TEST(IncrementProperties, LyapunovAtLeastOne) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 500; ++trial) EXPECT_GE(moments(oracle::random_walk(rng)).lyapunov, 1.0 - 1e-12);
}

TEST(IncrementProperties, PeakednessControlsCharfn) {
  std::mt19937_64 rng(13);
  int checked = 0;
  while (checked < 25) {
    const auto d = oracle::random_walk(rng);
    if (span(d) != 1) continue;
    ++checked;
    const double V = peakedness_V(d, 1 << 12).V;
    EXPECT_GT(V, 0.0);
    for (int i = 1; i < 4000; ++i) {
      const double t = -kPi + 2.0 * kPi * i / 4000.0;
      if (t == 0.0) continue;
      EXPECT_LE(std::log(std::abs(charfn(d, t))), -V * (1.0 - std::cos(t)) + 1e-9) << d.describe() << " t=" << t;
    }
  }
}

}  // namespace
