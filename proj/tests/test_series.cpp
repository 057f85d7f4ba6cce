#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "incvol/error.hpp"
#include "incvol/generators.hpp"
#include "incvol/series.hpp"
#include "support.hpp"

namespace incvol {
namespace {

PriceSeries prices(std::vector<double> p, double step = 1.0) {
  PriceSeries s;
  s.step = step;
  for (std::size_t k = 0; k < p.size(); ++k) s.timestamps.push_back(static_cast<double>(k) * step);
  s.prices = std::move(p);
  return s;
}

TEST(LogReturns, ConstantPriceGivesZeroLevels) {
  const auto l = log_returns(prices({100, 100, 100}));
  EXPECT_EQ(l.values, (std::vector<double>{0, 0, 0}));
  EXPECT_FALSE(l.detrended);
}

TEST(LogReturns, ExponentialLadder) {
  const double e = std::numbers::e;
  const auto l = log_returns(prices({100, 100 * e, 100 * e * e}));
  ASSERT_EQ(l.size(), 3u);
  EXPECT_EQ(l.values[0], 0.0);
  EXPECT_NEAR(l.values[1], 1.0, 1e-14);
  EXPECT_NEAR(l.values[2], 2.0, 1e-14);
}

TEST(LogReturns, MatchesHandLogarithms) {
  const auto l = log_returns(prices({100, 105, 103}));
  // ln(1.05) and ln(1.03) to 15 digits.
  EXPECT_NEAR(l.values[1], 0.0487901641694320, 1e-15);
  EXPECT_NEAR(l.values[2], 0.0295588022415444, 1e-15);
}

TEST(LogReturns, ReferencePriceCancels) {
  const auto a = log_returns(prices({100, 105, 103}));
  const auto b = log_returns(prices({100, 105, 103}), 42.0);
  for (std::size_t k = 0; k < 3; ++k) EXPECT_NEAR(a.values[k], b.values[k], 1e-15);
  EXPECT_THROW(log_returns(prices({100, 105}), 0.0), DomainError);
}

TEST(LogReturns, RejectsNonPositivePriceNamingIndex) {
  try {
    log_returns(prices({100, -1, 3}));
    FAIL() << "expected DomainError";
  } catch (const DomainError& e) {
    EXPECT_NE(std::string(e.what()).find("index 1"), std::string::npos) << e.what();
  }
  EXPECT_THROW(log_returns(prices({100, 0})), DomainError);
}

TEST(LogReturns, TimestampTolerance) {
  auto p = prices({100, 101, 102, 103});
  p.timestamps = {0.0, 1.05, 2.0, 2.92};
  EXPECT_NO_THROW(log_returns(p));
  p.timestamps = {0.0, 1.2, 2.0, 3.0};
  EXPECT_THROW(log_returns(p), FormatError);
  p.timestamps = {0.0, 2.0, 1.0, 3.0};
  EXPECT_THROW(log_returns(p), FormatError);
  EXPECT_THROW(log_returns(prices({100})), SizeError);
}

TEST(Detrend, RemovesPureLinearTrend) {
  const auto d = detrend(test::levels({0, 1, 2, 3}));
  EXPECT_EQ(d.values, (std::vector<double>{0, 0, 0, 0}));
  EXPECT_TRUE(d.detrended);
}

TEST(Detrend, DriftlessInputUnchanged) {
  EXPECT_EQ(detrend(test::levels({0, 0, 0})).values, (std::vector<double>{0, 0, 0}));
}

TEST(Detrend, HandSubtraction) {
  EXPECT_EQ(detrend(test::levels({0, 2, 1, 3})).values, (std::vector<double>{0, 1, -1, 0}));
}

TEST(Detrend, TooShort) { EXPECT_THROW(detrend(test::levels({0})), SizeError); }

TEST(Detrend, IdempotentBitwiseAndZeroMeanIncrement) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    auto x = gen_wiener({2.5}, 257 + seed, 1.0, seed);
    for (std::size_t k = 0; k < x.size(); ++k) x.values[k] += 0.37 * static_cast<double>(k);
    const auto once = detrend(x);
    const auto twice = detrend(once);
    EXPECT_EQ(once.values, twice.values);
    EXPECT_EQ(once.values.front(), 0.0);
    EXPECT_EQ(once.values.back(), 0.0);
  }
}

TEST(Increments, SuccessiveDifferences) {
  const auto x = test::levels({0, 1, 3, 6});
  const auto z = increments(x, 1, true);
  EXPECT_EQ(z.values, (std::vector<double>{1, 2, 3}));
  EXPECT_EQ(z.start_indices, (std::vector<std::size_t>{1, 2, 3}));
}

TEST(Increments, LagTwo) {
  const auto x = test::levels({0, 1, 3, 6});
  const auto a = increments(x, 2, false);
  EXPECT_EQ(a.values, (std::vector<double>{3}));
  EXPECT_EQ(a.start_indices, (std::vector<std::size_t>{2}));
  EXPECT_FALSE(a.overlapping);
  const auto b = increments(x, 2, true);
  EXPECT_EQ(b.values, (std::vector<double>{3, 5}));
  EXPECT_TRUE(b.overlapping);
}

TEST(Increments, LagBounds) {
  const auto x = test::levels({0, 1, 3, 6});
  EXPECT_THROW(increments(x, 4), SizeError);
  EXPECT_THROW(increments(x, 0), SizeError);
}

TEST(Increments, RoundTripIsElementExact) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto x = gen_arch1({0.2, 0.5}, 1000, seed);
    const auto z = increments(x, 1, true);
    double level = x.values[0];
    ASSERT_EQ(z.size() + 1, x.size());
    for (std::size_t k = 0; k < z.size(); ++k) {
      level += z.values[k];
      ASSERT_EQ(level, x.values[k + 1]) << "seed " << seed << " index " << k + 1;
    }
  }
}

TEST(Increments, NonOverlappingTelescopes) {
  const auto x = gen_wiener({1.0}, 1001, 1.0, 3);
  for (std::size_t lag : {1u, 3u, 7u, 10u}) {
    const auto z = increments(x, lag, false);
    double sum = 0.0;
    for (double v : z.values) sum += v;
    const std::size_t covered = z.start_indices.back();
    EXPECT_EQ(covered, (x.size() - 1) / lag * lag);
    EXPECT_NEAR(sum, x.values[covered] - x.values[0], 1e-10);
    for (std::size_t i = 1; i < z.size(); ++i)
      EXPECT_GE(z.start_indices[i] - z.start_indices[i - 1], lag);
  }
}

TEST(EnsembleSplit, ExactDivision) {
  const auto e = ensemble_split(test::levels(std::vector<double>(10, 1.0)), 5);
  EXPECT_EQ(e.member_count(), 2u);
  EXPECT_EQ(e.length(), 5u);
  EXPECT_EQ(e.discarded(), 0u);
}

TEST(EnsembleSplit, RemainderDiscarded) {
  const auto e = ensemble_split(test::levels(std::vector<double>(11, 1.0)), 5);
  EXPECT_EQ(e.member_count(), 2u);
  EXPECT_EQ(e.discarded(), 1u);
}

TEST(EnsembleSplit, WindowsRebased) {
  const auto e = ensemble_split(test::levels({0, 1, 2, 3}), 2);
  ASSERT_EQ(e.member_count(), 2u);
  EXPECT_EQ(e[0].values, (std::vector<double>{0, 1}));
  EXPECT_EQ(e[1].values, (std::vector<double>{0, 1}));
}

TEST(EnsembleSplit, FullWindowIsRebasedSeries) {
  const auto x = test::levels({3, 1, 4, 1, 5});
  const auto e = ensemble_split(x, x.size());
  ASSERT_EQ(e.member_count(), 1u);
  EXPECT_EQ(e[0].values, rebase(x).values);
}

TEST(EnsembleSplit, WindowBounds) {
  const auto x = test::levels({0, 1, 2, 3});
  EXPECT_THROW(ensemble_split(x, 1), SizeError);
  EXPECT_THROW(ensemble_split(x, 5), SizeError);
}

TEST(Ensemble, EnforcesInvariants) {
  EXPECT_THROW(Ensemble(std::vector<LevelSeries>{}), SizeError);
  EXPECT_THROW((test::ensemble({{0, 1}, {0, 1, 2}})), SizeError);
  EXPECT_THROW((test::ensemble({{0, 1}, {1, 2}})), DomainError);
  std::vector<LevelSeries> mixed{test::levels({0, 1}, 1.0), test::levels({0, 1}, 2.0)};
  EXPECT_THROW(Ensemble(std::move(mixed)), SizeError);
}

}  // namespace
}  // namespace incvol
