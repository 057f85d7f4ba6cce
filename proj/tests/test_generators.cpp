#include <gtest/gtest.h>

#include <Eigen/Dense>

#include <cmath>
#include <set>

#include "incvol/error.hpp"
#include "incvol/estimators.hpp"
#include "incvol/generators.hpp"
#include "incvol/random.hpp"
#include "incvol/stats.hpp"

namespace incvol {
namespace {

std::vector<double> steps_of(const LevelSeries& x) {
  std::vector<double> out(x.size() - 1);
  for (std::size_t k = 1; k < x.size(); ++k) out[k - 1] = x.values[k] - x.values[k - 1];
  return out;
}

double mean_sq(const std::vector<double>& v) {
  stats::Sum s;
  for (double x : v) s.add(x * x);
  return s.value() / static_cast<double>(v.size());
}

double lag1_corr(const std::vector<double>& v) {
  const auto m = stats::moments(v);
  stats::Sum num;
  for (std::size_t i = 1; i < v.size(); ++i) num.add((v[i] - m.mean) * (v[i - 1] - m.mean));
  return num.value() / static_cast<double>(v.size() - 1) / (m.sd * m.sd);
}

TEST(Random, SubstreamsAreDistinctAndStable) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t m = 0; m < 1000; ++m) seen.insert(substream_seed(kDefaultSeed, m));
  EXPECT_EQ(seen.size(), 1000u);
  static_assert(substream_seed(1, 2) == substream_seed(1, 2));
  EXPECT_NE(substream_seed(1, 0), substream_seed(2, 0));
}

TEST(Random, NoiseIsStandardized) {
  for (Noise kind : {Noise::gaussian, Noise::uniform, Noise::rademacher}) {
    NoiseSource z(11, kind);
    std::vector<double> v(200000);
    for (auto& x : v) x = z();
    const auto m = stats::moments(v);
    EXPECT_NEAR(m.mean, 0.0, 4.0 / std::sqrt(200000.0)) << to_string(kind);
    EXPECT_NEAR(m.sd * m.sd, 1.0, 0.015) << to_string(kind);
    if (kind == Noise::rademacher) {
      for (double x : v) ASSERT_TRUE(x == 1.0 || x == -1.0);
    }
    if (kind == Noise::uniform) {
      for (double x : v) ASSERT_LE(std::abs(x), std::sqrt(3.0));
    }
  }
  EXPECT_THROW(noise_from_string("cauchy"), UsageError);
  EXPECT_EQ(noise_from_string("uniform"), Noise::uniform);
}

TEST(Wiener, OneStepVariance) {
  const auto x = gen_wiener({1.0}, 1000000, 1.0, 5);
  const auto var = stats::moments(steps_of(x)).sd;
  EXPECT_GE(var * var, 0.99);
  EXPECT_LE(var * var, 1.01);
  EXPECT_EQ(x.values[0], 0.0);
}

TEST(Wiener, EnsembleVarianceIsLinear) {
  const auto ens = simulate_ensemble(10000, 9, [](std::uint64_t s) {
    return gen_wiener({1.0}, 101, 1.0, s);
  });
  const std::vector<std::size_t> probe{100};
  const auto c = variance_curve(ens, probe);
  EXPECT_NEAR(c.variances[0], 100.0, 3.0 * c.stderrs[0]);
}

TEST(Wiener, StepScalesVariance) {
  const auto x = gen_wiener({2.0}, 200001, 0.25, 5);
  EXPECT_NEAR(mean_sq(steps_of(x)), 0.5, 0.01);
  EXPECT_EQ(x.step, 0.25);
}

TEST(Wiener, ValidatesInputs) {
  EXPECT_THROW(gen_wiener({1.0}, 1, 1.0, 1), SizeError);
  EXPECT_THROW(gen_wiener({0.0}, 10, 1.0, 1), DomainError);
  EXPECT_THROW(gen_wiener({1.0}, 10, 0.0, 1), DomainError);
}

TEST(Generators, DeterministicGivenSeed) {
  EXPECT_EQ(gen_wiener({1.0}, 500, 1.0, 77), gen_wiener({1.0}, 500, 1.0, 77));
  EXPECT_NE(gen_wiener({1.0}, 500, 1.0, 77), gen_wiener({1.0}, 500, 1.0, 78));
  EXPECT_EQ(gen_arch1({0.2, 0.5}, 500, 77, Noise::uniform), gen_arch1({0.2, 0.5}, 500, 77, Noise::uniform));
  EXPECT_EQ(gen_garch11({0.1, 0.2, 0.7}, 500, 77), gen_garch11({0.1, 0.2, 0.7}, 500, 77));
  EXPECT_EQ(gen_fbm({0.7, 1.0}, 300, 1.0, 77), gen_fbm({0.7, 1.0}, 300, 1.0, 77));
  EXPECT_EQ(gen_scaled_wiener({0.7, 1.0}, 300, 1.0, 77), gen_scaled_wiener({0.7, 1.0}, 300, 1.0, 77));
}

TEST(Generators, ZeroMeanAcrossEnsemble) {
  const auto check = [](const Ensemble& ens, const char* name) {
    for (std::size_t t : {1u, 10u, 30u, 63u}) {
      std::vector<double> xs(ens.member_count());
      for (std::size_t m = 0; m < xs.size(); ++m) xs[m] = ens.at(m, t);
      const auto mo = stats::moments(xs);
      EXPECT_LE(std::abs(mo.mean), 3.0 * mo.stderr_of_mean()) << name << " t=" << t;
    }
  };
  const unsigned seed = 123;
  check(simulate_ensemble(4000, seed, [](std::uint64_t s) { return gen_wiener({1.0}, 64, 1.0, s); }), "wiener");
  check(simulate_ensemble(4000, seed, [](std::uint64_t s) { return gen_arch1({0.2, 0.5}, 64, s); }), "arch1");
  check(simulate_ensemble(4000, seed, [](std::uint64_t s) { return gen_garch11({0.1, 0.2, 0.7}, 64, s); }), "garch11");
  const FbmSampler fbm({0.7, 1.0}, 64, 1.0);
  check(simulate_ensemble(4000, seed, [&](std::uint64_t s) { return fbm.sample(s); }), "fbm");
  check(simulate_ensemble(4000, seed, [](std::uint64_t s) { return gen_scaled_wiener({0.7, 1.0}, 64, 1.0, s); }), "scaled");
}

TEST(Generators, EnsembleIndependentOfThreadCount) {
  auto gen = [](std::uint64_t s) { return gen_arch1({0.2, 0.5}, 50, s); };
  const auto a = simulate_ensemble(64, 5, gen, 1);
  const auto b = simulate_ensemble(64, 5, gen, 4);
  for (std::size_t m = 0; m < 64; ++m) EXPECT_EQ(a[m], b[m]);
  EXPECT_EQ(a[3], gen(substream_seed(5, 3)));
}

TEST(Arch1, OmegaZeroIsIidWithVarianceAlpha) {
  const auto inc = steps_of(gen_arch1({0.3, 0.0}, 200001, 4));
  EXPECT_NEAR(mean_sq(inc), 0.3, 0.3 * 0.01);
  std::vector<double> sq(inc.size());
  for (std::size_t i = 0; i < inc.size(); ++i) sq[i] = inc[i] * inc[i];
  EXPECT_LE(std::abs(lag1_corr(sq)), 3.0 / std::sqrt(static_cast<double>(sq.size())));
}

TEST(Arch1, OmegaZeroGaussianPassesNormalityAtOnePercent) {
  const auto inc = steps_of(gen_arch1({0.3, 0.0}, 2001, 8));
  const double sd = std::sqrt(0.3);
  const double d = stats::ks_statistic_to_cdf(inc, [&](double x) { return stats::normal_cdf(x / sd); });
  EXPECT_LT(d, stats::ks_critical_value(0.01, inc.size()));
}

TEST(Arch1, FixedPoint) {
  const auto inc = steps_of(gen_arch1({0.2, 0.5}, 1000001, 42));
  EXPECT_NEAR(mean_sq(inc), 0.4, 0.4 * 0.02);
}

TEST(Arch1, BinnedConditionalMsfFollowsRecursion) {
  // Oracle: bucket e[k]^2 by e[k-1]^2 in narrow windows around v.
  const auto inc = steps_of(gen_arch1({0.2, 0.5}, 2000001, 21));
  for (double v : {0.05, 0.2, 0.5, 1.0}) {
    stats::Sum sum, sum_sq;
    std::size_t count = 0;
    for (std::size_t k = 1; k < inc.size(); ++k) {
      const double prev = inc[k - 1] * inc[k - 1];
      if (std::abs(prev - v) > 0.02 * std::max(v, 0.5)) continue;
      const double y = inc[k] * inc[k];
      sum.add(y);
      sum_sq.add(y * y);
      ++count;
    }
    ASSERT_GT(count, 1000u);
    const double mean = sum.value() / static_cast<double>(count);
    const double se = std::sqrt((sum_sq.value() / static_cast<double>(count) - mean * mean) /
                                static_cast<double>(count));
    EXPECT_NEAR(mean, 0.2 + 0.5 * v, 4.0 * se + 0.01 * std::max(v, 0.5)) << "v=" << v;
  }
}

TEST(Arch1, ParameterInvariants) {
  EXPECT_THROW(gen_arch1({0.0, 0.5}, 10, 1), DomainError);
  try {
    gen_arch1({0.2, 1.5}, 10, 1);
    FAIL();
  } catch (const DomainError& e) {
    EXPECT_NE(std::string(e.what()).find("omega"), std::string::npos);
  }
  EXPECT_THROW(gen_arch1({0.2, 0.5}, 1, 1), SizeError);
}

TEST(Arch1, NegativeOmegaRejectedWhenConditionalMsfTurnsNonPositive) {
  EXPECT_THROW(gen_arch1({0.2, -0.9}, 10000, 1), DomainError);
  // Bounded noise keeps alpha + omega e^2 positive here.
  EXPECT_NO_THROW(gen_arch1({0.2, -0.05}, 10000, 1, Noise::rademacher));
}

TEST(Garch11, ZetaZeroMatchesArchBitwise) {
  for (Noise kind : {Noise::gaussian, Noise::uniform, Noise::rademacher})
    for (std::uint64_t seed : {1u, 2u, 3u})
      EXPECT_EQ(gen_garch11({0.2, 0.5, 0.0}, 5000, seed, kind), gen_arch1({0.2, 0.5}, 5000, seed, kind));
}

TEST(Garch11, FixedPoint) {
  const auto inc = steps_of(gen_garch11({0.1, 0.2, 0.7}, 1000001, 42));
  EXPECT_NEAR(mean_sq(inc), 1.0, 0.03);
}

TEST(Garch11, ParameterInvariants) {
  EXPECT_THROW(gen_garch11({0.1, 0.5, 0.5}, 10, 1), DomainError);
  EXPECT_THROW(gen_garch11({0.1, -0.1, 0.5}, 10, 1), DomainError);
  EXPECT_THROW(gen_garch11({0.1, 0.1, -0.5}, 10, 1), DomainError);
  EXPECT_THROW(gen_garch11({-0.1, 0.1, 0.5}, 10, 1), DomainError);
}

// Covariance of x(1..n-1) from the closed form, factorized independently.
Eigen::MatrixXd fbm_level_covariance(double h, double sigma_sq, std::size_t n, double step) {
  const std::size_t m = n - 1;
  Eigen::MatrixXd c(m, m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      const double s = static_cast<double>(i + 1) * step, t = static_cast<double>(j + 1) * step;
      c(i, j) = 0.5 * sigma_sq * (std::pow(s, 2 * h) + std::pow(t, 2 * h) - std::pow(std::abs(t - s), 2 * h));
    }
  return c;
}

TEST(Fbm, MatchesDenseCholeskyFactor) {
  for (double h : {0.3, 0.5, 0.7, 0.9}) {
    const std::size_t n = 96;
    const double step = 0.5, sigma_sq = 1.7;
    // Increment covariance D C D^T with D the differencing matrix.
    const auto c = fbm_level_covariance(h, sigma_sq, n, step);
    const std::size_t m = n - 1;
    Eigen::MatrixXd d = Eigen::MatrixXd::Identity(m, m);
    for (std::size_t i = 1; i < m; ++i) d(i, i - 1) = -1.0;
    const Eigen::MatrixXd inc_cov = d * c * d.transpose();
    const Eigen::LLT<Eigen::MatrixXd> llt(inc_cov);
    ASSERT_EQ(llt.info(), Eigen::Success);
    NoiseSource z(99);
    Eigen::VectorXd eps(m);
    for (std::size_t i = 0; i < m; ++i) eps(i) = z();
    const Eigen::VectorXd g = llt.matrixL() * eps;
    const auto x = gen_fbm({h, sigma_sq}, n, step, 99);
    double level = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
      level += g(k);
      EXPECT_NEAR(x.values[k + 1], level, 1e-9 * (1.0 + std::abs(level))) << "H=" << h << " k=" << k;
    }
  }
}

TEST(Fbm, UncachedPathMatchesCachedPrefix) {
  const std::size_t limit = FbmSampler::kCacheLimit;
  const auto cached = gen_fbm({0.7, 1.0}, limit, 1.0, 5);
  const auto streamed = gen_fbm({0.7, 1.0}, limit + 1, 1.0, 5);
  for (std::size_t k = 0; k < limit; ++k) ASSERT_EQ(cached.values[k], streamed.values[k]) << k;
}

TEST(Fbm, HalfHurstHasUncorrelatedIncrements) {
  const auto inc = steps_of(gen_fbm({0.5, 1.0}, 1 << 14, 1.0, 3));
  EXPECT_LE(std::abs(lag1_corr(inc)), 3.0 / std::sqrt(static_cast<double>(inc.size())));
}

// Pooled over every admissible t of a stationary-increment path.
double pooled_unit_lag_autocorr(const Ensemble& ens) {
  stats::Sum s;
  std::size_t count = 0;
  for (std::size_t t = 1; t + 1 < ens.length(); ++t) {
    s.add(increment_autocorr_direct(ens, t, 1).value);
    ++count;
  }
  return s.value() / static_cast<double>(count);
}

TEST(Fbm, PersistentAndAntipersistentIncrements) {
  const FbmSampler persistent({0.7, 1.0}, 64, 1.0);
  const auto ens = simulate_ensemble(10000, 17, [&](std::uint64_t s) { return persistent.sample(s); });
  const double expected = 0.5 * (std::pow(2.0, 1.4) - 2.0);
  EXPECT_NEAR(expected, 0.3195, 5e-5);
  EXPECT_NEAR(pooled_unit_lag_autocorr(ens), expected, 0.05 * expected);

  const FbmSampler anti({0.3, 1.0}, 64, 1.0);
  const auto ens_anti = simulate_ensemble(2000, 17, [&](std::uint64_t s) { return anti.sample(s); });
  EXPECT_LT(pooled_unit_lag_autocorr(ens_anti), 0.0);
  EXPECT_LT(increment_autocorr_direct(ens_anti, 32, 1).value, 0.0);
}

TEST(Fbm, TwoPointCovarianceMatchesClosedForm) {
  const double h = 0.7;
  const FbmSampler sampler({h, 1.0}, 64, 1.0);
  const auto ens = simulate_ensemble(10000, 31, [&](std::uint64_t s) { return sampler.sample(s); });
  const std::vector<std::pair<std::size_t, std::size_t>> pairs{{16, 32}, {24, 48}, {32, 48}, {40, 63}, {50, 60}};
  for (auto [s, t] : pairs) {
    stats::Sum acc;
    for (std::size_t m = 0; m < ens.member_count(); ++m) acc.add(ens.at(m, s) * ens.at(m, t));
    const double empirical = acc.value() / static_cast<double>(ens.member_count());
    const double ds = static_cast<double>(s), dt = static_cast<double>(t);
    const double exact = 0.5 * (std::pow(ds, 2 * h) + std::pow(dt, 2 * h) - std::pow(dt - ds, 2 * h));
    EXPECT_NEAR(empirical, exact, 0.05 * exact) << s << "," << t;
  }
}

TEST(Fbm, LengthBoundAndParameters) {
  EXPECT_THROW(FbmSampler({0.7, 1.0}, kFbmMaxLength + 1, 1.0), ResourceError);
  EXPECT_THROW(FbmSampler({0.7, 1.0}, 100, 1.0, 50), ResourceError);
  EXPECT_THROW(FbmSampler({1.0, 1.0}, 100, 1.0), DomainError);
  EXPECT_THROW(FbmSampler({0.0, 1.0}, 100, 1.0), DomainError);
  EXPECT_THROW(FbmSampler({0.5, -1.0}, 100, 1.0), DomainError);
  EXPECT_THROW(FbmSampler({0.5, 1.0}, 1, 1.0), SizeError);
}

TEST(ScaledWiener, HalfHurstEqualsWiener) {
  EXPECT_EQ(gen_scaled_wiener({0.5, 1.3}, 1000, 1.0, 8).values, gen_wiener({1.3}, 1000, 1.0, 8).values);
}

TEST(ScaledWiener, PowerLawVarianceAndIndependentIncrements) {
  const auto ens = simulate_ensemble(10000, 4, [](std::uint64_t s) {
    return gen_scaled_wiener({0.7, 1.0}, 121, 1.0, s);
  });
  const std::vector<std::size_t> probe{100};
  const auto c = variance_curve(ens, probe);
  EXPECT_NEAR(c.variances[0], std::pow(100.0, 1.4), 3.0 * c.stderrs[0]);
  for (std::size_t t : {5u, 50u, 110u}) {
    const auto a = increment_autocorr_direct(ens, t, 5);
    EXPECT_LE(std::abs(a.value), 3.0 * a.std_error) << t;
  }
}

}  // namespace
}  // namespace incvol
