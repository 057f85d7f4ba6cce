#include <gtest/gtest.h>

#include <cmath>

#include "incvol/error.hpp"
#include "incvol/generators.hpp"
#include "incvol/model_fit.hpp"

namespace incvol {
namespace {

IncrementSeries steps(const LevelSeries& x) { return increments(x, 1, false); }

TEST(UnconditionalMsf, ClosedForms) {
  EXPECT_DOUBLE_EQ(unconditional_msf_arch1({0.2, 0.5}), 0.4);
  EXPECT_DOUBLE_EQ(unconditional_msf_arch1({0.3, 0.0}), 0.3);
    EXPECT_NEAR(unconditional_msf_garch11({0.1, 0.2, 0.7}), 1.0, 1e-12);
  EXPECT_EQ(unconditional_msf_garch11({0.2, 0.5, 0.0}), unconditional_msf_arch1({0.2, 0.5}));
  EXPECT_THROW(unconditional_msf_arch1({0.2, 1.0}), DomainError);
  EXPECT_THROW(unconditional_msf_arch1({0.2, -1.0}), DomainError);
  EXPECT_THROW(unconditional_msf_garch11({0.2, 0.5, 0.5}), DomainError);
}

TEST(UnconditionalMsf, StrictlyIncreasing) {
  for (double a = 0.1; a < 1.0; a += 0.1) {
    EXPECT_LT(unconditional_msf_arch1({a, 0.3}), unconditional_msf_arch1({a + 0.05, 0.3}));
    EXPECT_LT(unconditional_msf_garch11({a, 0.3, 0.2}), unconditional_msf_garch11({a + 0.05, 0.3, 0.2}));
  }
  for (double w = -0.9; w < 0.85; w += 0.1) {
    EXPECT_LT(unconditional_msf_arch1({0.2, w}), unconditional_msf_arch1({0.2, w + 0.05}));
  }
  for (double w = 0.0; w < 0.4; w += 0.05) {
    EXPECT_LT(unconditional_msf_garch11({0.2, w, 0.5}), unconditional_msf_garch11({0.2, w + 0.01, 0.5}));
    EXPECT_LT(unconditional_msf_garch11({0.2, 0.4, w}), unconditional_msf_garch11({0.2, 0.4, w + 0.01}));
  }
}

TEST(FitArch1, RecoversParameters) {
  const auto f = fit_arch1(steps(gen_arch1({0.2, 0.5}, 100001, 3)));
  EXPECT_EQ(f.model, Model::arch1);
  EXPECT_NEAR(f.alpha, 0.2, 0.02);
  EXPECT_NEAR(f.omega, 0.5, 0.05);
  EXPECT_EQ(f.zeta, 0.0);
  EXPECT_TRUE(f.converged);
  EXPECT_GT(f.se_omega, 0.0);
  EXPECT_EQ(f.sample_count, 99999u);
}

TEST(FitArch1, WienerHasNoMemory) {
  const auto f = fit_arch1(steps(gen_wiener({1.0}, 100001, 1.0, 4)));
  EXPECT_LE(std::abs(f.omega), 3.0 * f.se_omega);
  EXPECT_NEAR(f.alpha, 1.0, 0.05);
}

TEST(FitArch1, PlainOlsOption) {
  const auto inc = steps(gen_arch1({0.2, 0.3}, 100001, 5));
  const auto ols = fit_arch1(inc, {0});
  EXPECT_EQ(ols.iterations, 0u);
  EXPECT_NEAR(ols.omega, 0.3, 0.05);
}

TEST(FitArch1, Errors) {
  IncrementSeries alt;
  for (int i = 0; i < 100; ++i) {
    alt.values.push_back(i % 2 ? -1.0 : 1.0);
    alt.start_indices.push_back(static_cast<std::size_t>(i + 1));
  }
  EXPECT_THROW(fit_arch1(alt), SingularityError);
  alt.values.resize(40);
  alt.start_indices.resize(40);
  EXPECT_THROW(fit_arch1(alt), SizeError);
  EXPECT_THROW(fit_arch1(increments(gen_wiener({1.0}, 200, 1.0, 1), 1, true)), UsageError);
}

TEST(FitGarch11, RecoversParameters) {
  const auto f = fit_garch11(steps(gen_garch11({0.1, 0.2, 0.7}, 100001, 6)));
  EXPECT_EQ(f.model, Model::garch11);
  EXPECT_TRUE(f.converged);
  EXPECT_NEAR(f.alpha, 0.1, 0.05);
  EXPECT_NEAR(f.omega, 0.2, 0.05);
  EXPECT_NEAR(f.zeta, 0.7, 0.05);
  EXPECT_GT(f.se_alpha, 0.0);
  EXPECT_GT(f.se_zeta, 0.0);
  EXPECT_TRUE(std::isfinite(f.loss));
}

TEST(FitGarch11, ArchDataGivesSmallZetaAndNests) {
  const auto inc = steps(gen_arch1({0.2, 0.5}, 100001, 7));
  const auto f = fit_garch11(inc);
  EXPECT_NEAR(f.zeta, 0.0, 0.1);
  // The fit cannot be worse than the nested ARCH optimum under the same objective.
  const auto a = fit_arch1(inc);
  const double nested = garch11_loss(inc.values, {a.alpha, a.omega, 0.0});
  EXPECT_LE(f.loss, nested + 1e-7);
  EXPECT_LE(f.loss, garch11_loss(inc.values, {0.2, 0.5, 0.0}) + 1e-7);
}

TEST(FitGarch11, ZeroIterationBudget) {
  const auto inc = steps(gen_garch11({0.1, 0.2, 0.7}, 5001, 8));
  OptimizerConfig cfg;
  cfg.max_iterations = 0;
  const auto f = fit_garch11(inc, cfg);
  EXPECT_FALSE(f.converged);
  EXPECT_EQ(f.iterations, 0u);
  // Best start: the one with the lowest objective, at its own alpha.
  const double msf = mean_square(inc.values);
  double best = std::numeric_limits<double>::infinity();
  GarchParams best_p{};
  for (const auto& st : kGarchStarts) {
    const GarchParams p{msf * (1 - st[0] - st[1]), st[0], st[1]};
    const double v = garch11_loss(inc.values, p);
    if (v < best) {
      best = v;
      best_p = p;
    }
  }
  EXPECT_NEAR(f.alpha, best_p.alpha, 1e-12);
  EXPECT_NEAR(f.omega, best_p.omega, 1e-12);
  EXPECT_NEAR(f.zeta, best_p.zeta, 1e-12);
}

TEST(FitGarch11, DeterministicAcrossThreads) {
  const auto inc = steps(gen_garch11({0.1, 0.2, 0.7}, 20001, 9));
  OptimizerConfig one, four;
  four.threads = 4;
  EXPECT_EQ(fit_garch11(inc, one), fit_garch11(inc, four));
  EXPECT_EQ(fit_garch11(inc, one), fit_garch11(inc, one));
}

TEST(FitGarch11, Errors) {
  EXPECT_THROW(fit_garch11(steps(gen_wiener({1.0}, 400, 1.0, 1))), SizeError);
  EXPECT_THROW(fit_garch11(increments(gen_wiener({1.0}, 2000, 1.0, 1), 1, true)), UsageError);
  IncrementSeries zeros;
  zeros.values.assign(600, 0.0);
  zeros.start_indices.resize(600);
  EXPECT_THROW(fit_garch11(zeros), SingularityError);
}

TEST(GarchFree, RoundTripInsideDomain) {
  const GarchParams p{0.3, 0.25, 0.6};
  const auto q = detail::garch_from_free(detail::garch_to_free(p));
  EXPECT_NEAR(q.alpha, p.alpha, 1e-14);
  EXPECT_NEAR(q.omega, p.omega, 1e-14);
  EXPECT_NEAR(q.zeta, p.zeta, 1e-14);
  const auto extreme = detail::garch_from_free({-50.0, 800.0, -800.0});
  EXPECT_GT(extreme.alpha, 0.0);
  EXPECT_LT(extreme.omega + extreme.zeta, 1.0 + 1e-15);
  EXPECT_GE(extreme.zeta, 0.0);
}

}  // namespace
}  // namespace incvol
