#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "incvol/error.hpp"
#include "incvol/generators.hpp"
#include "incvol/optim.hpp"
#include "incvol/parallel.hpp"
#include "incvol/series.hpp"
#include "incvol/stats.hpp"

namespace incvol {

enum class Model { arch1, garch11 };

inline std::string_view to_string(Model m) { return m == Model::arch1 ? "arch1" : "garch11"; }

struct FitResult {
  Model model = Model::arch1;
  std::size_t lag_steps = 1;
  double alpha = 0.0;
  double omega = 0.0;
  double zeta = 0.0;  // always 0 for arch1
  double se_alpha = 0.0;
  double se_omega = 0.0;
  double se_zeta = 0.0;
  double loss = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  std::size_t sample_count = 0;

  ArchParams arch_params() const { return {alpha, omega}; }
  GarchParams garch_params() const { return {alpha, omega, zeta}; }

  bool operator==(const FitResult&) const = default;
};

// Whole-sample mean square fluctuation implied by the recursions.
inline double unconditional_msf_arch1(const ArchParams& p) {
  if (!(std::abs(p.omega) < 1.0)) throw DomainError("omega must satisfy |omega| < 1");
  return p.alpha / (1.0 - p.omega);
}

inline double unconditional_msf_garch11(const GarchParams& p) {
  if (!(p.omega + p.zeta < 1.0)) throw DomainError("omega + zeta must be below 1");
  return p.alpha / (1.0 - p.omega - p.zeta);
}

struct ArchFitConfig {
  // Weighted re-fits after the initial ordinary least squares pass. Each
  // re-fit weights observation i by 1 / h_i^2 with h_i the previous fitted
  // conditional mean square fluctuation. 0 gives plain OLS.
  std::size_t reweight_steps = 3;
};

namespace detail {
inline void require_non_overlapping(const IncrementSeries& incs) {
  if (incs.overlapping) throw UsageError("model fits need non-overlapping increments");
}
}  // namespace detail

// Regression of z^2(t) on z^2(t - T) over consecutive increments.
inline FitResult fit_arch1(const IncrementSeries& incs, const ArchFitConfig& config = {}) {
  detail::require_non_overlapping(incs);
  if (incs.size() < 50)
    throw SizeError("ARCH(1) fit needs at least 50 increments, got " + std::to_string(incs.size()));
  const std::size_t m = incs.size() - 1;
  std::vector<double> prev(m), next(m);
  for (std::size_t i = 0; i < m; ++i) {
    prev[i] = incs.values[i] * incs.values[i];
    next[i] = incs.values[i + 1] * incs.values[i + 1];
  }
  stats::LineFit fit;
  try {
    fit = stats::fit_line(prev, next);
  } catch (const SingularityError&) {
    throw SingularityError("ARCH(1) fit: squared increments are all equal");
  }
  const double floor = 1e-3 * stats::moments(next).mean;
  std::vector<double> weights(m);
  for (std::size_t step = 0; step < config.reweight_steps; ++step) {
    for (std::size_t i = 0; i < m; ++i) {
      const double h = std::max(fit.intercept + fit.slope * prev[i], floor);
      weights[i] = 1.0 / (h * h);
    }
    fit = stats::fit_line(prev, next, weights, stats::ErrorScale::from_residuals);
  }
  FitResult r;
  r.model = Model::arch1;
  r.lag_steps = incs.lag_steps;
  r.alpha = fit.intercept;
  r.omega = fit.slope;
  r.se_alpha = fit.se_intercept;
  r.se_omega = fit.se_slope;
  r.loss = fit.residual_variance;
  r.iterations = config.reweight_steps;
  r.converged = true;
  r.sample_count = m;
  return r;
}

struct OptimizerConfig {
  std::size_t max_iterations = 2000;
  double tolerance = 1e-8;
  std::size_t starts = 5;
  unsigned threads = 1;
};

// 0.5 * mean(ln v_t + z_t^2 / v_t) with the recursion started at v_0 =
// initial. Lower is better; +inf when the recursion leaves the positive
// half-line.
inline double garch11_loss(std::span<const double> z, const GarchParams& p, double initial) {
  if (z.empty()) return std::numeric_limits<double>::infinity();
  double cond = initial;
  double acc = 0.0;
  for (std::size_t t = 0; t < z.size(); ++t) {
    if (t > 0) cond = p.alpha + p.omega * z[t - 1] * z[t - 1] + p.zeta * cond;
    if (!(cond > 0.0)) return std::numeric_limits<double>::infinity();
    acc += std::log(cond) + z[t] * z[t] / cond;
  }
  return 0.5 * acc / static_cast<double>(z.size());
}

inline double mean_square(std::span<const double> z) {
  stats::Sum sq;
  for (double v : z) sq.add(v * v);
  return z.empty() ? 0.0 : sq.value() / static_cast<double>(z.size());
}

// Starts the recursion at the sample mean square, as fit_garch11 does.
inline double garch11_loss(std::span<const double> z, const GarchParams& p) {
  return garch11_loss(z, p, mean_square(z));
}

namespace detail {

// Unconstrained coordinates u -> (alpha, omega, zeta) with alpha > 0 and
// (omega, zeta) inside the open simplex omega, zeta > 0, omega + zeta < 1.
inline GarchParams garch_from_free(const optim::Point<3>& u) {
  const double shift = std::max({0.0, u[1], u[2]});
  const double e0 = std::exp(-shift), e1 = std::exp(u[1] - shift), e2 = std::exp(u[2] - shift);
  const double denom = e0 + e1 + e2;
  return {std::exp(u[0]), e1 / denom, e2 / denom};
}

inline optim::Point<3> garch_to_free(const GarchParams& p) {
  const double rest = 1.0 - p.omega - p.zeta;
  return {std::log(p.alpha), std::log(p.omega / rest), std::log(p.zeta / rest)};
}

inline bool invert3(const std::array<std::array<double, 3>, 3>& a,
                    std::array<std::array<double, 3>, 3>& out) {
  const double det = a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) -
                     a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0]) +
                     a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
  if (!(std::abs(det) > 0.0) || !std::isfinite(det)) return false;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      const int r0 = (j + 1) % 3, r1 = (j + 2) % 3, c0 = (i + 1) % 3, c1 = (i + 2) % 3;
      out[i][j] = (a[r0][c0] * a[r1][c1] - a[r0][c1] * a[r1][c0]) / det;
    }
  return true;
}

// Standard errors from the inverse Hessian of the total negative
// log-likelihood in free coordinates, mapped back by the delta method.
inline std::array<double, 3> garch_standard_errors(std::span<const double> z,
                                                   const optim::Point<3>& u, double initial) {
  const double n = static_cast<double>(z.size());
  auto total = [&](const optim::Point<3>& v) {
    return n * garch11_loss(z, garch_from_free(v), initial);
  };
  constexpr double h = 1e-4;
  std::array<std::array<double, 3>, 3> hess{};
  const double f0 = total(u);
  for (int i = 0; i < 3; ++i) {
    for (int j = i; j < 3; ++j) {
      auto shifted = [&](double di, double dj) {
        auto v = u;
        v[i] += di;
        v[j] += dj;
        return total(v);
      };
      if (i == j) {
        hess[i][i] = (shifted(h, 0.0) - 2.0 * f0 + shifted(-h, 0.0)) / (h * h);
      } else {
        hess[i][j] = hess[j][i] = (shifted(h, h) - shifted(h, -h) - shifted(-h, h) +
                                   shifted(-h, -h)) / (4.0 * h * h);
      }
    }
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::array<std::array<double, 3>, 3> cov{};
  if (!invert3(hess, cov)) return {nan, nan, nan};
  std::array<std::array<double, 3>, 3> jac{};
  for (int j = 0; j < 3; ++j) {
    auto up = u, down = u;
    up[j] += h;
    down[j] -= h;
    const auto pu = garch_from_free(up), pd = garch_from_free(down);
    jac[0][j] = (pu.alpha - pd.alpha) / (2.0 * h);
    jac[1][j] = (pu.omega - pd.omega) / (2.0 * h);
    jac[2][j] = (pu.zeta - pd.zeta) / (2.0 * h);
  }
  std::array<double, 3> se{};
  for (int k = 0; k < 3; ++k) {
    double var = 0.0;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) var += jac[k][i] * cov[i][j] * jac[k][j];
    se[k] = var > 0.0 ? std::sqrt(var) : nan;
  }
  return se;
}

}  // namespace detail

// Deterministic multi-start (omega, zeta) pairs; alpha matches the sample
// mean square fluctuation at each start.
inline constexpr std::array<std::array<double, 2>, 5> kGarchStarts{{
    {0.05, 0.90}, {0.10, 0.80}, {0.20, 0.60}, {0.30, 0.30}, {0.05, 0.45}}};

// Gaussian quasi-likelihood fit by Nelder-Mead in free coordinates.
inline FitResult fit_garch11(const IncrementSeries& incs, const OptimizerConfig& config = {}) {
  detail::require_non_overlapping(incs);
  if (incs.size() < 500)
    throw SizeError("GARCH(1,1) fit needs at least 500 increments, got " +
                    std::to_string(incs.size()));
  const std::span<const double> z(incs.values);
  const double msf = mean_square(z);
  if (!(msf > 0.0)) throw SingularityError("GARCH(1,1) fit: increments are all zero");

  const std::size_t starts = std::max<std::size_t>(1, config.starts);
  std::vector<optim::SimplexResult<3>> runs(starts);
  auto objective = [&](const optim::Point<3>& u) {
    return garch11_loss(z, detail::garch_from_free(u), msf);
  };
  parallel_for(starts, config.threads, [&](std::size_t s) {
    const auto& st = kGarchStarts[s % kGarchStarts.size()];
    // Later passes through the start table shrink the persistence slightly.
    const double shrink = 1.0 - 0.1 * static_cast<double>(s / kGarchStarts.size());
    const GarchParams p0{msf * (1.0 - shrink * (st[0] + st[1])), shrink * st[0], shrink * st[1]};
    runs[s] = optim::nelder_mead<3>(objective, detail::garch_to_free(p0), 0.3,
                                    config.max_iterations, config.tolerance);
  });
  std::size_t best = 0;
  for (std::size_t s = 1; s < starts; ++s)
    if (runs[s].value < runs[best].value) best = s;
  const auto params = detail::garch_from_free(runs[best].best);
  if (!std::isfinite(runs[best].value))
    throw OptimizationError("GARCH(1,1) fit: every start produced a non-finite objective",
                            params.alpha, params.omega, params.zeta);

  FitResult r;
  r.model = Model::garch11;
  r.lag_steps = incs.lag_steps;
  r.alpha = params.alpha;
  r.omega = params.omega;
  r.zeta = params.zeta;
  const auto se = detail::garch_standard_errors(z, runs[best].best, msf);
  r.se_alpha = se[0];
  r.se_omega = se[1];
  r.se_zeta = se[2];
  r.loss = runs[best].value;
  r.iterations = runs[best].iterations;
  r.converged = runs[best].converged;
  r.sample_count = z.size();
  return r;
}

}  // namespace incvol
