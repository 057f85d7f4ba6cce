#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

#include "incvol/error.hpp"

namespace incvol::stats {

// Neumaier-compensated accumulator. Summation order is the caller's order.
class Sum {
 public:
  void add(double x) noexcept {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      carry_ += (sum_ - t) + x;
    else
      carry_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const noexcept { return sum_ + carry_; }

 private:
  double sum_ = 0.0;
  double carry_ = 0.0;
};

struct Moments {
  double mean = 0.0;
  double sd = 0.0;  // sample standard deviation (n - 1)
  std::size_t count = 0;

  double stderr_of_mean() const noexcept {
    return count > 0 ? sd / std::sqrt(static_cast<double>(count)) : 0.0;
  }
};

inline Moments moments(std::span<const double> xs) {
  Moments m;
  m.count = xs.size();
  if (xs.empty()) return m;
  Sum s;
  for (double x : xs) s.add(x);
  m.mean = s.value() / static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - m.mean) * (x - m.mean);
    m.sd = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  }
  return m;
}

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

// Two-sided p-value of a standard normal statistic.
inline double two_sided_p(double z) {
  if (std::isnan(z)) return 1.0;
  return std::erfc(std::abs(z) / std::numbers::sqrt2);
}

// P(K > lambda) for the Kolmogorov distribution.
inline double kolmogorov_survival(double lambda) {
  if (lambda <= 0.0) return 1.0;
  if (lambda < 0.2) return 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 == 1 ? term : -term);
    if (term < 1e-16) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

// sup |F_a - F_b| over the pooled sample.
inline double ks_statistic(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw SizeError("KS statistic needs two non-empty samples");
  std::vector<double> x(a.begin(), a.end()), y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double na = static_cast<double>(x.size()), nb = static_cast<double>(y.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < x.size() && j < y.size()) {
    const double v = std::min(x[i], y[j]);
    while (i < x.size() && x[i] == v) ++i;
    while (j < y.size() && y[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

// One-sample distance to a continuous CDF.
template <class Cdf>
double ks_statistic_to_cdf(std::span<const double> a, Cdf&& cdf) {
  if (a.empty()) throw SizeError("KS statistic needs a non-empty sample");
  std::vector<double> x(a.begin(), a.end());
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = cdf(x[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

// Asymptotic critical distance c(alpha) * sqrt((n + m) / (n m)) with
// c(alpha) = sqrt(-ln(alpha / 2) / 2). Pass m = 0 for the one-sample case.
inline double ks_critical_value(double alpha, std::size_t n, std::size_t m = 0) {
  const double c = std::sqrt(-0.5 * std::log(alpha / 2.0));
  const double dn = static_cast<double>(n);
  if (m == 0) return c / std::sqrt(dn);
  const double dm = static_cast<double>(m);
  return c * std::sqrt((dn + dm) / (dn * dm));
}

inline double ks_p_value(double d, std::size_t n, std::size_t m = 0) {
  const double dn = static_cast<double>(n);
  const double ne = m == 0 ? dn : dn * static_cast<double>(m) / (dn + static_cast<double>(m));
  return kolmogorov_survival(std::sqrt(ne) * d);
}

// Straight-line least squares y = intercept + slope * x.
struct LineFit {
  double intercept = 0.0;
  double slope = 0.0;
  double se_intercept = 0.0;
  double se_slope = 0.0;
  double r_squared = 1.0;
  // Weighted residual sum of squares over n - 2.
  double residual_variance = 0.0;
  std::size_t count = 0;
};

enum class ErrorScale {
  automatic,      // from the weights when given, else from the residuals
  from_residuals  // weights are only relative; rescale by the residual variance
};

// Straight-line (weighted) least squares. With automatic scaling the weights
// are taken as exact inverse variances.
inline LineFit fit_line(std::span<const double> x, std::span<const double> y,
                        std::span<const double> weights = {},
                        ErrorScale error_scale = ErrorScale::automatic) {
  const std::size_t n = x.size();
  if (n != y.size() || (!weights.empty() && weights.size() != n))
    throw SizeError("line fit inputs differ in length");
  if (n < 2) throw SizeError("line fit needs at least 2 points");
  const bool weighted = !weights.empty();
  auto w = [&](std::size_t i) { return weighted ? weights[i] : 1.0; };
  Sum sw, swx, swy;
  for (std::size_t i = 0; i < n; ++i) {
    sw.add(w(i));
    swx.add(w(i) * x[i]);
    swy.add(w(i) * y[i]);
  }
  const double xbar = swx.value() / sw.value(), ybar = swy.value() / sw.value();
  Sum sxx, sxy, syy;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - xbar, dy = y[i] - ybar;
    sxx.add(w(i) * dx * dx);
    sxy.add(w(i) * dx * dy);
    syy.add(w(i) * dy * dy);
  }
  if (!(sxx.value() > 0.0)) throw SingularityError("line fit regressor has zero spread");
  LineFit f;
  f.count = n;
  f.slope = sxy.value() / sxx.value();
  f.intercept = ybar - f.slope * xbar;
  Sum ssr;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - f.intercept - f.slope * x[i];
    ssr.add(w(i) * r * r);
  }
  f.r_squared = syy.value() > 0.0 ? 1.0 - ssr.value() / syy.value() : 1.0;
  f.residual_variance = n > 2 ? ssr.value() / static_cast<double>(n - 2) : 0.0;
  const bool exact_weights = weighted && error_scale == ErrorScale::automatic;
  const double scale = exact_weights ? 1.0 : f.residual_variance;
  f.se_slope = std::sqrt(scale / sxx.value());
  f.se_intercept = std::sqrt(scale * (1.0 / sw.value() + xbar * xbar / sxx.value()));
  return f;
}

}  // namespace incvol::stats
