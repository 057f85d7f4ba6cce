#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "incvol/error.hpp"
#include "incvol/parallel.hpp"
#include "incvol/random.hpp"
#include "incvol/series.hpp"

namespace incvol {

struct WienerParams {
  double sigma1_sq = 1.0;  // variance per unit time
};

// Conditional mean square fluctuation alpha + omega * e_prev^2.
struct ArchParams {
  double alpha = 0.2;
  double omega = 0.5;
};

// alpha + omega * e_prev^2 + zeta * v_prev.
struct GarchParams {
  double alpha = 0.1;
  double omega = 0.2;
  double zeta = 0.7;
};

// <x(s) x(t)> = sigma_sq / 2 * (s^2H + t^2H - |t - s|^2H)
struct FbmParams {
  double hurst = 0.5;
  double sigma_sq = 1.0;
};

// Independent increments with <x^2(t)> = sigma_sq * t^2H.
struct ScaledWienerParams {
  double hurst = 0.5;
  double sigma_sq = 1.0;
};

inline void validate(const WienerParams& p) {
  if (!(p.sigma1_sq > 0.0) || !std::isfinite(p.sigma1_sq))
    throw DomainError("sigma1_sq must be positive");
}

inline void validate(const ArchParams& p) {
  if (!(p.alpha > 0.0) || !std::isfinite(p.alpha)) throw DomainError("alpha must be positive");
  if (!(std::abs(p.omega) < 1.0)) throw DomainError("omega must satisfy |omega| < 1");
}

inline void validate(const GarchParams& p) {
  if (!(p.alpha > 0.0) || !std::isfinite(p.alpha)) throw DomainError("alpha must be positive");
  if (!(p.omega >= 0.0)) throw DomainError("omega must be non-negative");
  if (!(p.zeta >= 0.0)) throw DomainError("zeta must be non-negative");
  if (!(p.omega + p.zeta < 1.0)) throw DomainError("omega + zeta must be below 1");
}

namespace detail {
inline void validate_hurst(double hurst, double sigma_sq) {
  if (!(hurst > 0.0 && hurst < 1.0)) throw DomainError("hurst must lie in (0, 1)");
  if (!(sigma_sq > 0.0) || !std::isfinite(sigma_sq))
    throw DomainError("sigma_sq must be positive");
}

inline void require_length(std::size_t n) {
  if (n < 2) throw SizeError("a path needs at least 2 samples, got " + std::to_string(n));
}

inline LevelSeries from_increments(const std::vector<double>& inc, double step) {
  LevelSeries out;
  out.step = step;
  out.values.resize(inc.size() + 1);
  out.values[0] = 0.0;
  double level = 0.0;
  for (std::size_t k = 0; k < inc.size(); ++k) {
    level += inc[k];
    out.values[k + 1] = level;
  }
  return out;
}
}  // namespace detail

inline void validate(const FbmParams& p) { detail::validate_hurst(p.hurst, p.sigma_sq); }
inline void validate(const ScaledWienerParams& p) { detail::validate_hurst(p.hurst, p.sigma_sq); }

// All generators return n samples, x[0] = 0, built from n - 1 increments.

inline LevelSeries gen_wiener(const WienerParams& params, std::size_t n, double step,
                              std::uint64_t seed) {
  validate(params);
  detail::require_length(n);
  if (!(step > 0.0)) throw DomainError("step must be positive");
  NoiseSource z(seed);
  const double scale = std::sqrt(params.sigma1_sq * step);
  std::vector<double> inc(n - 1);
  for (auto& e : inc) e = scale * z();
  return detail::from_increments(inc, step);
}

// e[k] = z[k] * sqrt(alpha + omega e[k-1]^2), started at the stationary scale.
inline LevelSeries gen_arch1(const ArchParams& params, std::size_t n, std::uint64_t seed,
                             Noise noise = Noise::gaussian) {
  validate(params);
  detail::require_length(n);
  NoiseSource z(seed, noise);
  std::vector<double> inc(n - 1);
  inc[0] = std::sqrt(params.alpha / (1.0 - params.omega)) * z();
  for (std::size_t k = 1; k < inc.size(); ++k) {
    const double cond = params.alpha + params.omega * inc[k - 1] * inc[k - 1];
    if (!(cond > 0.0))
      throw DomainError("conditional mean square fluctuation became non-positive at step " +
                        std::to_string(k) + "; omega too negative for this noise");
    inc[k] = z() * std::sqrt(cond);
  }
  return detail::from_increments(inc, 1.0);
}

inline LevelSeries gen_garch11(const GarchParams& params, std::size_t n, std::uint64_t seed,
                               Noise noise = Noise::gaussian) {
  validate(params);
  detail::require_length(n);
  NoiseSource z(seed, noise);
  std::vector<double> inc(n - 1);
  double cond = params.alpha / (1.0 - params.omega - params.zeta);
  inc[0] = z() * std::sqrt(cond);
  for (std::size_t k = 1; k < inc.size(); ++k) {
    cond = params.alpha + params.omega * inc[k - 1] * inc[k - 1] + params.zeta * cond;
    inc[k] = z() * std::sqrt(cond);
  }
  return detail::from_increments(inc, 1.0);
}

inline LevelSeries gen_scaled_wiener(const ScaledWienerParams& params, std::size_t n,
                                     double step, std::uint64_t seed) {
  validate(params);
  detail::require_length(n);
  if (!(step > 0.0)) throw DomainError("step must be positive");
  NoiseSource z(seed);
  const double two_h = 2.0 * params.hurst;
  std::vector<double> inc(n - 1);
  double prev = 0.0;
  for (std::size_t k = 0; k < inc.size(); ++k) {
    const double now = std::pow(static_cast<double>(k + 1) * step, two_h);
    inc[k] = std::sqrt(params.sigma_sq * (now - prev)) * z();
    prev = now;
  }
  return detail::from_increments(inc, step);
}

inline constexpr std::size_t kFbmMaxLength = std::size_t{1} << 16;

// Exact fBm sampling. One-step increments form a stationary Gaussian
// sequence with Toeplitz covariance; the Durbin-Levinson recursion produces
// the rows of its Cholesky factor in innovations form,
//   g[k] = sum_j phi[k][j] g[k-1-j] + sqrt(v[k]) eps[k],
// so every path reproduces the covariance exactly. Coefficients are cached
// for paths up to kCacheLimit samples; longer paths recompute them on the
// fly with O(n) memory and O(n^2) time.
class FbmSampler {
 public:
  static constexpr std::size_t kCacheLimit = 4096;

  FbmSampler(const FbmParams& params, std::size_t n, double step,
             std::size_t max_length = kFbmMaxLength)
      : params_(params), n_(n), step_(step) {
    validate(params);
    detail::require_length(n);
    if (!(step > 0.0)) throw DomainError("step must be positive");
    if (n > max_length)
      throw ResourceError("fBm length " + std::to_string(n) + " exceeds the maximum " +
                          std::to_string(max_length) + " (generation is O(n^2))");
    const std::size_t m = n - 1;
    acov_.resize(m);
    const double scale = params.sigma_sq * std::pow(step, 2.0 * params.hurst) / 2.0;
    for (std::size_t k = 0; k < m; ++k) {
      const double kk = static_cast<double>(k);
      const double two_h = 2.0 * params.hurst;
      acov_[k] = scale * (std::pow(kk + 1.0, two_h) - 2.0 * std::pow(kk, two_h) +
                          std::pow(std::abs(kk - 1.0), two_h));
    }
    if (n <= kCacheLimit) {
      cached_ = true;
      rows_.reserve(m * (m - 1) / 2);
      innovation_sd_.reserve(m);
      walk([this](std::size_t, const std::vector<double>& phi, double v) {
        rows_.insert(rows_.end(), phi.begin(), phi.end());
        innovation_sd_.push_back(std::sqrt(v));
      });
    }
  }

  std::size_t length() const noexcept { return n_; }

  LevelSeries sample(std::uint64_t seed) const {
    NoiseSource z(seed);
    const std::size_t m = n_ - 1;
    std::vector<double> g(m);
    if (cached_) {
      std::size_t offset = 0;
      for (std::size_t k = 0; k < m; ++k) {
        double pred = 0.0;
        for (std::size_t j = 0; j < k; ++j) pred += rows_[offset + j] * g[k - 1 - j];
        offset += k;
        g[k] = pred + innovation_sd_[k] * z();
      }
    } else {
      walk([&](std::size_t k, const std::vector<double>& phi, double v) {
        double pred = 0.0;
        for (std::size_t j = 0; j < k; ++j) pred += phi[j] * g[k - 1 - j];
        g[k] = pred + std::sqrt(v) * z();
      });
    }
    return detail::from_increments(g, step_);
  }

  // Covariance of the one-step increments at lag k.
  const std::vector<double>& increment_autocovariance() const noexcept { return acov_; }

 private:
  // Visits row k with its k prediction coefficients and innovation variance.
  template <class Visit>
  void walk(Visit&& visit) const {
    const std::size_t m = n_ - 1;
    std::vector<double> phi, next;
    phi.reserve(m);
    next.reserve(m);
    double v = acov_[0];
    visit(0, phi, v);
    for (std::size_t k = 1; k < m; ++k) {
      double num = acov_[k];
      for (std::size_t j = 0; j + 1 < k; ++j) num -= phi[j] * acov_[k - 1 - j];
      const double reflection = num / v;
      next.resize(k);
      for (std::size_t j = 0; j + 1 < k; ++j) next[j] = phi[j] - reflection * phi[k - 2 - j];
      next[k - 1] = reflection;
      std::swap(phi, next);
      v *= (1.0 - reflection * reflection);
      if (!(v > 0.0)) throw DomainError("fBm covariance lost positive definiteness");
      visit(k, phi, v);
    }
  }

  FbmParams params_;
  std::size_t n_;
  double step_;
  std::vector<double> acov_;
  bool cached_ = false;
  std::vector<double> rows_;  // row k occupies k entries
  std::vector<double> innovation_sd_;
};

inline LevelSeries gen_fbm(const FbmParams& params, std::size_t n, double step,
                           std::uint64_t seed, std::size_t max_length = kFbmMaxLength) {
  return FbmSampler(params, n, step, max_length).sample(seed);
}

// Builds an ensemble whose member m is generate(substream_seed(seed, m)).
template <class Generate>
Ensemble simulate_ensemble(std::size_t members, std::uint64_t seed, Generate&& generate,
                           unsigned threads = 1) {
  if (members == 0) throw SizeError("ensemble needs at least one member");
  std::vector<LevelSeries> out(members);
  parallel_for(members, threads, [&](std::size_t m) { out[m] = generate(substream_seed(seed, m)); });
  return Ensemble(std::move(out));
}

}  // namespace incvol
