#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "incvol/error.hpp"
#include "incvol/series.hpp"
#include "incvol/stats.hpp"

namespace incvol {

// Cross-member estimates of sigma^2(t) = <x^2(t)>.
struct VarianceCurve {
  std::vector<std::size_t> times;
  std::vector<double> variances;
  std::vector<double> stderrs;
  std::size_t member_count = 0;

  bool operator==(const VarianceCurve&) const = default;
};

// <x^2(t, -T)> across members.
struct MsfEstimate {
  std::size_t t = 0;
  std::size_t lag_steps = 1;
  double value = 0.0;
  double std_error = 0.0;
  std::size_t sample_count = 0;

  bool operator==(const MsfEstimate&) const = default;
};

enum class AutocorrMethod { direct, identity };

// <x(t, -T) x(t, T)>: the product of the increment ending at t and the one
// starting there.
struct AutocorrEstimate {
  std::size_t t = 0;
  std::size_t lag_steps = 1;
  double value = 0.0;
  double std_error = 0.0;
  std::size_t sample_count = 0;
  AutocorrMethod method = AutocorrMethod::direct;
  // sqrt(<x^2(t,-T)> <x^2(t,T)>) on the same sample; |value| never exceeds it.
  double bound = 0.0;

  bool operator==(const AutocorrEstimate&) const = default;
};

// Equal-width bins spanning mean +- sd_span sample deviations, unless
// explicit edges are given. Samples outside the span land in the end bins.
struct BinSpec {
  std::size_t count = 32;
  double sd_span = 4.0;
  std::vector<double> edges;

  bool operator==(const BinSpec&) const = default;
};

struct DensityHistogram {
  std::vector<double> bin_edges;
  std::vector<double> masses;
  std::size_t t = 0;
  std::size_t lag_steps = 1;
  std::size_t sample_count = 0;

  bool operator==(const DensityHistogram&) const = default;
};

enum class Conditioning { level, previous_squared_increment };

// Mean squared forward increment (x(t+T) - x(t))^2 per bin of the
// conditioning variable. centers holds the in-bin mean of that variable.
struct ConditionalMsfTable {
  Conditioning conditioning = Conditioning::previous_squared_increment;
  std::size_t t = 0;
  std::size_t lag_steps = 1;
  std::vector<double> bin_edges;
  std::vector<double> centers;
  std::vector<double> values;
  std::vector<double> stderrs;
  std::vector<std::size_t> counts;
  std::size_t min_count = 50;

  bool populated(std::size_t bin) const { return counts[bin] >= min_count; }
  bool operator==(const ConditionalMsfTable&) const = default;
};

enum class StationarityVerdict { stationary, nonstationary, inconclusive };

struct StationarityReport {
  std::size_t lag_steps = 1;
  std::vector<std::size_t> probe_times;
  // Distance of each probe's increment sample to the earliest probe's; the
  // earliest probe carries 0.
  std::vector<double> ks_statistics;
  std::vector<double> p_values;
  double significance = 0.01;
  // Bonferroni-corrected critical distance.
  double threshold = 0.0;
  // min(1, comparisons * smallest p-value).
  double combined_p_value = 1.0;
  std::size_t sample_count = 0;
  StationarityVerdict verdict = StationarityVerdict::inconclusive;

  bool operator==(const StationarityReport&) const = default;
};

enum class LinearityVerdict { linear, nonlinear, inconclusive };

struct LinearityReport {
  double intercept = 0.0;
  double slope = 0.0;
  double se_intercept = 0.0;
  double se_slope = 0.0;
  double max_relative_residual = 0.0;
  // Largest |residual| / std_error; 0 when the curve carries no errors.
  double max_residual_z = 0.0;
  double r_squared = 1.0;
  double tolerance = 0.05;
  LinearityVerdict verdict = LinearityVerdict::inconclusive;

  bool operator==(const LinearityReport&) const = default;
};

inline std::string_view to_string(StationarityVerdict v) {
  switch (v) {
    case StationarityVerdict::stationary: return "stationary";
    case StationarityVerdict::nonstationary: return "nonstationary";
    case StationarityVerdict::inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

inline std::string_view to_string(LinearityVerdict v) {
  switch (v) {
    case LinearityVerdict::linear: return "linear";
    case LinearityVerdict::nonlinear: return "nonlinear";
    case LinearityVerdict::inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

inline std::string_view to_string(AutocorrMethod m) {
  return m == AutocorrMethod::direct ? "direct" : "identity";
}

inline std::string_view to_string(Conditioning c) {
  return c == Conditioning::level ? "level_x" : "previous_squared_increment";
}

namespace detail {

inline void require_index(const Ensemble& ens, std::size_t t, std::string_view what) {
  if (t >= ens.length())
    throw SizeError(std::string(what) + " index " + std::to_string(t) +
                    " outside member length " + std::to_string(ens.length()));
}

inline void require_lag(std::size_t lag) {
  if (lag == 0) throw SizeError("lag must be positive");
}

// Requires lag <= t and t + lag < length, i.e. both adjacent increments exist.
inline void require_two_sided(const Ensemble& ens, std::size_t t, std::size_t lag) {
  require_lag(lag);
  if (t < lag) throw SizeError("probe time " + std::to_string(t) + " earlier than lag " +
                               std::to_string(lag));
  require_index(ens, t + lag, "forward increment end");
}

inline std::vector<double> make_edges(std::span<const double> sample, const BinSpec& spec) {
  if (!spec.edges.empty()) {
    if (spec.edges.size() < 2) throw SizeError("explicit bins need at least 2 edges");
    for (std::size_t i = 1; i < spec.edges.size(); ++i)
      if (!(spec.edges[i] > spec.edges[i - 1]))
        throw DomainError("bin edges must be strictly increasing");
    return spec.edges;
  }
  if (spec.count == 0) throw SizeError("bin count must be positive");
  const auto m = stats::moments(sample);
  double half = spec.sd_span * m.sd;
  if (!(half > 0.0)) half = 0.5;
  const double lo = m.mean - half;
  const double width = 2.0 * half / static_cast<double>(spec.count);
  std::vector<double> edges(spec.count + 1);
  for (std::size_t i = 0; i <= spec.count; ++i) edges[i] = lo + width * static_cast<double>(i);
  edges.back() = m.mean + half;
  return edges;
}

inline std::size_t bin_of(const std::vector<double>& edges, double v) {
  const auto it = std::upper_bound(edges.begin(), edges.end(), v);
  const auto idx = static_cast<std::ptrdiff_t>(it - edges.begin()) - 1;
  return static_cast<std::size_t>(
      std::clamp<std::ptrdiff_t>(idx, 0, static_cast<std::ptrdiff_t>(edges.size()) - 2));
}

}  // namespace detail

// x(t) - x(t - T) for every member.
inline std::vector<double> increment_sample(const Ensemble& ens, std::size_t t,
                                            std::size_t lag_steps) {
  detail::require_lag(lag_steps);
  detail::require_index(ens, t, "probe");
  if (t < lag_steps) throw SizeError("probe time earlier than lag");
  std::vector<double> out(ens.member_count());
  for (std::size_t m = 0; m < out.size(); ++m) out[m] = ens.at(m, t) - ens.at(m, t - lag_steps);
  return out;
}

inline VarianceCurve variance_curve(const Ensemble& ens, std::span<const std::size_t> probe_times) {
  VarianceCurve curve;
  curve.member_count = ens.member_count();
  std::vector<double> sq(ens.member_count());
  for (std::size_t t : probe_times) {
    detail::require_index(ens, t, "probe");
    for (std::size_t m = 0; m < sq.size(); ++m) sq[m] = ens.at(m, t) * ens.at(m, t);
    const auto mo = stats::moments(sq);
    curve.times.push_back(t);
    curve.variances.push_back(mo.mean);
    curve.stderrs.push_back(mo.stderr_of_mean());
  }
  return curve;
}

inline MsfEstimate msf(const Ensemble& ens, std::size_t t, std::size_t lag_steps) {
  const auto inc = increment_sample(ens, t, lag_steps);
  std::vector<double> sq(inc.size());
  for (std::size_t m = 0; m < inc.size(); ++m) sq[m] = inc[m] * inc[m];
  const auto mo = stats::moments(sq);
  return {t, lag_steps, mo.mean, mo.stderr_of_mean(), sq.size()};
}

inline AutocorrEstimate increment_autocorr_direct(const Ensemble& ens, std::size_t t,
                                                  std::size_t lag_steps) {
  detail::require_two_sided(ens, t, lag_steps);
  const std::size_t n = ens.member_count();
  std::vector<double> prod(n);
  double back_sq = 0.0, fwd_sq = 0.0;
  for (std::size_t m = 0; m < n; ++m) {
    const double back = ens.at(m, t) - ens.at(m, t - lag_steps);
    const double fwd = ens.at(m, t + lag_steps) - ens.at(m, t);
    prod[m] = back * fwd;
    back_sq += back * back;
    fwd_sq += fwd * fwd;
  }
  const auto mo = stats::moments(prod);
  const double dn = static_cast<double>(n);
  return {t,  lag_steps, mo.mean, mo.stderr_of_mean(), n, AutocorrMethod::direct,
          std::sqrt(back_sq / dn * (fwd_sq / dn))};
}

// Same quantity through mean square fluctuations only:
// [<(x(t+T) - x(t-T))^2> - <x^2(t,-T)> - <x^2(t,T)>] / 2.
inline AutocorrEstimate increment_autocorr_identity(const Ensemble& ens, std::size_t t,
                                                    std::size_t lag_steps) {
  detail::require_two_sided(ens, t, lag_steps);
  const std::size_t n = ens.member_count();
  std::vector<double> half_diff(n);
  double span_sq = 0.0, back_sq = 0.0, fwd_sq = 0.0;
  for (std::size_t m = 0; m < n; ++m) {
    const double span = ens.at(m, t + lag_steps) - ens.at(m, t - lag_steps);
    const double back = ens.at(m, t) - ens.at(m, t - lag_steps);
    const double fwd = ens.at(m, t + lag_steps) - ens.at(m, t);
    span_sq += span * span;
    back_sq += back * back;
    fwd_sq += fwd * fwd;
    half_diff[m] = 0.5 * (span * span - back * back - fwd * fwd);
  }
  const double dn = static_cast<double>(n);
  const double msf_span = span_sq / dn;
  const double msf_back = back_sq / dn;
  const double msf_fwd = fwd_sq / dn;
  const auto mo = stats::moments(half_diff);
  return {t,  lag_steps, 0.5 * (msf_span - msf_back - msf_fwd), mo.stderr_of_mean(), n,
          AutocorrMethod::identity, std::sqrt(msf_back * msf_fwd)};
}

// Normalized histogram of z = x(t + T) - x(t).
inline DensityHistogram increment_density(const Ensemble& ens, std::size_t t,
                                          std::size_t lag_steps, const BinSpec& bins = {}) {
  detail::require_lag(lag_steps);
  if (ens.member_count() == 0) throw SizeError("empty ensemble");
  detail::require_index(ens, t + lag_steps, "increment end");
  std::vector<double> z(ens.member_count());
  for (std::size_t m = 0; m < z.size(); ++m) z[m] = ens.at(m, t + lag_steps) - ens.at(m, t);
  DensityHistogram h;
  h.t = t;
  h.lag_steps = lag_steps;
  h.sample_count = z.size();
  h.bin_edges = detail::make_edges(z, bins);
  std::vector<std::size_t> counts(h.bin_edges.size() - 1, 0);
  for (double v : z) ++counts[detail::bin_of(h.bin_edges, v)];
  h.masses.resize(counts.size());
  const double dn = static_cast<double>(z.size());
  for (std::size_t i = 0; i < counts.size(); ++i) h.masses[i] = static_cast<double>(counts[i]) / dn;
  return h;
}

inline constexpr std::size_t kMinStationaritySamples = 200;

// Two-sample KS comparison of the increment x(t, -T) at each probe with the
// earliest probe.
inline StationarityReport stationarity_test(const Ensemble& ens, std::size_t lag_steps,
                                            std::vector<std::size_t> probe_times,
                                            double significance,
                                            std::size_t min_samples = kMinStationaritySamples) {
  if (!(significance > 0.0 && significance < 1.0))
    throw DomainError("significance must lie in (0, 1)");
  std::sort(probe_times.begin(), probe_times.end());
  probe_times.erase(std::unique(probe_times.begin(), probe_times.end()), probe_times.end());
  StationarityReport r;
  r.lag_steps = lag_steps;
  r.probe_times = probe_times;
  r.significance = significance;
  r.sample_count = ens.member_count();
  if (probe_times.size() < 2 || ens.member_count() < min_samples) {
    r.ks_statistics.assign(probe_times.size(), 0.0);
    r.p_values.assign(probe_times.size(), 1.0);
    r.verdict = StationarityVerdict::inconclusive;
    return r;
  }
  const auto reference = increment_sample(ens, probe_times.front(), lag_steps);
  const std::size_t comparisons = probe_times.size() - 1;
  r.threshold = stats::ks_critical_value(significance / static_cast<double>(comparisons),
                                         reference.size(), reference.size());
  r.ks_statistics.push_back(0.0);
  r.p_values.push_back(1.0);
  double min_p = 1.0;
  bool rejected = false;
  for (std::size_t i = 1; i < probe_times.size(); ++i) {
    const auto sample = increment_sample(ens, probe_times[i], lag_steps);
    const double d = stats::ks_statistic(reference, sample);
    const double p = stats::ks_p_value(d, reference.size(), sample.size());
    r.ks_statistics.push_back(d);
    r.p_values.push_back(p);
    min_p = std::min(min_p, p);
    rejected = rejected || d > r.threshold;
  }
  r.combined_p_value = std::min(1.0, static_cast<double>(comparisons) * min_p);
  r.verdict = rejected ? StationarityVerdict::nonstationary : StationarityVerdict::stationary;
  return r;
}

inline constexpr std::size_t kMinBinCount = 50;

inline ConditionalMsfTable conditional_msf(const Ensemble& ens, std::size_t t,
                                           std::size_t lag_steps, Conditioning conditioning,
                                           const BinSpec& bins = {},
                                           std::size_t min_count = kMinBinCount) {
  detail::require_two_sided(ens, t, lag_steps);
  const std::size_t n = ens.member_count();
  std::vector<double> cond(n), fwd_sq(n);
  for (std::size_t m = 0; m < n; ++m) {
    const double back = ens.at(m, t) - ens.at(m, t - lag_steps);
    const double fwd = ens.at(m, t + lag_steps) - ens.at(m, t);
    cond[m] = conditioning == Conditioning::level ? ens.at(m, t) : back * back;
    fwd_sq[m] = fwd * fwd;
  }
  ConditionalMsfTable table;
  table.conditioning = conditioning;
  table.t = t;
  table.lag_steps = lag_steps;
  table.min_count = min_count;
  table.bin_edges = detail::make_edges(cond, bins);
  const std::size_t nb = table.bin_edges.size() - 1;
  std::vector<std::vector<double>> ys(nb), xs(nb);
  for (std::size_t m = 0; m < n; ++m) {
    const auto b = detail::bin_of(table.bin_edges, cond[m]);
    ys[b].push_back(fwd_sq[m]);
    xs[b].push_back(cond[m]);
  }
  bool any = false;
  for (std::size_t b = 0; b < nb; ++b) {
    const auto my = stats::moments(ys[b]);
    const auto mx = stats::moments(xs[b]);
    table.counts.push_back(ys[b].size());
    table.values.push_back(my.mean);
    table.stderrs.push_back(my.stderr_of_mean());
    table.centers.push_back(ys[b].empty()
                                ? 0.5 * (table.bin_edges[b] + table.bin_edges[b + 1])
                                : mx.mean);
    any = any || ys[b].size() >= min_count;
  }
  if (!any)
    throw SizeError("every conditional bin holds fewer than " + std::to_string(min_count) +
                    " samples");
  return table;
}

// Weighted line through the populated bins: value = intercept + slope * center.
inline stats::LineFit conditional_slope(const ConditionalMsfTable& table) {
  std::vector<double> x, y, w;
  for (std::size_t b = 0; b < table.counts.size(); ++b) {
    if (!table.populated(b) || !(table.stderrs[b] > 0.0)) continue;
    x.push_back(table.centers[b]);
    y.push_back(table.values[b]);
    w.push_back(1.0 / (table.stderrs[b] * table.stderrs[b]));
  }
  if (x.size() < 2) throw SizeError("conditional slope needs at least 2 populated bins");
  return stats::fit_line(x, y, w);
}

inline LinearityReport linearity_test(const VarianceCurve& curve, double tolerance = 0.05) {
  const std::size_t n = curve.times.size();
  if (n < 3) throw SizeError("linearity test needs at least 3 probe times");
  std::vector<double> t(n), w;
  for (std::size_t i = 0; i < n; ++i) t[i] = static_cast<double>(curve.times[i]);
  const bool has_errors = std::all_of(curve.stderrs.begin(), curve.stderrs.end(),
                                      [](double s) { return s > 0.0; });
  if (has_errors)
    for (double s : curve.stderrs) w.push_back(1.0 / (s * s));
  const auto fit = stats::fit_line(t, curve.variances, w);
  LinearityReport r;
  r.intercept = fit.intercept;
  r.slope = fit.slope;
  r.se_intercept = fit.se_intercept;
  r.se_slope = fit.se_slope;
  r.r_squared = fit.r_squared;
  r.tolerance = tolerance;
  double scale = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double fitted = fit.intercept + fit.slope * t[i];
    const double resid = std::abs(curve.variances[i] - fitted);
    const double denom = std::max(std::abs(fitted), std::abs(curve.variances[i]));
    r.max_relative_residual = std::max(r.max_relative_residual, denom > 0.0 ? resid / denom : 0.0);
    if (has_errors) r.max_residual_z = std::max(r.max_residual_z, resid / curve.stderrs[i]);
    scale = std::max(scale, std::abs(curve.variances[i]));
  }
  const bool intercept_ok = std::abs(fit.intercept) <= 3.0 * fit.se_intercept + 1e-12 * scale;
  if (r.max_relative_residual <= tolerance && intercept_ok)
    r.verdict = LinearityVerdict::linear;
  else if (!has_errors || !intercept_ok || r.max_residual_z > 3.0)
    r.verdict = LinearityVerdict::nonlinear;
  else
    r.verdict = LinearityVerdict::inconclusive;
  return r;
}

}  // namespace incvol
