#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "incvol/error.hpp"
#include "incvol/estimators.hpp"
#include "incvol/model_fit.hpp"
#include "incvol/parallel.hpp"
#include "incvol/series.hpp"
#include "incvol/stats.hpp"

namespace incvol {

enum class Evidence { pass, fail, inconclusive };
enum class Memory { present, absent, inconclusive };
enum class ConsistencyVerdict { white_noise_consistent, memory_detected, contradiction_flagged };
enum class WhiteNoiseVerdict { consistent, alpha_must_vanish, omega_must_vanish, violated };
enum class GarchWhiteNoiseVerdict { consistent, constraints_forced };

inline std::string_view to_string(Evidence e) {
  switch (e) {
    case Evidence::pass: return "pass";
    case Evidence::fail: return "fail";
    case Evidence::inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

inline std::string_view to_string(Memory m) {
  switch (m) {
    case Memory::present: return "present";
    case Memory::absent: return "absent";
    case Memory::inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

inline std::string_view to_string(ConsistencyVerdict v) {
  switch (v) {
    case ConsistencyVerdict::white_noise_consistent: return "white_noise_consistent";
    case ConsistencyVerdict::memory_detected: return "memory_detected";
    case ConsistencyVerdict::contradiction_flagged: return "contradiction_flagged";
  }
  return "memory_detected";
}

inline std::string_view to_string(WhiteNoiseVerdict v) {
  switch (v) {
    case WhiteNoiseVerdict::consistent: return "consistent";
    case WhiteNoiseVerdict::alpha_must_vanish: return "alpha_must_vanish";
    case WhiteNoiseVerdict::omega_must_vanish: return "omega_must_vanish";
    case WhiteNoiseVerdict::violated: return "violated";
  }
  return "violated";
}

inline std::string_view to_string(GarchWhiteNoiseVerdict v) {
  return v == GarchWhiteNoiseVerdict::consistent ? "consistent" : "constraints_forced";
}

// A property passes only when it is not even marginally rejected at this
// level, and fails only when rejected at the requested significance. The
// band in between is inconclusive, so tightening the significance can only
// move a verdict from fail to inconclusive.
inline constexpr double kPassLevel = 0.05;

inline Evidence classify_p_value(double p, double significance) {
  if (std::isnan(p)) return Evidence::inconclusive;
  if (p < significance) return Evidence::fail;
  if (p >= kPassLevel) return Evidence::pass;
  return Evidence::inconclusive;
}

// Thresholds for the per-lag ARCH(1) constraint logic.
struct WhiteNoiseTolerance {
  double se_multiple = 3.0;  // |omega(T)| allowed up to se_multiple * SE
  double absolute = 0.0;     // ... or this much, whichever is larger
  // Max relative deviation of alpha(T) / (1 - omega(T)) from c * T.
  double profile_tolerance = 0.05;

  bool operator==(const WhiteNoiseTolerance&) const = default;
};

struct WhiteNoiseResult {
  WhiteNoiseVerdict verdict = WhiteNoiseVerdict::violated;
  std::vector<std::size_t> lags;
  std::vector<double> profile;  // alpha(T) / (1 - omega(T))
  double profile_scale = 0.0;   // c of the best fit c * T
  double max_profile_deviation = 0.0;
  bool omega_within_tolerance = false;

  bool operator==(const WhiteNoiseResult&) const = default;
};

// Under white noise the ARCH(1) profile alpha(T) / (1 - omega(T)) has to
// reproduce T <x^2(0,1)>, which only works for omega(T) = 0 and alpha
// proportional to T.
inline WhiteNoiseResult white_noise_consistency(const std::map<std::size_t, FitResult>& fits_by_lag,
                                                const LinearityReport& linearity,
                                                const WhiteNoiseTolerance& tol = {}) {
  if (fits_by_lag.size() < 2) throw SizeError("white-noise consistency needs at least 2 lags");
  WhiteNoiseResult r;
  r.omega_within_tolerance = true;
  bool finite = true;
  stats::Sum num, den;
  for (const auto& [lag, fit] : fits_by_lag) {
    const double allowed = std::max(tol.absolute, tol.se_multiple * fit.se_omega);
    if (!(std::abs(fit.omega) <= allowed)) r.omega_within_tolerance = false;
    const double m = std::abs(fit.omega) < 1.0 ? fit.alpha / (1.0 - fit.omega)
                                               : std::numeric_limits<double>::infinity();
    finite = finite && std::isfinite(m);
    const double t = static_cast<double>(lag);
    r.lags.push_back(lag);
    r.profile.push_back(m);
    num.add(m * t);
    den.add(t * t);
  }
  r.profile_scale = num.value() / den.value();
  for (std::size_t i = 0; i < r.lags.size(); ++i) {
    const double expected = r.profile_scale * static_cast<double>(r.lags[i]);
    const double dev = expected != 0.0 ? std::abs(r.profile[i] - expected) / std::abs(expected)
                                       : std::numeric_limits<double>::infinity();
    r.max_profile_deviation = std::max(r.max_profile_deviation, dev);
  }
  const bool proportional = finite && r.max_profile_deviation <= tol.profile_tolerance;
  if (!finite || linearity.verdict == LinearityVerdict::nonlinear)
    r.verdict = WhiteNoiseVerdict::violated;
  else if (r.omega_within_tolerance && proportional)
    r.verdict = WhiteNoiseVerdict::consistent;
  else if (!r.omega_within_tolerance)
    r.verdict = WhiteNoiseVerdict::omega_must_vanish;
  else
    r.verdict = WhiteNoiseVerdict::alpha_must_vanish;
  return r;
}

// White-noise increments force alpha = 0 and omega + zeta = 0 in GARCH(1,1).
inline GarchWhiteNoiseVerdict garch_white_noise_check(const FitResult& fit, double tol) {
  if (fit.model != Model::garch11) throw UsageError("GARCH white-noise check needs a garch11 fit");
  if (fit.alpha > tol || fit.omega + fit.zeta > tol) return GarchWhiteNoiseVerdict::constraints_forced;
  return GarchWhiteNoiseVerdict::consistent;
}

struct FalsificationConfig {
  std::size_t window_steps = 100;
  std::vector<std::size_t> lags{1, 2, 4, 8};
  double significance = 0.01;
  double linearity_tolerance = 0.05;
  WhiteNoiseTolerance white_noise{};
  BinSpec bins{};
  std::size_t min_members = 100;
  std::size_t curve_points = 8;
  unsigned threads = 1;

  bool operator==(const FalsificationConfig&) const = default;
};

// Where the analysed series came from. params keeps insertion order.
struct InputDescriptor {
  std::string kind;  // "generator" or "file"
  std::string name;  // model name or file path
  std::string digest;
  std::size_t length = 0;
  std::vector<std::pair<std::string, double>> params;
  std::uint64_t seed = 0;

  bool operator==(const InputDescriptor&) const = default;
};

struct LagDiagnostics {
  std::size_t lag_steps = 1;
  StationarityReport stationarity;
  Evidence stationarity_evidence = Evidence::inconclusive;
  std::vector<AutocorrEstimate> autocorr;
  MsfEstimate msf;
  bool conditional_available = false;
  ConditionalMsfTable conditional;
  double memory_slope = 0.0;
  double memory_slope_se = 0.0;
  double memory_p_value = std::numeric_limits<double>::quiet_NaN();
  DensityHistogram density;

  bool operator==(const LagDiagnostics&) const = default;
};

struct Diagnostics {
  std::size_t member_count = 0;
  std::size_t discarded = 0;
  std::size_t window_steps = 0;
  std::vector<LagDiagnostics> lags;
  VarianceCurve variance;
  LinearityReport linearity;
  double autocorr_p_value = 1.0;
  double memory_p_value = 1.0;
  Evidence increment_stationarity = Evidence::inconclusive;
  Evidence uncorrelated_increments = Evidence::inconclusive;
  Evidence variance_linearity = Evidence::inconclusive;
  Memory conditional_memory = Memory::inconclusive;

  bool operator==(const Diagnostics&) const = default;
};

struct FalsificationReport {
  InputDescriptor input;
  FalsificationConfig config;
  Diagnostics diagnostics;
  std::vector<FitResult> arch_fits;  // ascending lag
  WhiteNoiseResult white_noise;
  ConsistencyVerdict consistency_verdict = ConsistencyVerdict::memory_detected;
  std::string narrative;

  bool operator==(const FalsificationReport&) const = default;
};

namespace detail {

inline std::vector<std::size_t> unique_sorted(std::vector<std::size_t> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

// Roughly log-spaced integer probes in [lo, hi].
inline std::vector<std::size_t> log_spaced(std::size_t lo, std::size_t hi, std::size_t count) {
  lo = std::max<std::size_t>(1, lo);
  if (hi <= lo || count < 2) return {lo};
  std::vector<std::size_t> out;
  const double ratio = std::log(static_cast<double>(hi) / static_cast<double>(lo));
  for (std::size_t i = 0; i < count; ++i) {
    const double f = static_cast<double>(i) / static_cast<double>(count - 1);
    out.push_back(static_cast<std::size_t>(
        std::llround(static_cast<double>(lo) * std::exp(ratio * f))));
  }
  return unique_sorted(std::move(out));
}

inline Evidence stationarity_evidence(const Ensemble& ens, const StationarityReport& at_level) {
  if (at_level.verdict == StationarityVerdict::inconclusive) return Evidence::inconclusive;
  if (at_level.verdict == StationarityVerdict::nonstationary) return Evidence::fail;
  const auto loose = stationarity_test(ens, at_level.lag_steps, at_level.probe_times, kPassLevel);
  return loose.verdict == StationarityVerdict::stationary ? Evidence::pass : Evidence::inconclusive;
}

inline double bonferroni(const std::vector<double>& p_values) {
  double min_p = 1.0;
  std::size_t k = 0;
  for (double p : p_values) {
    if (std::isnan(p)) continue;
    min_p = std::min(min_p, p);
    ++k;
  }
  if (k == 0) return std::numeric_limits<double>::quiet_NaN();
  return std::min(1.0, static_cast<double>(k) * min_p);
}

inline double z_p_value(double value, double se) {
  if (se > 0.0) return stats::two_sided_p(value / se);
  return value == 0.0 ? 1.0 : 0.0;
}

}  // namespace detail

// Probe times used by run_diagnostics for a window of `length` samples.
inline std::vector<std::size_t> stationarity_probes(std::size_t length, std::size_t lag) {
  return detail::unique_sorted({std::max(lag, length / 10), length / 2, length - 1});
}

inline std::vector<std::size_t> autocorr_probes(std::size_t length, std::size_t lag) {
  return detail::unique_sorted({lag, (length - 1) / 2, length - 1 - lag});
}

inline std::vector<std::size_t> variance_probes(std::size_t length, std::size_t count) {
  return detail::log_spaced(std::max<std::size_t>(1, length / 20), length - 1, count);
}

// Ensemble statistics behind the report, one branch per lag.
inline Diagnostics run_diagnostics(const Ensemble& ens, const FalsificationConfig& cfg) {
  if (!(cfg.significance > 0.0 && cfg.significance <= kPassLevel))
    throw UsageError("significance must lie in (0, " + std::to_string(kPassLevel) + "]");
  if (cfg.lags.empty()) throw UsageError("at least one lag is required");
  const std::size_t len = ens.length();
  for (std::size_t lag : cfg.lags)
    if (lag == 0 || 2 * lag >= len)
      throw SizeError("lag " + std::to_string(lag) + " needs a window longer than " +
                      std::to_string(2 * lag) + " samples");
  Diagnostics d;
  d.member_count = ens.member_count();
  d.discarded = ens.discarded();
  d.window_steps = len;
  const auto lags = detail::unique_sorted(cfg.lags);
  d.lags.resize(lags.size());
  const std::size_t mid = len / 2;

  parallel_for(lags.size(), cfg.threads, [&](std::size_t i) {
    auto& ld = d.lags[i];
    const std::size_t lag = lags[i];
    ld.lag_steps = lag;
    ld.stationarity = stationarity_test(ens, lag, stationarity_probes(len, lag), cfg.significance);
    ld.stationarity_evidence = detail::stationarity_evidence(ens, ld.stationarity);
    for (std::size_t t : autocorr_probes(len, lag))
      ld.autocorr.push_back(increment_autocorr_identity(ens, t, lag));
    ld.msf = msf(ens, mid, lag);
    try {
      ld.conditional = conditional_msf(ens, mid, lag, Conditioning::previous_squared_increment,
                                       cfg.bins);
      const auto slope = conditional_slope(ld.conditional);
      ld.conditional_available = true;
      ld.memory_slope = slope.slope;
      ld.memory_slope_se = slope.se_slope;
      ld.memory_p_value = detail::z_p_value(slope.slope, slope.se_slope);
    } catch (const SizeError&) {
      ld.conditional_available = false;
    } catch (const SingularityError&) {
      ld.conditional_available = false;
    }
    ld.density = increment_density(ens, mid, lag, cfg.bins);
  });

  d.variance = variance_curve(ens, variance_probes(len, cfg.curve_points));
  d.linearity = linearity_test(d.variance, cfg.linearity_tolerance);
  d.variance_linearity = d.linearity.verdict == LinearityVerdict::linear      ? Evidence::pass
                         : d.linearity.verdict == LinearityVerdict::nonlinear ? Evidence::fail
                                                                              : Evidence::inconclusive;

  bool any_fail = false, all_pass = true;
  std::vector<double> ac_p, mem_p;
  for (const auto& ld : d.lags) {
    any_fail = any_fail || ld.stationarity_evidence == Evidence::fail;
    all_pass = all_pass && ld.stationarity_evidence == Evidence::pass;
    for (const auto& a : ld.autocorr) ac_p.push_back(detail::z_p_value(a.value, a.std_error));
    mem_p.push_back(ld.memory_p_value);
  }
  d.increment_stationarity = any_fail ? Evidence::fail : all_pass ? Evidence::pass : Evidence::inconclusive;
  d.autocorr_p_value = detail::bonferroni(ac_p);
  d.uncorrelated_increments = classify_p_value(d.autocorr_p_value, cfg.significance);
  d.memory_p_value = detail::bonferroni(mem_p);
  switch (classify_p_value(d.memory_p_value, cfg.significance)) {
    case Evidence::fail: d.conditional_memory = Memory::present; break;
    case Evidence::pass: d.conditional_memory = Memory::absent; break;
    case Evidence::inconclusive: d.conditional_memory = Memory::inconclusive; break;
  }
  return d;
}

inline ConsistencyVerdict consistency_verdict(const Diagnostics& d) {
  const bool white = d.increment_stationarity == Evidence::pass &&
                     d.uncorrelated_increments == Evidence::pass;
  if (white && d.conditional_memory == Memory::present)
    return ConsistencyVerdict::contradiction_flagged;
  if (white && d.conditional_memory == Memory::absent && d.variance_linearity != Evidence::fail)
    return ConsistencyVerdict::white_noise_consistent;
  return ConsistencyVerdict::memory_detected;
}

inline constexpr std::string_view kClaimUnderTest =
    "memory in the conditional mean square fluctuation (ARCH/GARCH) cannot coexist with "
    "stationary, uncorrelated increments";

inline std::string make_narrative(const Diagnostics& d, const std::vector<std::size_t>& lags,
                                  ConsistencyVerdict verdict) {
  std::string lag_list;
  for (std::size_t i = 0; i < lags.size(); ++i)
    lag_list += (i ? "," : "") + std::to_string(lags[i]);
  std::string s = "lags {" + lag_list + "}: increment_stationarity=" +
                  std::string(to_string(d.increment_stationarity)) +
                  ", uncorrelated_increments=" + std::string(to_string(d.uncorrelated_increments)) +
                  ", variance_linearity=" + std::string(to_string(d.variance_linearity)) +
                  ", conditional_memory=" + std::string(to_string(d.conditional_memory)) + ". ";
  switch (verdict) {
    case ConsistencyVerdict::contradiction_flagged:
      s += "Conditional memory co-occurs with stationary, uncorrelated increments. Claim under "
           "test: " + std::string(kClaimUnderTest) +
           ". The co-occurrence is flagged as a contradiction with that claim; it is a measured "
           "combination, not a verdict on the claim.";
      break;
    case ConsistencyVerdict::white_noise_consistent:
      s += "No conditional memory and no increment correlation detected; the increments are "
           "consistent with white noise.";
      break;
    case ConsistencyVerdict::memory_detected: {
      std::vector<std::string> reasons;
      if (d.uncorrelated_increments != Evidence::pass)
        reasons.push_back("uncorrelated_increments=" + std::string(to_string(d.uncorrelated_increments)));
      if (d.increment_stationarity != Evidence::pass)
        reasons.push_back("increment_stationarity=" + std::string(to_string(d.increment_stationarity)));
      if (d.variance_linearity == Evidence::fail) reasons.push_back("variance_linearity=fail");
      if (d.conditional_memory != Memory::absent)
        reasons.push_back("conditional_memory=" + std::string(to_string(d.conditional_memory)));
      s += "White-noise increments not established (";
      for (std::size_t i = 0; i < reasons.size(); ++i) s += (i ? "; " : "") + reasons[i];
      s += ").";
      break;
    }
  }
  return s;
}

inline std::size_t required_length(const FalsificationConfig& cfg) {
  return cfg.min_members * cfg.window_steps;
}

// ensemble_split -> per-lag diagnostics -> variance linearity -> per-lag
// ARCH(1) fits on the full series -> white-noise constraint logic.
inline FalsificationReport falsification_report(const LevelSeries& series,
                                                const FalsificationConfig& cfg,
                                                InputDescriptor input = {}) {
  if (series.size() < required_length(cfg))
    throw SizeError("series of length " + std::to_string(series.size()) +
                    " is too short: at least " + std::to_string(required_length(cfg)) +
                    " samples are needed for " + std::to_string(cfg.min_members) +
                    " members of window " + std::to_string(cfg.window_steps));
  if (detail::unique_sorted(cfg.lags).size() < 2)
    throw UsageError("the falsification report needs at least 2 distinct lags");
  FalsificationReport r;
  r.config = cfg;
  r.config.lags = detail::unique_sorted(cfg.lags);
  r.input = std::move(input);
  if (r.input.length == 0) r.input.length = series.size();
  const auto ens = ensemble_split(series, cfg.window_steps);
  r.diagnostics = run_diagnostics(ens, r.config);

  r.arch_fits.resize(r.config.lags.size());
  parallel_for(r.config.lags.size(), cfg.threads, [&](std::size_t i) {
    r.arch_fits[i] = fit_arch1(increments(series, r.config.lags[i], false));
  });
  std::map<std::size_t, FitResult> by_lag;
  for (const auto& f : r.arch_fits) by_lag.emplace(f.lag_steps, f);
  if (by_lag.size() >= 2)
    r.white_noise = white_noise_consistency(by_lag, r.diagnostics.linearity, cfg.white_noise);
  r.consistency_verdict = consistency_verdict(r.diagnostics);
  r.narrative = make_narrative(r.diagnostics, r.config.lags, r.consistency_verdict);
  return r;
}

}  // namespace incvol
