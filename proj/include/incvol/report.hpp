#pragma once

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

#include "incvol/error.hpp"
#include "incvol/estimators.hpp"
#include "incvol/falsify.hpp"
#include "incvol/json_format.hpp"
#include "incvol/model_fit.hpp"

// JSON mapping of every report type. Field order below is the on-disk order.

namespace incvol {

inline constexpr std::string_view kFalsificationSchema = "incvol-falsification/1";
inline constexpr std::string_view kDiagnosticsSchema = "incvol-diagnostics/1";
inline constexpr std::string_view kFitSchema = "incvol-fit/1";

namespace detail {

template <class E>
E enum_from_json(const Json& j, std::initializer_list<E> candidates) {
  const auto s = j.get<std::string>();
  for (E e : candidates)
    if (to_string(e) == s) return e;
  throw FormatError("unknown enumerator '" + s + "'");
}

inline Json doubles(const std::vector<double>& v) {
  Json a = Json::array();
  for (double x : v) a.push_back(x);
  return a;
}

inline std::vector<double> doubles_from(const Json& j) {
  std::vector<double> out;
  out.reserve(j.size());
  for (const auto& v : j) out.push_back(json_number(v));
  return out;
}

inline std::vector<std::size_t> sizes_from(const Json& j) {
  return j.get<std::vector<std::size_t>>();
}

}  // namespace detail

inline void to_json(Json& j, const VarianceCurve& c) {
  j = Json{{"times", c.times},
           {"variances", detail::doubles(c.variances)},
           {"stderrs", detail::doubles(c.stderrs)},
           {"member_count", c.member_count}};
}
inline void from_json(const Json& j, VarianceCurve& c) {
  c.times = detail::sizes_from(j.at("times"));
  c.variances = detail::doubles_from(j.at("variances"));
  c.stderrs = detail::doubles_from(j.at("stderrs"));
  c.member_count = j.at("member_count").get<std::size_t>();
}

inline void to_json(Json& j, const MsfEstimate& m) {
  j = Json{{"t", m.t},
           {"lag_steps", m.lag_steps},
           {"value", m.value},
           {"stderr", m.std_error},
           {"sample_count", m.sample_count}};
}
inline void from_json(const Json& j, MsfEstimate& m) {
  m.t = j.at("t").get<std::size_t>();
  m.lag_steps = j.at("lag_steps").get<std::size_t>();
  m.value = json_number(j.at("value"));
  m.std_error = json_number(j.at("stderr"));
  m.sample_count = j.at("sample_count").get<std::size_t>();
}

inline void to_json(Json& j, const AutocorrEstimate& a) {
  j = Json{{"t", a.t},
           {"lag_steps", a.lag_steps},
           {"value", a.value},
           {"stderr", a.std_error},
           {"sample_count", a.sample_count},
           {"method", to_string(a.method)},
           {"bound", a.bound}};
}
inline void from_json(const Json& j, AutocorrEstimate& a) {
  a.t = j.at("t").get<std::size_t>();
  a.lag_steps = j.at("lag_steps").get<std::size_t>();
  a.value = json_number(j.at("value"));
  a.std_error = json_number(j.at("stderr"));
  a.sample_count = j.at("sample_count").get<std::size_t>();
  a.method = detail::enum_from_json(j.at("method"), {AutocorrMethod::direct, AutocorrMethod::identity});
  a.bound = json_number(j.at("bound"));
}

inline void to_json(Json& j, const DensityHistogram& h) {
  j = Json{{"t", h.t},
           {"lag_steps", h.lag_steps},
           {"sample_count", h.sample_count},
           {"bin_edges", detail::doubles(h.bin_edges)},
           {"masses", detail::doubles(h.masses)}};
}
inline void from_json(const Json& j, DensityHistogram& h) {
  h.t = j.at("t").get<std::size_t>();
  h.lag_steps = j.at("lag_steps").get<std::size_t>();
  h.sample_count = j.at("sample_count").get<std::size_t>();
  h.bin_edges = detail::doubles_from(j.at("bin_edges"));
  h.masses = detail::doubles_from(j.at("masses"));
}

inline void to_json(Json& j, const ConditionalMsfTable& c) {
  j = Json{{"conditioning", to_string(c.conditioning)},
           {"t", c.t},
           {"lag_steps", c.lag_steps},
           {"min_count", c.min_count},
           {"bin_edges", detail::doubles(c.bin_edges)},
           {"centers", detail::doubles(c.centers)},
           {"values", detail::doubles(c.values)},
           {"stderrs", detail::doubles(c.stderrs)},
           {"counts", c.counts}};
}
inline void from_json(const Json& j, ConditionalMsfTable& c) {
  c.conditioning = detail::enum_from_json(
      j.at("conditioning"), {Conditioning::level, Conditioning::previous_squared_increment});
  c.t = j.at("t").get<std::size_t>();
  c.lag_steps = j.at("lag_steps").get<std::size_t>();
  c.min_count = j.at("min_count").get<std::size_t>();
  c.bin_edges = detail::doubles_from(j.at("bin_edges"));
  c.centers = detail::doubles_from(j.at("centers"));
  c.values = detail::doubles_from(j.at("values"));
  c.stderrs = detail::doubles_from(j.at("stderrs"));
  c.counts = detail::sizes_from(j.at("counts"));
}

inline void to_json(Json& j, const StationarityReport& s) {
  j = Json{{"lag_steps", s.lag_steps},
           {"probe_times", s.probe_times},
           {"ks_statistics", detail::doubles(s.ks_statistics)},
           {"p_values", detail::doubles(s.p_values)},
           {"significance", s.significance},
           {"threshold", s.threshold},
           {"combined_p_value", s.combined_p_value},
           {"sample_count", s.sample_count},
           {"verdict", to_string(s.verdict)}};
}
inline void from_json(const Json& j, StationarityReport& s) {
  s.lag_steps = j.at("lag_steps").get<std::size_t>();
  s.probe_times = detail::sizes_from(j.at("probe_times"));
  s.ks_statistics = detail::doubles_from(j.at("ks_statistics"));
  s.p_values = detail::doubles_from(j.at("p_values"));
  s.significance = json_number(j.at("significance"));
  s.threshold = json_number(j.at("threshold"));
  s.combined_p_value = json_number(j.at("combined_p_value"));
  s.sample_count = j.at("sample_count").get<std::size_t>();
  s.verdict = detail::enum_from_json(
      j.at("verdict"), {StationarityVerdict::stationary, StationarityVerdict::nonstationary,
                        StationarityVerdict::inconclusive});
}

inline void to_json(Json& j, const LinearityReport& l) {
  j = Json{{"intercept", l.intercept},
           {"slope", l.slope},
           {"se_intercept", l.se_intercept},
           {"se_slope", l.se_slope},
           {"max_relative_residual", l.max_relative_residual},
           {"max_residual_z", l.max_residual_z},
           {"r_squared", l.r_squared},
           {"tolerance", l.tolerance},
           {"verdict", to_string(l.verdict)}};
}
inline void from_json(const Json& j, LinearityReport& l) {
  l.intercept = json_number(j.at("intercept"));
  l.slope = json_number(j.at("slope"));
  l.se_intercept = json_number(j.at("se_intercept"));
  l.se_slope = json_number(j.at("se_slope"));
  l.max_relative_residual = json_number(j.at("max_relative_residual"));
  l.max_residual_z = json_number(j.at("max_residual_z"));
  l.r_squared = json_number(j.at("r_squared"));
  l.tolerance = json_number(j.at("tolerance"));
  l.verdict = detail::enum_from_json(
      j.at("verdict"),
      {LinearityVerdict::linear, LinearityVerdict::nonlinear, LinearityVerdict::inconclusive});
}

inline void to_json(Json& j, const FitResult& f) {
  j = Json{{"model", to_string(f.model)},
           {"lag_steps", f.lag_steps},
           {"alpha", f.alpha},
           {"omega", f.omega},
           {"zeta", f.zeta},
           {"se_alpha", f.se_alpha},
           {"se_omega", f.se_omega},
           {"se_zeta", f.se_zeta},
           {"loss", f.loss},
           {"iterations", f.iterations},
           {"converged", f.converged},
           {"sample_count", f.sample_count}};
}
inline void from_json(const Json& j, FitResult& f) {
  f.model = detail::enum_from_json(j.at("model"), {Model::arch1, Model::garch11});
  f.lag_steps = j.at("lag_steps").get<std::size_t>();
  f.alpha = json_number(j.at("alpha"));
  f.omega = json_number(j.at("omega"));
  f.zeta = json_number(j.at("zeta"));
  f.se_alpha = json_number(j.at("se_alpha"));
  f.se_omega = json_number(j.at("se_omega"));
  f.se_zeta = json_number(j.at("se_zeta"));
  f.loss = json_number(j.at("loss"));
  f.iterations = j.at("iterations").get<std::size_t>();
  f.converged = j.at("converged").get<bool>();
  f.sample_count = j.at("sample_count").get<std::size_t>();
}

inline void to_json(Json& j, const InputDescriptor& d) {
  Json params = Json::object();
  for (const auto& [k, v] : d.params) params[k] = v;
  j = Json{{"kind", d.kind},     {"name", d.name}, {"digest", d.digest},
           {"length", d.length}, {"seed", d.seed}, {"params", params}};
}
inline void from_json(const Json& j, InputDescriptor& d) {
  d.kind = j.at("kind").get<std::string>();
  d.name = j.at("name").get<std::string>();
  d.digest = j.at("digest").get<std::string>();
  d.length = j.at("length").get<std::size_t>();
  d.seed = j.at("seed").get<std::uint64_t>();
  d.params.clear();
  for (auto it = j.at("params").begin(); it != j.at("params").end(); ++it)
    d.params.emplace_back(it.key(), json_number(it.value()));
}

// The thread count is deliberately absent: documents must not depend on it.
inline void to_json(Json& j, const FalsificationConfig& c) {
  j = Json{{"window_steps", c.window_steps},
           {"lags", c.lags},
           {"significance", c.significance},
           {"pass_level", kPassLevel},
           {"linearity_tolerance", c.linearity_tolerance},
           {"omega_se_multiple", c.white_noise.se_multiple},
           {"omega_absolute_tolerance", c.white_noise.absolute},
           {"profile_tolerance", c.white_noise.profile_tolerance},
           {"bin_count", c.bins.count},
           {"bin_sd_span", c.bins.sd_span},
           {"bin_edges", detail::doubles(c.bins.edges)},
           {"min_members", c.min_members},
           {"curve_points", c.curve_points}};
}
inline void from_json(const Json& j, FalsificationConfig& c) {
  c.window_steps = j.at("window_steps").get<std::size_t>();
  c.lags = detail::sizes_from(j.at("lags"));
  c.significance = json_number(j.at("significance"));
  c.linearity_tolerance = json_number(j.at("linearity_tolerance"));
  c.white_noise.se_multiple = json_number(j.at("omega_se_multiple"));
  c.white_noise.absolute = json_number(j.at("omega_absolute_tolerance"));
  c.white_noise.profile_tolerance = json_number(j.at("profile_tolerance"));
  c.bins.count = j.at("bin_count").get<std::size_t>();
  c.bins.sd_span = json_number(j.at("bin_sd_span"));
  c.bins.edges = detail::doubles_from(j.at("bin_edges"));
  c.min_members = j.at("min_members").get<std::size_t>();
  c.curve_points = j.at("curve_points").get<std::size_t>();
  c.threads = 1;
}

inline void to_json(Json& j, const LagDiagnostics& l) {
  j = Json{{"lag_steps", l.lag_steps},
           {"stationarity", l.stationarity},
           {"stationarity_evidence", to_string(l.stationarity_evidence)},
           {"autocorrelation", l.autocorr},
           {"msf", l.msf},
           {"conditional_available", l.conditional_available},
           {"conditional_msf", l.conditional},
           {"memory_slope", l.memory_slope},
           {"memory_slope_se", l.memory_slope_se},
           {"memory_p_value", l.memory_p_value},
           {"density", l.density}};
}
inline void from_json(const Json& j, LagDiagnostics& l) {
  l.lag_steps = j.at("lag_steps").get<std::size_t>();
  l.stationarity = j.at("stationarity").get<StationarityReport>();
  l.stationarity_evidence = detail::enum_from_json(
      j.at("stationarity_evidence"), {Evidence::pass, Evidence::fail, Evidence::inconclusive});
  l.autocorr = j.at("autocorrelation").get<std::vector<AutocorrEstimate>>();
  l.msf = j.at("msf").get<MsfEstimate>();
  l.conditional_available = j.at("conditional_available").get<bool>();
  l.conditional = j.at("conditional_msf").get<ConditionalMsfTable>();
  l.memory_slope = json_number(j.at("memory_slope"));
  l.memory_slope_se = json_number(j.at("memory_slope_se"));
  l.memory_p_value = json_number(j.at("memory_p_value"));
  l.density = j.at("density").get<DensityHistogram>();
}

inline void to_json(Json& j, const WhiteNoiseResult& w) {
  j = Json{{"verdict", to_string(w.verdict)},
           {"lags", w.lags},
           {"profile", detail::doubles(w.profile)},
           {"profile_scale", w.profile_scale},
           {"max_profile_deviation", w.max_profile_deviation},
           {"omega_within_tolerance", w.omega_within_tolerance}};
}
inline void from_json(const Json& j, WhiteNoiseResult& w) {
  w.verdict = detail::enum_from_json(
      j.at("verdict"), {WhiteNoiseVerdict::consistent, WhiteNoiseVerdict::alpha_must_vanish,
                        WhiteNoiseVerdict::omega_must_vanish, WhiteNoiseVerdict::violated});
  w.lags = detail::sizes_from(j.at("lags"));
  w.profile = detail::doubles_from(j.at("profile"));
  w.profile_scale = json_number(j.at("profile_scale"));
  w.max_profile_deviation = json_number(j.at("max_profile_deviation"));
  w.omega_within_tolerance = j.at("omega_within_tolerance").get<bool>();
}

namespace detail {

inline Json property_verdicts(const Diagnostics& d) {
  return Json{{"increment_stationarity", to_string(d.increment_stationarity)},
              {"uncorrelated_increments", to_string(d.uncorrelated_increments)},
              {"variance_linearity", to_string(d.variance_linearity)},
              {"conditional_memory", to_string(d.conditional_memory)}};
}

inline void read_property_verdicts(const Json& v, Diagnostics& d) {
  const auto evidence = {Evidence::pass, Evidence::fail, Evidence::inconclusive};
  d.increment_stationarity = enum_from_json(v.at("increment_stationarity"), evidence);
  d.uncorrelated_increments = enum_from_json(v.at("uncorrelated_increments"), evidence);
  d.variance_linearity = enum_from_json(v.at("variance_linearity"), evidence);
  d.conditional_memory = enum_from_json(
      v.at("conditional_memory"), {Memory::present, Memory::absent, Memory::inconclusive});
}

inline Json diagnostics_estimates(const Diagnostics& d) {
  return Json{{"member_count", d.member_count},
              {"discarded", d.discarded},
              {"window_steps", d.window_steps},
              {"autocorr_p_value", d.autocorr_p_value},
              {"memory_p_value", d.memory_p_value},
              {"lags", d.lags},
              {"variance_curve", d.variance},
              {"linearity", d.linearity}};
}

inline void read_diagnostics_estimates(const Json& e, Diagnostics& d) {
  d.member_count = e.at("member_count").get<std::size_t>();
  d.discarded = e.at("discarded").get<std::size_t>();
  d.window_steps = e.at("window_steps").get<std::size_t>();
  d.autocorr_p_value = json_number(e.at("autocorr_p_value"));
  d.memory_p_value = json_number(e.at("memory_p_value"));
  d.lags = e.at("lags").get<std::vector<LagDiagnostics>>();
  d.variance = e.at("variance_curve").get<VarianceCurve>();
  d.linearity = e.at("linearity").get<LinearityReport>();
}

}  // namespace detail

// Fixed notes on how the numbers were produced.
inline Json decisions_metadata() {
  return Json{
      {"detrending",
       "straight line through the end points removed (mean one-step increment subtracted); "
       "applied to price input and on request to level input"},
      {"ensemble",
       "one series split into consecutive non-overlapping windows, each rebased to x(0) = 0"},
      {"standard_errors",
       "cross-member sample standard deviation over sqrt(member count); no correction for "
       "dependence between windows of a split series, so errors may be optimistic"},
      {"stationarity",
       "two-sample Kolmogorov-Smirnov against the earliest probe, asymptotic critical value, "
       "Bonferroni over probes"},
      {"verdict_bands",
       "fail when rejected at the requested significance, pass when not rejected at the pass "
       "level, inconclusive in between"},
      {"arch1_fit",
       "regression of squared increments on lagged squared increments: ordinary least squares "
       "followed by three weighted re-fits with weights 1 / fitted conditional mean square "
       "squared"},
      {"garch11_fit",
       "Gaussian quasi-likelihood regardless of the innovation distribution (misspecification "
       "possible), Nelder-Mead over a reparameterized open domain, deterministic multi-start"},
      {"binning", "equal-width bins over mean +- 4 sample standard deviations; tails folded "
                  "into the end bins"},
      {"claim_under_test", kClaimUnderTest},
      {"sampling_frequency",
       "lags are counted in sampling steps; no minimum sampling frequency is enforced on the "
       "input"}};
}

inline Json to_document(const FalsificationReport& r) {
  Json verdicts = detail::property_verdicts(r.diagnostics);
  verdicts["white_noise_consistency"] = to_string(r.white_noise.verdict);
  verdicts["consistency_verdict"] = to_string(r.consistency_verdict);
  verdicts["narrative"] = r.narrative;

  Json estimates = detail::diagnostics_estimates(r.diagnostics);
  estimates["arch_fits"] = r.arch_fits;
  Json profile = Json::array();
  for (std::size_t i = 0; i < r.white_noise.lags.size(); ++i)
    profile.push_back(Json{{"lag_steps", r.white_noise.lags[i]}, {"value", r.white_noise.profile[i]}});
  estimates["msf_profile"] = profile;
  estimates["white_noise"] = r.white_noise;

  return Json{{"schema_version", kFalsificationSchema},
              {"input", r.input},
              {"config", r.config},
              {"verdicts", verdicts},
              {"estimates", estimates},
              {"decisions_metadata", decisions_metadata()}};
}

inline FalsificationReport report_from_document(const Json& j) {
  if (!j.contains("schema_version") || j.at("schema_version").get<std::string>() != kFalsificationSchema)
    throw FormatError("not a falsification report (schema_version mismatch)");
  FalsificationReport r;
  r.input = j.at("input").get<InputDescriptor>();
  r.config = j.at("config").get<FalsificationConfig>();
  const auto& v = j.at("verdicts");
  detail::read_property_verdicts(v, r.diagnostics);
  r.consistency_verdict = detail::enum_from_json(
      v.at("consistency_verdict"),
      {ConsistencyVerdict::white_noise_consistent, ConsistencyVerdict::memory_detected,
       ConsistencyVerdict::contradiction_flagged});
  r.narrative = v.at("narrative").get<std::string>();
  const auto& e = j.at("estimates");
  detail::read_diagnostics_estimates(e, r.diagnostics);
  r.arch_fits = e.at("arch_fits").get<std::vector<FitResult>>();
  r.white_noise = e.at("white_noise").get<WhiteNoiseResult>();
  return r;
}

inline Json to_document(const InputDescriptor& input, const FalsificationConfig& cfg,
                        const Diagnostics& d) {
  return Json{{"schema_version", kDiagnosticsSchema},
              {"input", input},
              {"config", cfg},
              {"verdicts", detail::property_verdicts(d)},
              {"estimates", detail::diagnostics_estimates(d)},
              {"decisions_metadata", decisions_metadata()}};
}

inline void write_document(const Json& doc, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  write_json(out, doc);
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

inline void write_report(const FalsificationReport& report, const std::filesystem::path& path) {
  write_document(to_document(report), path);
}

inline Json read_document(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError("'" + path.string() + "' is not valid JSON: " + e.what());
  }
}

inline FalsificationReport read_report(const std::filesystem::path& path) {
  try {
    return report_from_document(read_document(path));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("'" + path.string() + "' does not match the report schema: " + e.what());
  }
}

}  // namespace incvol
