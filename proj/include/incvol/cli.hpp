#pragma once

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "incvol/error.hpp"
#include "incvol/falsify.hpp"
#include "incvol/generators.hpp"
#include "incvol/io.hpp"
#include "incvol/model_fit.hpp"
#include "incvol/random.hpp"
#include "incvol/report.hpp"
#include "incvol/series.hpp"

namespace incvol::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kData = 2, kNumerical = 3 };

inline int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const UsageError*>(&e) || dynamic_cast<const ResourceError*>(&e)) return kUsage;
  if (dynamic_cast<const FormatError*>(&e) || dynamic_cast<const SizeError*>(&e) ||
      dynamic_cast<const DomainError*>(&e) || dynamic_cast<const IoError*>(&e))
    return kData;
  return kNumerical;
}

inline const std::set<std::string> kModels{"wiener", "arch1", "garch11", "fbm", "scaled_wiener"};

struct Options {
  std::string command;

  std::optional<std::string> model;
  std::optional<double> alpha, omega, zeta, sigma, hurst;
  std::optional<std::size_t> n;
  double step = 1.0;
  std::uint64_t seed = kDefaultSeed;
  std::string noise = "gaussian";

  std::optional<std::filesystem::path> input;
  bool detrend = false;

  std::vector<std::size_t> lags{1, 2, 4, 8};
  std::size_t window = 100;
  double significance = 0.01;
  std::optional<double> tol;
  std::string fit_model = "arch1";
  unsigned threads = 1;

  std::optional<std::filesystem::path> out;
  std::optional<std::filesystem::path> plots;
};

// Length used when --n is absent with --model.
inline std::size_t default_length(const std::string& model) {
  return model == "fbm" ? kFbmMaxLength : 1000000;
}

struct Source {
  LevelSeries series;
  InputDescriptor input;
};

namespace detail {

inline void rethrow_as_usage(auto&& check) {
  try {
    check();
  } catch (const DomainError& e) {
    throw UsageError(e.what());
  }
}

// Model parameters with flag overrides applied, in a fixed order.
inline std::vector<std::pair<std::string, double>> model_params(const Options& o) {
  const auto& m = *o.model;
  if (m == "wiener") return {{"sigma1_sq", o.sigma.value_or(1.0)}};
  if (m == "arch1") {
    const ArchParams d;
    return {{"alpha", o.alpha.value_or(d.alpha)}, {"omega", o.omega.value_or(d.omega)}};
  }
  if (m == "garch11") {
    const GarchParams d;
    return {{"alpha", o.alpha.value_or(d.alpha)}, {"omega", o.omega.value_or(d.omega)},
            {"zeta", o.zeta.value_or(d.zeta)}};
  }
  return {{"hurst", o.hurst.value_or(0.7)}, {"sigma_sq", o.sigma.value_or(1.0)}};
}

inline void validate_model(const Options& o) {
  const auto& m = *o.model;
  const auto p = model_params(o);
  auto reject = [&](bool given, const char* flag) {
    if (given) throw UsageError("--" + std::string(flag) + " does not apply to model " + m);
  };
  reject(o.zeta.has_value() && m != "garch11", "zeta");
  reject((o.alpha.has_value() || o.omega.has_value()) && m != "arch1" && m != "garch11",
         "alpha/--omega");
  reject(o.hurst.has_value() && m != "fbm" && m != "scaled_wiener", "hurst");
  reject(o.sigma.has_value() && (m == "arch1" || m == "garch11"), "sigma");
  reject(o.noise != "gaussian" && m != "arch1" && m != "garch11", "noise");
  rethrow_as_usage([&] {
    if (m == "wiener") validate(WienerParams{p[0].second});
    if (m == "arch1") validate(ArchParams{p[0].second, p[1].second});
    if (m == "garch11") validate(GarchParams{p[0].second, p[1].second, p[2].second});
    if (m == "fbm") validate(FbmParams{p[0].second, p[1].second});
    if (m == "scaled_wiener") validate(ScaledWienerParams{p[0].second, p[1].second});
  });
  const std::size_t n = o.n.value_or(default_length(m));
  if (n < 2) throw UsageError("--n must be at least 2");
  if (m == "fbm" && n > kFbmMaxLength)
    throw ResourceError("--n " + std::to_string(n) + " exceeds the fBm maximum of " +
                        std::to_string(kFbmMaxLength));
}

inline void validate_options(const Options& o) {
  if (!(o.step > 0.0) || !std::isfinite(o.step)) throw UsageError("--step must be positive");
  rethrow_as_usage([&] { (void)noise_from_string(o.noise); });
  if (o.threads == 0) throw UsageError("--threads must be at least 1");
  const bool data_command = o.command != "simulate";
  if (!data_command) {
    if (!o.model) throw UsageError("simulate needs --model");
    if (o.input) throw UsageError("simulate does not read --input");
  } else if (o.model.has_value() == o.input.has_value()) {
    throw UsageError(o.command + " needs exactly one of --input or --model");
  }
  if (o.model) validate_model(o);
  if (data_command) {
    if (o.lags.empty()) throw UsageError("--lags must list at least one lag");
    for (auto lag : o.lags)
      if (lag == 0) throw UsageError("--lags entries must be positive");
    if (o.window < 2) throw UsageError("--window must be at least 2");
    if (!(o.significance > 0.0 && o.significance <= kPassLevel))
      throw UsageError("--significance must lie in (0, 0.05]");
    if (o.tol && !(*o.tol >= 0.0)) throw UsageError("--tol must be non-negative");
  }
  if (o.command == "falsify" && std::set<std::size_t>(o.lags.begin(), o.lags.end()).size() < 2)
    throw UsageError("falsify needs at least 2 distinct --lags");
  if (o.command == "fit" && o.fit_model != "arch1" && o.fit_model != "garch11" &&
      o.fit_model != "both")
    throw UsageError("--fit-model must be arch1, garch11 or both");
  if (o.plots && o.command != "diagnose" && o.command != "falsify")
    throw UsageError("--plots applies to diagnose and falsify");
}

inline LevelSeries simulate(const Options& o) {
  const auto& m = *o.model;
  const auto p = model_params(o);
  const std::size_t n = o.n.value_or(default_length(m));
  const Noise noise = noise_from_string(o.noise);
  LevelSeries s;
  if (m == "wiener") s = gen_wiener({p[0].second}, n, o.step, o.seed);
  if (m == "arch1") s = gen_arch1({p[0].second, p[1].second}, n, o.seed, noise);
  if (m == "garch11") s = gen_garch11({p[0].second, p[1].second, p[2].second}, n, o.seed, noise);
  if (m == "fbm") s = gen_fbm({p[0].second, p[1].second}, n, o.step, o.seed);
  if (m == "scaled_wiener") s = gen_scaled_wiener({p[0].second, p[1].second}, n, o.step, o.seed);
  s.step = o.step;
  return s;
}

inline Source load_source(const Options& o) {
  Source src;
  if (o.model) {
    src.series = simulate(o);
    src.input.kind = "generator";
    src.input.name = *o.model;
    src.input.params = model_params(o);
    if (*o.model == "arch1" || *o.model == "garch11") src.input.params.emplace_back("step", o.step);
    src.input.seed = o.seed;
  } else {
    auto csv = read_levels_csv(*o.input);
    src.input.kind = "file";
    src.input.name = o.input->filename().string();
    src.input.digest = csv.digest;
    if (csv.is_price()) {
      // Price input is always detrended.
      src.series = detrend(log_returns(std::get<PriceSeries>(csv.series)));
    } else {
      src.series = rebase(std::get<LevelSeries>(std::move(csv.series)));
    }
  }
  if (o.detrend && !src.series.detrended) src.series = detrend(src.series);
  src.input.length = src.series.size();
  src.input.params.emplace_back("detrended", src.series.detrended ? 1.0 : 0.0);
  return src;
}

inline FalsificationConfig falsification_config(const Options& o) {
  FalsificationConfig cfg;
  cfg.window_steps = o.window;
  cfg.lags = o.lags;
  cfg.significance = o.significance;
  if (o.tol) cfg.white_noise.absolute = *o.tol;
  cfg.threads = o.threads;
  return cfg;
}

template <class Emit>
void emit(const Options& o, std::ostream& out, Emit&& write) {
  if (!o.out) {
    write(out);
    return;
  }
  std::ofstream file(*o.out, std::ios::binary | std::ios::trunc);
  if (!file) throw IoError("cannot open '" + o.out->string() + "' for writing");
  write(file);
  if (!file) throw IoError("failed writing '" + o.out->string() + "'");
}

inline void run_simulate(const Options& o, std::ostream& out, std::ostream& err) {
  const auto s = simulate(o);
  emit(o, out, [&](std::ostream& os) { write_levels_csv(s, os); });
  err << "simulated " << s.size() << " samples of " << *o.model << " (seed " << o.seed << ")\n";
}

inline void run_diagnose(const Options& o, std::ostream& out, std::ostream& err) {
  const auto src = load_source(o);
  const auto cfg = falsification_config(o);
  const auto ens = ensemble_split(src.series, cfg.window_steps);
  const auto d = run_diagnostics(ens, cfg);
  const auto doc = to_document(src.input, cfg, d);
  emit(o, out, [&](std::ostream& os) { write_json(os, doc); });
  if (o.plots) emit_plot_data(plot_data(d), *o.plots);
  err << "diagnosed " << d.member_count << " members of " << d.window_steps
      << " steps: increment_stationarity=" << to_string(d.increment_stationarity)
      << " uncorrelated_increments=" << to_string(d.uncorrelated_increments)
      << " variance_linearity=" << to_string(d.variance_linearity)
      << " conditional_memory=" << to_string(d.conditional_memory) << "\n";
}

inline void run_fit(const Options& o, std::ostream& out, std::ostream& err) {
  const auto src = load_source(o);
  const auto lags = std::set<std::size_t>(o.lags.begin(), o.lags.end());
  const bool arch = o.fit_model != "garch11", garch = o.fit_model != "arch1";
  const double tol = o.tol.value_or(0.05);
  Json fits = Json::array();
  Json checks = Json::array();
  OptimizerConfig opt;
  opt.threads = o.threads;
  for (auto lag : lags) {
    const auto incs = increments(src.series, lag, false);
    if (arch) fits.push_back(fit_arch1(incs));
    if (garch) {
      const auto g = fit_garch11(incs, opt);
      fits.push_back(g);
      checks.push_back(Json{{"lag_steps", lag},
                            {"tol", tol},
                            {"verdict", to_string(garch_white_noise_check(g, tol))}});
    }
  }
  Json config{{"lags", Json(std::vector<std::size_t>(lags.begin(), lags.end()))},
              {"fit_model", o.fit_model},
              {"optimizer_max_iterations", opt.max_iterations},
              {"optimizer_tolerance", opt.tolerance},
              {"optimizer_starts", opt.starts}};
  const auto meta = decisions_metadata();
  Json doc{{"schema_version", kFitSchema},
           {"input", src.input},
           {"config", config},
           {"verdicts", Json{{"garch_white_noise", checks}}},
           {"estimates", Json{{"fits", fits}}},
           {"decisions_metadata",
            Json{{"arch1_fit", meta.at("arch1_fit")}, {"garch11_fit", meta.at("garch11_fit")}}}};
  emit(o, out, [&](std::ostream& os) { write_json(os, doc); });
  err << "fitted " << fits.size() << " model(s) over " << lags.size() << " lag(s)\n";
}

inline void run_falsify(const Options& o, std::ostream& out, std::ostream& err) {
  const auto src = load_source(o);
  const auto report = falsification_report(src.series, falsification_config(o), src.input);
  emit(o, out, [&](std::ostream& os) { write_json(os, to_document(report)); });
  if (o.plots) emit_plot_data(plot_data(report.diagnostics), *o.plots);
  err << report.narrative << "\n";
}

inline void add_source_options(CLI::App& cmd, Options& o, bool data_command) {
  cmd.add_option("--model", o.model, "generator: wiener, arch1, garch11, fbm, scaled_wiener")
      ->check(CLI::IsMember(kModels));
  cmd.add_option("--alpha", o.alpha, "ARCH/GARCH constant term");
  cmd.add_option("--omega", o.omega, "ARCH/GARCH coefficient of the previous squared increment");
  cmd.add_option("--zeta", o.zeta, "GARCH coefficient of the previous conditional MSF");
  cmd.add_option("--sigma", o.sigma, "variance rate (wiener) or variance scale (fbm, scaled_wiener)");
  cmd.add_option("--hurst", o.hurst, "Hurst exponent (fbm, scaled_wiener), default 0.7");
  cmd.add_option("--n", o.n, "number of samples (default 1000000, fbm 65536)");
  cmd.add_option("--step", o.step, "sampling step")->capture_default_str();
  cmd.add_option("--seed", o.seed, "master seed")->capture_default_str();
  cmd.add_option("--noise", o.noise, "innovations: gaussian, uniform, rademacher")
      ->capture_default_str();
  if (data_command) {
    cmd.add_option("--input", o.input, "CSV with header time,price or time,level");
    cmd.add_flag("--detrend", o.detrend, "detrend level input (price input is always detrended)");
    cmd.add_option("--lags", o.lags, "comma-separated lags in steps")
        ->delimiter(',')
        ->capture_default_str();
    cmd.add_option("--threads", o.threads, "worker threads")->capture_default_str();
  }
  cmd.add_option("--out", o.out, "output file (default: standard output)");
}

inline void add_analysis_options(CLI::App& cmd, Options& o) {
  cmd.add_option("--window", o.window, "ensemble window in steps")->capture_default_str();
  cmd.add_option("--significance", o.significance, "test significance, at most 0.05")
      ->capture_default_str();
  cmd.add_option("--plots", o.plots, "directory for plot-data CSV files and manifest");
}

}  // namespace detail

// Returns the process exit code. Machine output goes to `out` (or --out),
// everything else to `err`.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
  Options o;
  CLI::App app{"incvol: increment-based volatility diagnostics"};
  app.require_subcommand(1);
  auto* simulate = app.add_subcommand("simulate", "write a simulated level series as CSV");
  auto* diagnose = app.add_subcommand("diagnose", "ensemble diagnostics document");
  auto* fit = app.add_subcommand("fit", "per-lag ARCH(1) / GARCH(1,1) fits");
  auto* falsify = app.add_subcommand("falsify", "full falsification report");
  detail::add_source_options(*simulate, o, false);
  for (auto* cmd : {diagnose, fit, falsify}) detail::add_source_options(*cmd, o, true);
  detail::add_analysis_options(*diagnose, o);
  detail::add_analysis_options(*falsify, o);
  falsify->add_option("--tol", o.tol, "absolute tolerance on fitted omega (default: 3 SE)");
  fit->add_option("--tol", o.tol, "tolerance for the GARCH white-noise check (default 0.05)");
  fit->add_option("--fit-model", o.fit_model, "arch1, garch11 or both")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kUsage;
  }
  o.command = app.get_subcommands().front()->get_name();

  try {
    detail::validate_options(o);
    if (o.command == "simulate") detail::run_simulate(o, out, err);
    if (o.command == "diagnose") detail::run_diagnose(o, out, err);
    if (o.command == "fit") detail::run_fit(o, out, err);
    if (o.command == "falsify") detail::run_falsify(o, out, err);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e);
  }
  return kOk;
}

}  // namespace incvol::cli
