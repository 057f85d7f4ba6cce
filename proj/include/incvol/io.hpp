#pragma once

#include <openssl/evp.h>

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <variant>
#include <vector>

#include "incvol/error.hpp"
#include "incvol/estimators.hpp"
#include "incvol/falsify.hpp"
#include "incvol/json_format.hpp"
#include "incvol/series.hpp"

namespace incvol {

inline std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw ResourceError("sha256 digest failed");
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xf]);
  }
  return out;
}

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct CsvSeries {
  std::variant<PriceSeries, LevelSeries> series;
  std::size_t rows = 0;
  std::string digest;  // sha256 of the raw file bytes

  bool is_price() const noexcept { return std::holds_alternative<PriceSeries>(series); }
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

inline std::string line_tag(const std::filesystem::path& path, std::size_t line) {
  return path.string() + ":" + std::to_string(line) + ": ";
}

inline double parse_field(std::string_view field, const std::filesystem::path& path,
                          std::size_t line, std::string_view column) {
  field = trim(field);
  double v = 0.0;
  const auto* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), end, v);
  if (field.empty() || ec != std::errc() || ptr != end || !std::isfinite(v))
    throw FormatError(line_tag(path, line) + "malformed " + std::string(column) + " value '" +
                      std::string(field) + "'");
  return v;
}

}  // namespace detail

// Reads a `time,price` or `time,level` file. Times must be strictly
// increasing and lie within kTimestampTolerance steps of the regular grid
// through the first and last timestamps.
inline CsvSeries read_levels_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  std::vector<double> times, values;
  std::vector<std::size_t> lines;
  bool price = false;
  bool header_seen = false;
  std::size_t line_no = 0;
  std::istringstream text(bytes);
  std::string raw;
  while (std::getline(text, raw)) {
    ++line_no;
    const auto line = detail::trim(raw);
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string_view::npos || line.find(',', comma + 1) != std::string_view::npos)
      throw FormatError(detail::line_tag(path, line_no) + "expected exactly two columns");
    const auto first = detail::trim(line.substr(0, comma));
    const auto second = detail::trim(line.substr(comma + 1));
    if (!header_seen) {
      header_seen = true;
      if (first != "time" || (second != "price" && second != "level"))
        throw FormatError(detail::line_tag(path, line_no) +
                          "header must be 'time,price' or 'time,level'");
      price = second == "price";
      continue;
    }
    const double t = detail::parse_field(first, path, line_no, "time");
    const double v = detail::parse_field(second, path, line_no, price ? "price" : "level");
    if (price && !(v > 0.0))
      throw DomainError(detail::line_tag(path, line_no) + "non-positive price " +
                        std::string(second));
    if (!times.empty() && !(t > times.back()))
      throw FormatError(detail::line_tag(path, line_no) + "time not strictly increasing");
    times.push_back(t);
    values.push_back(v);
    lines.push_back(line_no);
  }
  if (!header_seen) throw FormatError(path.string() + ": empty file");
  if (times.size() < 2)
    throw SizeError(path.string() + ": need at least 2 data rows, got " +
                    std::to_string(times.size()));

  const double step = (times.back() - times.front()) / static_cast<double>(times.size() - 1);
  for (std::size_t k = 0; k < times.size(); ++k) {
    const double nominal = times.front() + static_cast<double>(k) * step;
    if (std::abs(times[k] - nominal) > kTimestampTolerance * step)
      throw FormatError(detail::line_tag(path, lines[k]) + "time off the regular grid of step " +
                        format_double(step));
  }

  CsvSeries out;
  out.rows = times.size();
  out.digest = sha256_hex(bytes);
  if (price) {
    PriceSeries p{std::move(times), std::move(values), step};
    validate(p);
    out.series = std::move(p);
  } else {
    LevelSeries l;
    l.origin_time = times.front();
    l.step = step;
    l.values = std::move(values);
    out.series = std::move(l);
  }
  return out;
}

inline void write_levels_csv(const LevelSeries& levels, std::ostream& out) {
  out << "time,level\n";
  for (std::size_t k = 0; k < levels.size(); ++k)
    out << format_double(levels.time_at(k)) << ',' << format_double(levels.values[k]) << '\n';
}

inline void write_levels_csv(const LevelSeries& levels, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  write_levels_csv(levels, out);
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

// Figure-ready datasets.
struct PlotData {
  VarianceCurve variance;
  std::vector<MsfEstimate> msf_by_lag;
  std::vector<AutocorrEstimate> autocorr;
  std::vector<DensityHistogram> densities;
  std::vector<ConditionalMsfTable> conditional;
};

inline PlotData plot_data(const Diagnostics& d) {
  PlotData p;
  p.variance = d.variance;
  for (const auto& lag : d.lags) {
    p.msf_by_lag.push_back(lag.msf);
    p.autocorr.insert(p.autocorr.end(), lag.autocorr.begin(), lag.autocorr.end());
    if (!lag.density.masses.empty()) p.densities.push_back(lag.density);
    if (lag.conditional_available) p.conditional.push_back(lag.conditional);
  }
  return p;
}

namespace detail {

class PlotWriter {
 public:
  explicit PlotWriter(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec || !std::filesystem::is_directory(dir_))
      throw IoError("cannot create plot directory '" + dir_.string() + "'");
  }

  std::ofstream open(const std::string& name, std::string description,
                     std::vector<std::string> columns) {
    std::ofstream out(dir_ / name, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + (dir_ / name).string() + "'");
    for (std::size_t i = 0; i < columns.size(); ++i) out << (i ? "," : "") << columns[i];
    out << '\n';
    files_.push_back(Json{{"file", name}, {"description", std::move(description)},
                          {"columns", std::move(columns)}});
    return out;
  }

  void finish() const {
    std::ofstream out(dir_ / "manifest.json", std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + (dir_ / "manifest.json").string() + "'");
    write_json(out, Json{{"schema_version", "incvol-plots/1"}, {"files", files_}});
  }

 private:
  std::filesystem::path dir_;
  Json files_ = Json::array();
};

inline void check_written(const std::ofstream& out) {
  if (!out) throw IoError("failed writing plot data");
}

}  // namespace detail

// One CSV per dataset plus manifest.json describing each file's columns.
// Empty datasets produce no file.
inline void emit_plot_data(const PlotData& data, const std::filesystem::path& dir) {
  detail::PlotWriter w(dir);
  const auto& f = format_double;
  if (!data.variance.times.empty()) {
    auto out = w.open("variance_curve.csv", "ensemble variance <x^2(t)> against t",
                      {"t", "variance", "stderr"});
    for (std::size_t i = 0; i < data.variance.times.size(); ++i)
      out << data.variance.times[i] << ',' << f(data.variance.variances[i]) << ','
          << f(data.variance.stderrs[i]) << '\n';
    detail::check_written(out);
  }
  if (!data.msf_by_lag.empty()) {
    auto out = w.open("msf_vs_lag.csv", "mean square fluctuation <x^2(t,-T)> against lag T",
                      {"lag_steps", "t", "msf", "stderr", "sample_count"});
    for (const auto& m : data.msf_by_lag)
      out << m.lag_steps << ',' << m.t << ',' << f(m.value) << ',' << f(m.std_error) << ','
          << m.sample_count << '\n';
    detail::check_written(out);
  }
  if (!data.autocorr.empty()) {
    auto out = w.open("autocorr_vs_t.csv", "increment autocorrelation <x(t,-T) x(t,T)> against t",
                      {"lag_steps", "t", "autocorr", "stderr", "bound", "method"});
    for (const auto& a : data.autocorr)
      out << a.lag_steps << ',' << a.t << ',' << f(a.value) << ',' << f(a.std_error) << ','
          << f(a.bound) << ',' << to_string(a.method) << '\n';
    detail::check_written(out);
  }
  for (const auto& h : data.densities) {
    auto out = w.open("density_lag_" + std::to_string(h.lag_steps) + ".csv",
                      "increment density histogram at t = " + std::to_string(h.t) +
                          ", lag " + std::to_string(h.lag_steps),
                      {"bin_lo", "bin_hi", "mass"});
    for (std::size_t i = 0; i < h.masses.size(); ++i)
      out << f(h.bin_edges[i]) << ',' << f(h.bin_edges[i + 1]) << ',' << f(h.masses[i]) << '\n';
    detail::check_written(out);
  }
  for (const auto& c : data.conditional) {
    auto out = w.open("conditional_msf_lag_" + std::to_string(c.lag_steps) + ".csv",
                      "conditional mean square fluctuation binned by " +
                          std::string(to_string(c.conditioning)) + " at t = " +
                          std::to_string(c.t) + ", lag " + std::to_string(c.lag_steps),
                      {"bin_lo", "bin_hi", "center", "msf", "stderr", "count"});
    for (std::size_t i = 0; i < c.values.size(); ++i)
      out << f(c.bin_edges[i]) << ',' << f(c.bin_edges[i + 1]) << ',' << f(c.centers[i]) << ','
          << f(c.values[i]) << ',' << f(c.stderrs[i]) << ',' << c.counts[i] << '\n';
    detail::check_written(out);
  }
  w.finish();
}

}  // namespace incvol
