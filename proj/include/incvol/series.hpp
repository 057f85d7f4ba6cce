#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "incvol/error.hpp"

namespace incvol {

// Raw price observations. Construct freely; validate() enforces the invariants.
struct PriceSeries {
  std::vector<double> timestamps;
  std::vector<double> prices;
  double step = 1.0;

  std::size_t size() const noexcept { return prices.size(); }
};

// Evenly sampled levels x(k) at t = origin_time + k * step.
struct LevelSeries {
  double origin_time = 0.0;
  double step = 1.0;
  std::vector<double> values;
  bool detrended = false;

  std::size_t size() const noexcept { return values.size(); }
  double time_at(std::size_t k) const noexcept {
    return origin_time + static_cast<double>(k) * step;
  }

  bool operator==(const LevelSeries&) const = default;
};

// z(t) = x(t) - x(t - lag) for each recorded start index t.
struct IncrementSeries {
  std::size_t lag_steps = 1;
  std::vector<std::size_t> start_indices;
  std::vector<double> values;
  bool overlapping = false;

  std::size_t size() const noexcept { return values.size(); }
};

// Equal-length level paths sharing one step. Members start at zero.
class Ensemble {
 public:
  Ensemble() = default;

  explicit Ensemble(std::vector<LevelSeries> members, std::size_t discarded = 0)
      : members_(std::move(members)), discarded_(discarded) {
    if (members_.empty()) throw SizeError("ensemble needs at least one member");
    const auto n = members_.front().size();
    const auto step = members_.front().step;
    for (std::size_t m = 0; m < members_.size(); ++m) {
      const auto& s = members_[m];
      if (s.size() != n || s.step != step)
        throw SizeError("ensemble member " + std::to_string(m) +
                        " differs in length or step");
      if (s.values.empty() || s.values.front() != 0.0)
        throw DomainError("ensemble member " + std::to_string(m) + " does not start at 0");
    }
  }

  std::size_t member_count() const noexcept { return members_.size(); }
  std::size_t length() const noexcept { return members_.empty() ? 0 : members_.front().size(); }
  double step() const noexcept { return members_.empty() ? 1.0 : members_.front().step; }
  // Tail samples dropped by ensemble_split.
  std::size_t discarded() const noexcept { return discarded_; }

  const std::vector<LevelSeries>& members() const noexcept { return members_; }
  const LevelSeries& operator[](std::size_t m) const { return members_[m]; }
  double at(std::size_t m, std::size_t t) const { return members_[m].values[t]; }

 private:
  std::vector<LevelSeries> members_;
  std::size_t discarded_ = 0;
};

// Allowed deviation of a timestamp from its nominal grid point, in steps.
inline constexpr double kTimestampTolerance = 0.1;

inline void validate(const PriceSeries& p, double tolerance = kTimestampTolerance) {
  if (p.prices.size() < 2) throw SizeError("price series needs at least 2 observations");
  if (p.timestamps.size() != p.prices.size())
    throw FormatError("timestamps and prices differ in length");
  if (!(p.step > 0.0)) throw DomainError("price series step must be positive");
  for (std::size_t k = 0; k < p.prices.size(); ++k) {
    if (!(p.prices[k] > 0.0) || !std::isfinite(p.prices[k]))
      throw DomainError("non-positive price at index " + std::to_string(k));
  }
  for (std::size_t k = 1; k < p.timestamps.size(); ++k) {
    if (!(p.timestamps[k] > p.timestamps[k - 1]))
      throw FormatError("timestamps not strictly increasing at index " + std::to_string(k));
  }
  for (std::size_t k = 0; k < p.timestamps.size(); ++k) {
    const double nominal = p.timestamps.front() + static_cast<double>(k) * p.step;
    if (std::abs(p.timestamps[k] - nominal) > tolerance * p.step)
      throw FormatError("timestamp at index " + std::to_string(k) +
                        " deviates from the sampling grid by more than " +
                        std::to_string(tolerance) + " steps");
  }
}

// values[k] = ln(p_k / p_c) - ln(p_0 / p_c). With no reference the first
// price is used.
inline LevelSeries log_returns(const PriceSeries& prices,
                               std::optional<double> reference = std::nullopt) {
  validate(prices);
  const double ref = reference.value_or(prices.prices.front());
  if (!(ref > 0.0)) throw DomainError("reference price must be positive");
  LevelSeries out;
  out.origin_time = prices.timestamps.front();
  out.step = prices.step;
  out.values.resize(prices.size());
  const double head = std::log(prices.prices.front() / ref);
  for (std::size_t k = 0; k < prices.size(); ++k)
    out.values[k] = std::log(prices.prices[k] / ref) - head;
  out.values.front() = 0.0;
  return out;
}

inline LevelSeries rebase(LevelSeries levels) {
  if (levels.values.empty()) return levels;
  const double head = levels.values.front();
  for (auto& v : levels.values) v -= head;
  return levels;
}

// Removes the straight line through the end points. Both end points are
// pinned to exactly zero, which keeps a second pass a bitwise no-op.
inline LevelSeries detrend(const LevelSeries& levels) {
  const auto n = levels.size();
  if (n < 2) throw SizeError("detrend needs at least 2 samples");
  LevelSeries out = levels;
  const double head = levels.values.front();
  const double drift = (levels.values.back() - head) / static_cast<double>(n - 1);
  for (std::size_t k = 0; k < n; ++k)
    out.values[k] = (levels.values[k] - head) - static_cast<double>(k) * drift;
  out.values.front() = 0.0;
  out.values.back() = 0.0;
  out.detrended = true;
  return out;
}

inline IncrementSeries increments(const LevelSeries& levels, std::size_t lag_steps,
                                  bool overlapping = false) {
  if (lag_steps == 0) throw SizeError("lag must be positive");
  if (lag_steps >= levels.size())
    throw SizeError("lag " + std::to_string(lag_steps) + " not shorter than series length " +
                    std::to_string(levels.size()));
  IncrementSeries out;
  out.lag_steps = lag_steps;
  out.overlapping = overlapping;
  const std::size_t stride = overlapping ? 1 : lag_steps;
  for (std::size_t t = lag_steps; t < levels.size(); t += stride) {
    out.start_indices.push_back(t);
    out.values.push_back(levels.values[t] - levels.values[t - lag_steps]);
  }
  return out;
}

// Cuts one long path into consecutive rebased windows.
inline Ensemble ensemble_split(const LevelSeries& levels, std::size_t window_steps) {
  if (window_steps < 2) throw SizeError("window must span at least 2 samples");
  if (window_steps > levels.size())
    throw SizeError("window " + std::to_string(window_steps) + " longer than series length " +
                    std::to_string(levels.size()));
  const std::size_t count = levels.size() / window_steps;
  std::vector<LevelSeries> members;
  members.reserve(count);
  for (std::size_t w = 0; w < count; ++w) {
    LevelSeries m;
    m.step = levels.step;
    m.origin_time = 0.0;
    m.detrended = levels.detrended;
    const auto first = levels.values.begin() + static_cast<std::ptrdiff_t>(w * window_steps);
    m.values.assign(first, first + static_cast<std::ptrdiff_t>(window_steps));
    members.push_back(rebase(std::move(m)));
  }
  return Ensemble(std::move(members), levels.size() - count * window_steps);
}

}  // namespace incvol
