#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

#include "incvol/error.hpp"

namespace incvol {

inline constexpr std::uint64_t kDefaultSeed = 42;

// SplitMix64 finalizer. Used to spread user seeds and to derive substreams.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Seed of substream `index` under `master`. Ensemble member m always draws
// from substream_seed(master, m), whatever order members are generated in.
constexpr std::uint64_t substream_seed(std::uint64_t master, std::uint64_t index) noexcept {
  return splitmix64(splitmix64(master) ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

// Standardized innovation distributions: mean 0, variance 1.
enum class Noise { gaussian, uniform, rademacher };

inline std::string_view to_string(Noise n) {
  switch (n) {
    case Noise::gaussian: return "gaussian";
    case Noise::uniform: return "uniform";
    case Noise::rademacher: return "rademacher";
  }
  return "gaussian";
}

inline Noise noise_from_string(std::string_view s) {
  if (s == "gaussian") return Noise::gaussian;
  if (s == "uniform") return Noise::uniform;
  if (s == "rademacher") return Noise::rademacher;
  throw UsageError("unknown noise distribution '" + std::string(s) + "'");
}

class NoiseSource {
 public:
  explicit NoiseSource(std::uint64_t seed, Noise kind = Noise::gaussian)
      : engine_(splitmix64(seed)), kind_(kind) {}

  double operator()() {
    switch (kind_) {
      case Noise::gaussian: return normal_(engine_);
      case Noise::uniform: return uniform_(engine_);
      case Noise::rademacher: return (engine_() >> 63) ? 1.0 : -1.0;
    }
    return 0.0;
  }

 private:
  std::mt19937_64 engine_;
  Noise kind_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  // U(-sqrt 3, sqrt 3) has unit variance.
  std::uniform_real_distribution<double> uniform_{-std::sqrt(3.0), std::sqrt(3.0)};
};

}  // namespace incvol
