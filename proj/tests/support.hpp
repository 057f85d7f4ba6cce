#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <random>
#include <string>
#include <vector>

#include "incvol/series.hpp"

namespace incvol::test {

inline LevelSeries levels(std::vector<double> values, double step = 1.0) {
  LevelSeries s;
  s.step = step;
  s.values = std::move(values);
  return s;
}

inline Ensemble ensemble(std::initializer_list<std::vector<double>> members) {
  std::vector<LevelSeries> out;
  for (const auto& m : members) out.push_back(levels(m));
  return Ensemble(std::move(out));
}

// Random-walk ensemble with arbitrary scale, independent of the library RNG.
inline Ensemble random_ensemble(std::uint64_t seed, std::size_t members, std::size_t length) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  std::uniform_real_distribution<double> scale(0.01, 10.0);
  std::vector<LevelSeries> out(members);
  for (auto& m : out) {
    const double s = scale(rng);
    m.values.assign(length, 0.0);
    for (std::size_t k = 1; k < length; ++k) m.values[k] = m.values[k - 1] + s * z(rng);
  }
  return Ensemble(std::move(out));
}

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("incvol_" + tag + "_" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

  std::filesystem::path write(const std::string& name, const std::string& content) const {
    std::ofstream(path_ / name, std::ios::binary) << content;
    return path_ / name;
  }

 private:
  std::filesystem::path path_;
};

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace incvol::test
