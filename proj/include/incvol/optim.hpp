#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>

namespace incvol::optim {

template <std::size_t N>
using Point = std::array<double, N>;

template <std::size_t N>
struct SimplexResult {
  Point<N> best{};
  double value = std::numeric_limits<double>::infinity();
  std::size_t iterations = 0;
  bool converged = false;
};

// Nelder-Mead with the standard coefficients (1, 2, 1/2, 1/2). Terminates
// when the relative spread of vertex values is below `tolerance`, or after
// `max_iterations`. Non-finite objective values are treated as +inf. A zero
// budget evaluates only `start`.
template <std::size_t N, class Objective>
SimplexResult<N> nelder_mead(Objective&& f, const Point<N>& start, double initial_step,
                             std::size_t max_iterations, double tolerance) {
  std::array<Point<N>, N + 1> vertex{};
  std::array<double, N + 1> value{};
  auto eval = [&](const Point<N>& p) {
    const double v = f(p);
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
  };
  if (max_iterations == 0) return {start, eval(start), 0, false};
  vertex[0] = start;
  for (std::size_t i = 0; i < N; ++i) {
    vertex[i + 1] = start;
    vertex[i + 1][i] += initial_step;
  }
  for (std::size_t i = 0; i <= N; ++i) value[i] = eval(vertex[i]);

  std::array<std::size_t, N + 1> order{};
  auto sort_vertices = [&] {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return value[a] < value[b]; });
    auto v2 = vertex;
    auto f2 = value;
    for (std::size_t i = 0; i <= N; ++i) {
      vertex[i] = v2[order[i]];
      value[i] = f2[order[i]];
    }
  };
  auto blend = [](const Point<N>& a, const Point<N>& b, double t) {
    Point<N> out{};
    for (std::size_t i = 0; i < N; ++i) out[i] = a[i] + t * (b[i] - a[i]);
    return out;
  };

  SimplexResult<N> result;
  sort_vertices();
  for (; result.iterations < max_iterations; ++result.iterations) {
    const double lo = value[0], hi = value[N];
    if (std::isfinite(hi) &&
        2.0 * std::abs(hi - lo) <= tolerance * (std::abs(hi) + std::abs(lo) + 1e-300)) {
      result.converged = true;
      break;
    }
    Point<N> centroid{};
    for (std::size_t i = 0; i < N; ++i)
      for (std::size_t d = 0; d < N; ++d) centroid[d] += vertex[i][d] / static_cast<double>(N);

    const auto reflected = blend(centroid, vertex[N], -1.0);
    const double fr = eval(reflected);
    if (fr < value[0]) {
      const auto expanded = blend(centroid, vertex[N], -2.0);
      const double fe = eval(expanded);
      if (fe < fr) {
        vertex[N] = expanded;
        value[N] = fe;
      } else {
        vertex[N] = reflected;
        value[N] = fr;
      }
    } else if (fr < value[N - 1]) {
      vertex[N] = reflected;
      value[N] = fr;
    } else {
      const bool outside = fr < value[N];
      const auto contracted = outside ? blend(centroid, reflected, 0.5)
                                      : blend(centroid, vertex[N], 0.5);
      const double fc = eval(contracted);
      if (fc < std::min(fr, value[N])) {
        vertex[N] = contracted;
        value[N] = fc;
      } else {
        for (std::size_t i = 1; i <= N; ++i) {
          vertex[i] = blend(vertex[0], vertex[i], 0.5);
          value[i] = eval(vertex[i]);
        }
      }
    }
    sort_vertices();
  }
  result.best = vertex[0];
  result.value = value[0];
  return result;
}

}  // namespace incvol::optim
