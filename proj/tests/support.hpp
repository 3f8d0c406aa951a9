#pragma once

// Small helpers shared by the test binaries.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "qquant/core.hpp"
#include "qquant/random.hpp"

namespace qqtest {

inline std::vector<double> uniform_sample(std::size_t n, std::uint64_t seed, double lo = 0.0, double hi = 1.0) {
  qquant::Rng rng(seed);
  std::vector<double> out(n);
  for (auto& v : out) v = lo + (hi - lo) * qquant::uniform01(rng);
  return out;
}

inline qquant::Matrix uniform_column(std::size_t n, std::uint64_t seed) {
  return qquant::Matrix::column(uniform_sample(n, seed));
}

// Type-1 quantile straight from the definition: the smallest sample value v
// with #{y <= v} / n >= alpha.
inline double definition_quantile(const std::vector<double>& y, double alpha) {
  double best = INFINITY;
  for (double v : y) {
    const auto below = std::count_if(y.begin(), y.end(), [&](double u) { return u <= v; });
    if (static_cast<double>(below) / static_cast<double>(y.size()) >= alpha && v < best) best = v;
  }
  return best;
}

inline double rho(double z, double alpha) { return z >= 0 ? alpha * z : (alpha - 1.0) * z; }

// sum_i w_i rho(y_i - a - b (x_i - x0)), written out independently of the library.
struct LineObjective {
  std::vector<double> x, y, w;
  double x0;
  double alpha;

  double operator()(double a, double b) const {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += w[i] * rho(y[i] - a - b * (x[i] - x0), alpha);
    return s;
  }
};

// Exact minimum: a convex piecewise-linear objective in (a, b) attains its
// minimum on a line through two observations with distinct covariates.
inline double vertex_minimum(const LineObjective& f) {
  double best = INFINITY;
  for (std::size_t i = 0; i < f.x.size(); ++i) {
    for (std::size_t j = i + 1; j < f.x.size(); ++j) {
      if (f.x[i] == f.x[j]) continue;
      const double b = (f.y[j] - f.y[i]) / (f.x[j] - f.x[i]);
      best = std::min(best, f(f.y[i] - b * (f.x[i] - f.x0), b));
    }
  }
  return best;
}

// Brute-force 2-D search. For each slope b on a lattice the best intercept is
// found by scanning every breakpoint y_i - b (x_i - x0); the resulting
// profile is convex in b, so the lattice is refined on the bracket around its
// best node until it collapses.
inline double grid_refinement_minimum(const LineObjective& f) {
  const auto profile = [&](double b) {
    double best = INFINITY;
    for (std::size_t i = 0; i < f.x.size(); ++i) best = std::min(best, f(f.y[i] - b * (f.x[i] - f.x0), b));
    return best;
  };
  const auto [ylo, yhi] = std::minmax_element(f.y.begin(), f.y.end());
  double min_gap = INFINITY;
  for (std::size_t i = 0; i < f.x.size(); ++i)
    for (std::size_t j = i + 1; j < f.x.size(); ++j)
      if (f.x[i] != f.x[j]) min_gap = std::min(min_gap, std::abs(f.x[i] - f.x[j]));
  if (!std::isfinite(min_gap)) return profile(0.0);
  // No line through two observations is steeper than this.
  double lo = -(*yhi - *ylo) / min_gap - 1.0, hi = -lo;
  double best = INFINITY;
  constexpr int K = 40;
  while (hi - lo > 1e-13 * std::max(1.0, std::abs(lo))) {
    int arg = 0;
    double best_here = INFINITY;
    for (int k = 0; k <= K; ++k) {
      const double v = profile(lo + (hi - lo) * k / K);
      if (v < best_here) {
        best_here = v;
        arg = k;
      }
    }
    best = std::min(best, best_here);
    const double step = (hi - lo) / K;
    const double centre = lo + step * arg;
    lo = centre - step;
    hi = centre + step;
  }
  return best;
}

}  // namespace qqtest
