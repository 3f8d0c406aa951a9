#pragma once

// Codebook ("grid") training by competitive learning, nearest-point
// projection, empirical distortion and the closed-form references available
// in dimension one.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "qquant/core.hpp"

namespace qquant {

/// N pairwise-distinct, finite points of R^d, kept in insertion order.
class Grid {
 public:
  /// Validates N >= 1, finiteness and pairwise distinctness.
  explicit Grid(Matrix points);

  std::size_t size() const noexcept { return points_.rows(); }
  std::size_t dim() const noexcept { return points_.cols(); }
  std::span<const double> point(std::size_t i) const noexcept { return points_.row(i); }
  const Matrix& points() const noexcept { return points_; }

  /// Copy with points sorted lexicographically (for reporting d = 1 grids).
  Grid sorted() const;

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  Matrix points_;
};

/// delta_t = a / (b + t), t = 1, 2, ...
class StepSchedule {
 public:
  StepSchedule(double a, double b);

  /// a = 0.5 (b + 1), b = 10 N.
  static StepSchedule for_grid_size(std::size_t n_points);

  double a() const noexcept { return a_; }
  double b() const noexcept { return b_; }
  double operator()(std::size_t t) const noexcept { return a_ / (b_ + static_cast<double>(t)); }

 private:
  double a_;
  double b_;
};

struct ClvqConfig {
  std::size_t n_points = 1;
  double p = 2.0;
  StepSchedule schedule = StepSchedule::for_grid_size(1);
  std::uint64_t seed = 0;
  /// Passes over the data; one pass is n iterations.
  std::size_t epochs = 1;

  /// Defaults for a grid of n_points: p = 2 and the matching step schedule.
  static ClvqConfig with_defaults(std::size_t n_points, std::uint64_t seed);
};

struct Projection {
  std::size_t index;
  std::span<const double> point;
};

/// Per-observation index of the nearest grid point.
struct CellAssignment {
  std::vector<std::size_t> indices;
};

/// Separation of the iterate recorded every `every` steps during training.
struct ClvqTrace {
  std::size_t every = 1000;
  std::vector<std::size_t> steps;
  std::vector<double> separation;
};

/// Index of the Euclidean-nearest grid point; ties go to the smallest index.
std::size_t nearest_index(const Matrix& points, std::span<const double> x) noexcept;

Projection project(const Grid& grid, std::span<const double> x);

CellAssignment assign_cells(const Grid& grid, const Matrix& data_x);

/// One stochastic-gradient step on the local p-th power quantization error,
/// applied in place. Only the winner moves. Returns the winner's index.
std::size_t clvq_update(Matrix& points, std::span<const double> xi, double delta, double p);

Grid clvq_step(const Grid& grid, std::span<const double> xi, double delta, double p);

/// Initial grid from N distinct rows drawn without replacement, then one
/// step per observation in dataset order.
Grid clvq_train(const Matrix& data_x, const ClvqConfig& config, ClvqTrace* trace = nullptr);

/// As clvq_train, but the initial grid (still pairwise distinct) and every
/// iteration input are drawn with replacement.
Grid clvq_train_bootstrap(const Matrix& data_x, const ClvqConfig& config,
                          ClvqTrace* trace = nullptr);

/// (1/n) sum_i min_j |x_i - g_j|^p.
double distortion(const Grid& grid, const Matrix& data_x, double p);

/// Points a + (2k - 1)/(2N) (b - a), k = 1..N.
Grid uniform_optimal_grid(double a, double b, std::size_t n_points);

/// J_{p,1} / N^p with J_{p,1} = 1 / (2^p (p + 1)): the Zador prediction of
/// the optimal distortion for the uniform law on [0, 1].
double zador_reference_d1(double p, std::size_t n_points);

/// Smallest pairwise Euclidean distance between grid points.
double grid_separation(const Grid& grid);
double grid_separation(const Matrix& points);

/// Number of distinct rows.
std::size_t count_distinct_rows(const Matrix& x);

}  // namespace qquant
