#include "qquant/quantizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "qquant/random.hpp"

namespace qquant {

namespace {

bool row_less(std::span<const double> a, std::span<const double> b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

bool row_equal(std::span<const double> a, std::span<const double> b) {
  return std::equal(a.begin(), a.end(), b.begin(), b.end());
}

std::vector<std::size_t> lexicographic_order(const Matrix& m) {
  std::vector<std::size_t> order(m.rows());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return row_less(m.row(a), m.row(b)); });
  return order;
}

bool contains_row(const Matrix& picked, std::size_t count, std::span<const double> row) {
  for (std::size_t i = 0; i < count; ++i) {
    if (row_equal(picked.row(i), row)) return true;
  }
  return false;
}

void check_training_input(const Matrix& data_x, const ClvqConfig& config) {
  if (config.n_points == 0) throw Error(Errc::invalid_argument, "grid size must be at least 1");
  if (!(config.p >= 1.0)) throw Error(Errc::invalid_argument, "norm exponent p must be >= 1");
  if (data_x.empty() || data_x.cols() == 0) throw Error(Errc::invalid_argument, "empty data");
  if (!all_finite(data_x.values())) throw Error(Errc::invalid_argument, "data contains non-finite values");
}

void record(ClvqTrace* trace, std::size_t step, const Matrix& points) {
  if (trace == nullptr || trace->every == 0 || step % trace->every != 0) return;
  trace->steps.push_back(step);
  trace->separation.push_back(points.rows() >= 2 ? grid_separation(points)
                                                 : std::numeric_limits<double>::infinity());
}

}  // namespace

Grid::Grid(Matrix points) : points_(std::move(points)) {
  if (points_.rows() == 0 || points_.cols() == 0) throw Error(Errc::invalid_argument, "grid must have at least one point");
  if (!all_finite(points_.values())) throw Error(Errc::invalid_argument, "grid contains non-finite coordinates");
  if (count_distinct_rows(points_) != points_.rows()) {
    throw Error(Errc::numerical, "grid points are not pairwise distinct");
  }
}

Grid Grid::sorted() const {
  const auto order = lexicographic_order(points_);
  Matrix out(points_.rows(), points_.cols());
  for (std::size_t i = 0; i < order.size(); ++i) {
    std::ranges::copy(points_.row(order[i]), out.row(i).begin());
  }
  return Grid(std::move(out));
}

StepSchedule::StepSchedule(double a, double b) : a_(a), b_(b) {
  if (!(a > 0.0) || !(b > 0.0) || !std::isfinite(a) || !std::isfinite(b)) {
    throw Error(Errc::invalid_argument, "step schedule parameters must be positive");
  }
  if (!(a < b + 1.0)) throw Error(Errc::invalid_argument, "step schedule needs a < b + 1 so that delta_t < 1");
}

StepSchedule StepSchedule::for_grid_size(std::size_t n_points) {
  const double b = 10.0 * static_cast<double>(std::max<std::size_t>(n_points, 1));
  return {0.5 * (b + 1.0), b};
}

ClvqConfig ClvqConfig::with_defaults(std::size_t n_points, std::uint64_t seed) {
  ClvqConfig config;
  config.n_points = n_points;
  config.schedule = StepSchedule::for_grid_size(n_points);
  config.seed = seed;
  return config;
}

std::size_t nearest_index(const Matrix& points, std::span<const double> x) noexcept {
  std::size_t best = 0;
  double best_distance = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < points.rows(); ++i) {
    const double d = squared_distance(points.row(i), x);
    if (d < best_distance) {
      best_distance = d;
      best = i;
    }
  }
  return best;
}

Projection project(const Grid& grid, std::span<const double> x) {
  if (x.size() != grid.dim()) throw Error(Errc::invalid_argument, "dimension mismatch in projection");
  if (!all_finite(x)) throw Error(Errc::invalid_argument, "projected point is not finite");
  const auto index = nearest_index(grid.points(), x);
  return {index, grid.point(index)};
}

CellAssignment assign_cells(const Grid& grid, const Matrix& data_x) {
  if (data_x.cols() != grid.dim()) throw Error(Errc::invalid_argument, "dimension mismatch in cell assignment");
  CellAssignment out;
  out.indices.resize(data_x.rows());
  for (std::size_t i = 0; i < data_x.rows(); ++i) out.indices[i] = nearest_index(grid.points(), data_x.row(i));
  return out;
}

std::size_t clvq_update(Matrix& points, std::span<const double> xi, double delta, double p) {
  const std::size_t winner = nearest_index(points, xi);
  auto w = points.row(winner);
  if (p == 2.0) {
    for (std::size_t j = 0; j < w.size(); ++j) w[j] += delta * (xi[j] - w[j]);
    return winner;
  }
  // x <- x - (delta/p) * p |x - xi|^(p-1) (x - xi)/|x - xi|; with 0/0 = 1 the
  // gradient vanishes when the winner coincides with xi.
  const double dist = std::sqrt(squared_distance(w, xi));
  if (dist == 0.0) return winner;
  const double scale = delta * std::pow(dist, p - 1.0) / dist;
  for (std::size_t j = 0; j < w.size(); ++j) w[j] += scale * (xi[j] - w[j]);
  return winner;
}

Grid clvq_step(const Grid& grid, std::span<const double> xi, double delta, double p) {
  if (!(delta > 0.0 && delta < 1.0)) throw Error(Errc::invalid_argument, "step must lie in (0, 1)");
  if (xi.size() != grid.dim()) throw Error(Errc::invalid_argument, "dimension mismatch in CLVQ step");
  if (!all_finite(xi)) throw Error(Errc::invalid_argument, "stimulus is not finite");
  Matrix points = grid.points();
  clvq_update(points, xi, delta, p);
  return Grid(std::move(points));
}

Grid clvq_train(const Matrix& data_x, const ClvqConfig& config, ClvqTrace* trace) {
  check_training_input(data_x, config);
  const std::size_t n = data_x.rows();
  const std::size_t N = config.n_points;
  Rng rng(config.seed);

  // Partial Fisher-Yates over row indices; rows repeating an already picked
  // value are skipped.
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Matrix points(N, data_x.cols());
  std::size_t picked = 0;
  for (std::size_t i = 0; i < n && picked < N; ++i) {
    std::swap(perm[i], perm[i + uniform_index(rng, n - i)]);
    const auto row = data_x.row(perm[i]);
    if (contains_row(points, picked, row)) continue;
    std::ranges::copy(row, points.row(picked++).begin());
  }
  if (picked < N) throw Error(Errc::data_precondition, "insufficient distinct support");

  std::size_t t = 0;
  record(trace, t, points);
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    for (std::size_t i = 0; i < n; ++i) {
      ++t;
      clvq_update(points, data_x.row(i), config.schedule(t), config.p);
      record(trace, t, points);
    }
  }
  return Grid(std::move(points));
}

Grid clvq_train_bootstrap(const Matrix& data_x, const ClvqConfig& config, ClvqTrace* trace) {
  check_training_input(data_x, config);
  const std::size_t n = data_x.rows();
  const std::size_t N = config.n_points;
  if (count_distinct_rows(data_x) < N) throw Error(Errc::data_precondition, "insufficient distinct support");
  Rng rng(config.seed);

  Matrix points(N, data_x.cols());
  std::size_t picked = 0;
  while (picked < N) {
    const auto row = data_x.row(uniform_index(rng, n));
    if (contains_row(points, picked, row)) continue;
    std::ranges::copy(row, points.row(picked++).begin());
  }

  std::size_t t = 0;
  record(trace, t, points);
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    for (std::size_t i = 0; i < n; ++i) {
      ++t;
      clvq_update(points, data_x.row(uniform_index(rng, n)), config.schedule(t), config.p);
      record(trace, t, points);
    }
  }
  return Grid(std::move(points));
}

double distortion(const Grid& grid, const Matrix& data_x, double p) {
  if (data_x.empty()) throw Error(Errc::invalid_argument, "empty data");
  if (data_x.cols() != grid.dim()) throw Error(Errc::invalid_argument, "dimension mismatch in distortion");
  double sum = 0.0;
  for (std::size_t i = 0; i < data_x.rows(); ++i) {
    const auto x = data_x.row(i);
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < grid.size(); ++j) best = std::min(best, squared_distance(grid.point(j), x));
    sum += p == 2.0 ? best : std::pow(best, p / 2.0);
  }
  return sum / static_cast<double>(data_x.rows());
}

Grid uniform_optimal_grid(double a, double b, std::size_t n_points) {
  if (!(a < b)) throw Error(Errc::invalid_argument, "uniform_optimal_grid needs a < b");
  if (n_points == 0) throw Error(Errc::invalid_argument, "grid size must be at least 1");
  Matrix points(n_points, 1);
  const double N = static_cast<double>(n_points);
  for (std::size_t k = 1; k <= n_points; ++k) {
    points(k - 1, 0) = a + (2.0 * static_cast<double>(k) - 1.0) / (2.0 * N) * (b - a);
  }
  return Grid(std::move(points));
}

double zador_reference_d1(double p, std::size_t n_points) {
  const double j = 1.0 / (std::pow(2.0, p) * (p + 1.0));
  return j / std::pow(static_cast<double>(n_points), p);
}

double grid_separation(const Matrix& points) {
  if (points.rows() < 2) throw Error(Errc::invalid_argument, "separation undefined");
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < points.rows(); ++i) {
    for (std::size_t j = i + 1; j < points.rows(); ++j) {
      best = std::min(best, squared_distance(points.row(i), points.row(j)));
    }
  }
  return std::sqrt(best);
}

double grid_separation(const Grid& grid) { return grid_separation(grid.points()); }

std::size_t count_distinct_rows(const Matrix& x) {
  if (x.empty()) return 0;
  const auto order = lexicographic_order(x);
  std::size_t distinct = 1;
  for (std::size_t i = 1; i < order.size(); ++i) {
    if (!row_equal(x.row(order[i - 1]), x.row(order[i]))) ++distinct;
  }
  return distinct;
}

}  // namespace qquant
