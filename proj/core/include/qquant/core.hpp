#pragma once

// Foundational types shared by every estimator: a dense row-major matrix,
// the (X, Y) dataset, quantile levels, the check function and exact
// type-1 sample quantiles.

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "qquant/error.hpp"

namespace qquant {

/// Dense row-major matrix of doubles. Rows are observations or grid points.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> values);

  /// Builds an n x 1 matrix from a column of scalars.
  static Matrix column(std::span<const double> values);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return rows_ == 0; }

  std::span<const double> row(std::size_t i) const noexcept {
    return {values_.data() + i * cols_, cols_};
  }
  std::span<double> row(std::size_t i) noexcept { return {values_.data() + i * cols_, cols_}; }

  double operator()(std::size_t i, std::size_t j) const noexcept { return values_[i * cols_ + j]; }
  double& operator()(std::size_t i, std::size_t j) noexcept { return values_[i * cols_ + j]; }

  const std::vector<double>& values() const noexcept { return values_; }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
};

/// A quantile level strictly inside (0, 1).
class QuantileLevel {
 public:
  explicit QuantileLevel(double alpha);

  double value() const noexcept { return alpha_; }
  QuantileLevel complement() const { return QuantileLevel(1.0 - alpha_); }

  friend auto operator<=>(const QuantileLevel&, const QuantileLevel&) = default;

 private:
  double alpha_;
};

/// n paired observations (X_i in R^d, Y_i in R). Validated on construction:
/// n >= 1, matching row counts, every entry finite.
class Dataset {
 public:
  Dataset(Matrix x, std::vector<double> y);

  std::size_t size() const noexcept { return y_.size(); }
  std::size_t dim() const noexcept { return x_.cols(); }
  const Matrix& x() const noexcept { return x_; }
  std::span<const double> y() const noexcept { return y_; }
  std::span<const double> x_row(std::size_t i) const noexcept { return x_.row(i); }

 private:
  Matrix x_;
  std::vector<double> y_;
};

/// Estimated quantile function on a set of query points. values(i, j) is the
/// prediction at query point i for level j; NaN marks a missing prediction.
struct QuantileCurve {
  Matrix query_points;
  std::vector<QuantileLevel> levels;
  Matrix values;

  std::size_t missing() const noexcept;
};

/// rho_alpha(z) = z * (alpha - 1[z < 0]).
double check_loss(double z, QuantileLevel alpha) noexcept;

/// Left-continuous inverse of the empirical distribution: the smallest order
/// statistic y_(k) with k/n >= alpha.
double sample_quantile(std::span<const double> y, QuantileLevel alpha);

/// Same as sample_quantile for a sample that is already sorted ascending.
double sorted_sample_quantile(std::span<const double> sorted, QuantileLevel alpha);

/// Smallest data value minimising sum_i w_i * rho_alpha(y_i - a).
double weighted_check_argmin(std::span<const double> y, std::span<const double> w,
                             QuantileLevel alpha);

/// sum_i w_i * rho_alpha(y_i - a).
double weighted_check_objective(std::span<const double> y, std::span<const double> w, double a,
                                QuantileLevel alpha) noexcept;

/// Squared Euclidean distance between two points of equal dimension.
double squared_distance(std::span<const double> a, std::span<const double> b) noexcept;

bool all_finite(std::span<const double> values) noexcept;

/// Evaluates predict_one(x, alpha) at every (query row, level). Numerical
/// failures (Errc::numerical) are stored as NaN; anything else propagates.
template <typename Predict>
QuantileCurve evaluate_curve(const Matrix& query, std::span<const QuantileLevel> levels,
                             Predict&& predict_one) {
  if (query.empty()) throw Error(Errc::invalid_argument, "empty query grid");
  QuantileCurve curve{query, {levels.begin(), levels.end()}, Matrix(query.rows(), levels.size())};
  for (std::size_t i = 0; i < query.rows(); ++i) {
    for (std::size_t j = 0; j < levels.size(); ++j) {
      try {
        curve.values(i, j) = predict_one(query.row(i), levels[j]);
      } catch (const Error& e) {
        if (e.code() != Errc::numerical) throw;
        curve.values(i, j) = std::numeric_limits<double>::quiet_NaN();
      }
    }
  }
  return curve;
}

}  // namespace qquant
