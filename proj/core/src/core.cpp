#include "qquant/core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace qquant {

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), values_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
  if (values_.size() != rows * cols) {
    throw Error(Errc::invalid_argument, "matrix storage does not match its shape");
  }
}

Matrix Matrix::column(std::span<const double> values) {
  return Matrix(values.size(), 1, std::vector<double>(values.begin(), values.end()));
}

QuantileLevel::QuantileLevel(double alpha) : alpha_(alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw Error(Errc::invalid_argument, "alpha out of range: " + std::to_string(alpha));
  }
}

Dataset::Dataset(Matrix x, std::vector<double> y) : x_(std::move(x)), y_(std::move(y)) {
  if (y_.empty()) throw Error(Errc::invalid_argument, "dataset is empty");
  if (x_.rows() != y_.size()) {
    throw Error(Errc::invalid_argument, "covariate and response row counts differ");
  }
  if (x_.cols() == 0) throw Error(Errc::invalid_argument, "covariates have zero columns");
  if (!all_finite(x_.values()) || !all_finite(y_)) {
    throw Error(Errc::invalid_argument, "dataset contains non-finite values");
  }
}

std::size_t QuantileCurve::missing() const noexcept {
  return static_cast<std::size_t>(
      std::count_if(values.values().begin(), values.values().end(),
                    [](double v) { return std::isnan(v); }));
}

double check_loss(double z, QuantileLevel alpha) noexcept {
  return z * (alpha.value() - (z < 0.0 ? 1.0 : 0.0));
}

namespace {

// Smallest rank k in [1, n] with k/n >= alpha. ceil(alpha*n) is corrected for
// rounding in the product so the comparison is exactly the one defining F_n.
std::size_t type1_rank(std::size_t size, QuantileLevel alpha) {
  const auto n = static_cast<double>(size);
  auto k = static_cast<std::size_t>(std::ceil(alpha.value() * n));
  k = std::clamp<std::size_t>(k, 1, size);
  while (k > 1 && static_cast<double>(k - 1) / n >= alpha.value()) --k;
  while (k < size && static_cast<double>(k) / n < alpha.value()) ++k;
  return k;
}

}  // namespace

double sorted_sample_quantile(std::span<const double> sorted, QuantileLevel alpha) {
  if (sorted.empty()) throw Error(Errc::invalid_argument, "empty sample");
  return sorted[type1_rank(sorted.size(), alpha) - 1];
}

double sample_quantile(std::span<const double> y, QuantileLevel alpha) {
  if (y.empty()) throw Error(Errc::invalid_argument, "empty sample");
  std::vector<double> copy(y.begin(), y.end());
  const auto k = type1_rank(copy.size(), alpha);
  std::nth_element(copy.begin(), copy.begin() + static_cast<std::ptrdiff_t>(k - 1), copy.end());
  return copy[k - 1];
}

double weighted_check_argmin(std::span<const double> y, std::span<const double> w,
                             QuantileLevel alpha) {
  if (y.size() != w.size()) throw Error(Errc::invalid_argument, "weights and responses differ in length");
  if (y.empty()) throw Error(Errc::invalid_argument, "empty sample");
  double total = 0.0;
  for (double wi : w) {
    if (!(wi >= 0.0) || !std::isfinite(wi)) {
      throw Error(Errc::invalid_argument, "weights must be finite and nonnegative");
    }
    total += wi;
  }
  if (!(total > 0.0)) throw Error(Errc::numerical, "degenerate weights");

  std::vector<std::size_t> order(y.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return y[a] < y[b]; });

  // The right derivative at a is W(y <= a) - alpha * W; the smallest data
  // value where it turns nonnegative is the smallest minimiser. Equal y's are
  // accumulated together before testing.
  double below = 0.0;
  for (std::size_t pos = 0; pos < order.size();) {
    const double value = y[order[pos]];
    while (pos < order.size() && y[order[pos]] == value) below += w[order[pos++]];
    if (below / total >= alpha.value()) return value;
  }
  return y[order.back()];
}

double weighted_check_objective(std::span<const double> y, std::span<const double> w, double a,
                                QuantileLevel alpha) noexcept {
  double sum = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) sum += w[i] * check_loss(y[i] - a, alpha);
  return sum;
}

double squared_distance(std::span<const double> a, std::span<const double> b) noexcept {
  double sum = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    const double diff = a[j] - b[j];
    sum += diff * diff;
  }
  return sum;
}

bool all_finite(std::span<const double> values) noexcept {
  return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
}

}  // namespace qquant
