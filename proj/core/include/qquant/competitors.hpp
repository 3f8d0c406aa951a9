#pragma once

// Reference conditional quantile estimators: k-nearest-neighbour quantiles,
// and Gaussian-kernel local constant / local linear check-loss regression
// with a quantile-level bandwidth derived from a mean-regression bandwidth.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "qquant/core.hpp"

namespace qquant {

class KnnEstimator {
 public:
  KnnEstimator(std::shared_ptr<const Dataset> data, std::size_t k);
  KnnEstimator(const Dataset& data, std::size_t k);

  const Dataset& data() const noexcept { return *data_; }
  std::size_t k() const noexcept { return k_; }

 private:
  std::shared_ptr<const Dataset> data_;
  std::size_t k_;
};

/// Observation indices ordered by distance to x; equal distances keep the
/// smaller index first.
std::vector<std::size_t> neighbour_order(const Dataset& data, std::span<const double> x);

/// Type-1 sample quantile of the responses of the k nearest covariates.
double knn_predict(const KnnEstimator& est, std::span<const double> x, QuantileLevel alpha);

using QuantileOracle = std::function<double(std::span<const double>, QuantileLevel)>;

struct KnnSelection {
  std::size_t k;
  std::vector<double> mse;  // one entry per candidate, in k_grid order
};

/// Picks the k minimising (1/|query|) sum (q^k(x) - truth(x))^2. Requires the
/// true conditional quantile, so it only makes sense on simulated data.
/// Ties go to the smallest k.
KnnSelection knn_select_k(const Dataset& data, const QuantileOracle& truth, const Matrix& query,
                          QuantileLevel alpha, std::span<const std::size_t> k_grid);

/// {5, 10, ..., floor(n/3)}; {1} when n < 15.
std::vector<std::size_t> default_k_grid(std::size_t n);

struct KernelConfig {
  double h;
};

/// exp(-|x - X_i|^2 / (2 h^2)) for every observation.
std::vector<double> gaussian_weights(const Dataset& data, std::span<const double> x, double h);

/// Kernel-weighted check-loss minimiser over a constant. Throws
/// Errc::numerical "bandwidth too small at x" when all weights underflow.
double local_constant_predict(const Dataset& data, KernelConfig cfg, std::span<const double> x,
                              QuantileLevel alpha);

struct LocalLinearFit {
  double intercept;
  double slope;
  double objective;
  std::size_t iterations;
  bool fell_back;  // degenerate design: local-constant value with slope 0
};

/// sum_i w_i rho_alpha(y_i - a - b (x_i - x0)).
double local_linear_objective(std::span<const double> x, std::span<const double> y,
                              std::span<const double> w, double x0, double a, double b,
                              QuantileLevel alpha) noexcept;

/// Minimises the kernel-weighted check loss over lines through (x0, a) with
/// slope b, d = 1 only. Starts from the local-constant solution and performs
/// exact line searches along lines that interpolate one observation, moving
/// between vertices of the piecewise-linear objective until two consecutive
/// searches improve by less than 1e-10 (at most 500 searches).
LocalLinearFit local_linear_fit(const Dataset& data, KernelConfig cfg, double x0, QuantileLevel alpha);

double local_linear_predict(const Dataset& data, KernelConfig cfg, std::span<const double> x,
                            QuantileLevel alpha);

/// h_alpha = alpha (1 - alpha) h_mean / phi(Phi^{-1}(alpha))^2.
double yu_jones_bandwidth(double h_mean, QuantileLevel alpha);

/// Nadaraya-Watson (Gaussian) mean regression at x.
double nadaraya_watson(const Dataset& data, std::span<const std::size_t> rows, std::span<const double> x,
                       double h);

/// K-fold cross-validated squared error of Nadaraya-Watson for every h; fold
/// membership comes from a permutation seeded with `seed`.
std::vector<double> cv_errors(const Dataset& data, std::span<const double> h_grid, std::size_t folds,
                              std::uint64_t seed);

/// argmin of cv_errors; smallest h on ties.
double select_h_mean_cv(const Dataset& data, std::span<const double> h_grid, std::size_t folds,
                        std::uint64_t seed);

/// `count` log-spaced values from lo to hi inclusive.
std::vector<double> log_spaced(double lo, double hi, std::size_t count);

/// 25 log-spaced values in [0.05, 2].
std::vector<double> default_h_grid();

}  // namespace qquant
