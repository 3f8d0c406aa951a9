#pragma once

// Location-scale data generators, population quantile oracles, the
// population-level quantized quantile and the convergence/comparison
// experiments built on them.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qquant/core.hpp"
#include "qquant/quantizer.hpp"
#include "qquant/random.hpp"

namespace qquant {

/// Y = m1(X) + m2(X) * eps with X independent of eps.
struct LocationScaleModel {
  std::string name;
  std::size_t dim = 1;
  std::function<double(std::span<const double>)> m1;
  std::function<double(std::span<const double>)> m2;
  std::function<void(Rng&, std::span<double>)> sample_covariate;
  std::function<double(Rng&)> sample_error;
  /// Quantile function of eps; empty when unavailable.
  std::function<double(double)> error_quantile;
  /// Per-coordinate bounds of the covariate support.
  std::vector<double> support_lo;
  std::vector<double> support_hi;
};

/// Y = X^3 / 5 + eps, X = 6 Z - 3 with Z ~ Beta(0.3, 0.3), eps ~ N(0, 1).
LocationScaleModel cubic_beta_model();

/// Y = m1 + m2 eps on X ~ U[0, 1]^d with standard normal errors.
LocationScaleModel uniform_design_model(std::size_t dim, std::function<double(std::span<const double>)> m1,
                                        std::function<double(std::span<const double>)> m2);

/// Returns the model by id ("cubic-beta"); throws Errc::invalid_argument otherwise.
LocationScaleModel model_by_id(const std::string& id);

/// n i.i.d. draws. Covariates and errors use separate streams derived from seed.
Dataset generate(const LocationScaleModel& model, std::size_t n, std::uint64_t seed);

/// Only the covariates of generate(model, n, seed).
Matrix generate_covariates(const LocationScaleModel& model, std::size_t n, std::uint64_t seed);

/// m1(x) + m2(x) * F_eps^{-1}(alpha).
double population_quantile(const LocationScaleModel& model, std::span<const double> x, QuantileLevel alpha);

/// Monte Carlo version of the population quantized quantile: for every cell
/// of `grid`, the alpha-quantile of Y over mc_n simulated pairs whose X falls
/// in that cell. nullopt for cells that received no draw.
std::vector<std::optional<double>> qtilde_cells(const LocationScaleModel& model, const Grid& grid,
                                                QuantileLevel alpha, std::size_t mc_n, std::uint64_t seed);

/// The entry of qtilde_cells for the cell of x. Throws Errc::numerical
/// "cell has negligible mass" when that cell received no draw.
double approx_quantile_qtilde(const LocationScaleModel& model, const Grid& grid, std::span<const double> x,
                              QuantileLevel alpha, std::size_t mc_n, std::uint64_t seed);

/// `count` equispaced points strictly inside (lo, hi): lo + (hi - lo) i / (count + 1).
Matrix equispaced_open(double lo, double hi, std::size_t count);

/// Least-squares slope of log(y) on log(x).
double log_log_slope(std::span<const double> x, std::span<const double> y);

/// Mean of squared second differences of a sequence (NaN entries make the
/// differences that touch them drop out).
double mean_squared_second_difference(std::span<const double> values);

/// Mean over non-missing entries of (values - truth)^2; NaN when all missing.
double curve_mse(std::span<const double> values, std::span<const double> truth);

// ---------------------------------------------------------------------------
// Experiments

struct ZadorConfig {
  std::vector<std::size_t> grid_sizes;
  double p = 2.0;
  /// Exact optimal grids when true, CLVQ-trained grids otherwise.
  bool exact_grids = true;
  std::size_t sample_size = 200000;
  std::size_t epochs = 1;
  std::uint64_t seed = 0;
};

struct ZadorRow {
  std::size_t grid_size;
  double distortion;
  double predicted;
};

struct ZadorTable {
  std::vector<ZadorRow> rows;
  std::optional<double> slope;  // absent for a single grid size
  /// Slope within [-p - 0.3, -p + 0.3].
  std::optional<bool> slope_in_band;
};

/// Uniform[0, 1] sample; empirical distortion against the Zador prediction.
ZadorTable run_rate_experiment_zador(const ZadorConfig& config);

struct Theorem3Config {
  std::string model = "cubic-beta";
  std::vector<std::size_t> grid_sizes;
  QuantileLevel alpha{0.5};
  std::size_t mc_n = 1000000;
  /// Covariate draws used to evaluate the L2 norm.
  std::size_t eval_n = 100000;
  /// Training sample size for the CLVQ grid of each N.
  std::size_t train_n = 1000000;
  std::uint64_t seed = 0;
  /// Query points used for the sup-norm column.
  std::size_t sup_query_count = 300;
};

struct Theorem3Row {
  std::size_t grid_size;
  double lp_error;   // L2 norm of qtilde(X) - q(X) under the covariate law
  double sup_error;  // max over the query grid of |qtilde - q|
};

struct Theorem3Table {
  std::vector<Theorem3Row> rows;
  std::optional<double> slope;
};

/// Grid of size N trained by CLVQ on train_n covariate draws, then the
/// quantized quantile compared with the population quantile.
Theorem3Table run_rate_experiment_theorem3(const Theorem3Config& config);

struct Theorem5Config {
  std::string model = "cubic-beta";
  std::size_t grid_size = 10;
  std::vector<std::size_t> sample_sizes;
  std::size_t replications = 20;
  QuantileLevel alpha{0.5};
  std::vector<double> x{0.0};
  std::size_t mc_n = 1000000;
  std::size_t reference_n = 1000000;
  std::uint64_t seed = 0;
};

struct Theorem5Row {
  std::size_t sample_size;
  double mean_abs_error;
  std::size_t replications;  // replications that produced an estimate
};

struct Theorem5Table {
  double reference_value;  // qtilde at x on the reference grid
  std::vector<Theorem5Row> rows;
};

/// |q_hat^{N,n}(x) - qtilde^N(x)| averaged over replications, per n. The
/// quantized-quantile reference uses a grid trained on reference_n draws.
Theorem5Table run_rate_experiment_theorem5(const Theorem5Config& config);

struct ComparisonConfig {
  std::string model = "cubic-beta";
  std::size_t sample_size = 300;
  std::size_t grid_size = 25;
  std::size_t bootstrap = 50;
  std::vector<QuantileLevel> alphas{QuantileLevel(0.5)};
  std::size_t replications = 50;
  std::size_t query_count = 300;
  std::size_t folds = 5;
  std::vector<double> h_grid;        // default_h_grid() when empty
  std::vector<std::size_t> k_grid;   // default_k_grid(n) when empty
  bool include_local_linear = true;
  std::uint64_t seed = 0;
};

struct ComparisonRow {
  std::string estimator;
  double alpha;
  double mse;
  std::size_t replications;
};

struct ComparisonTable {
  std::vector<ComparisonRow> rows;
  /// Per-replication MSE, [row][replication].
  std::vector<std::vector<double>> per_replication;
};

ComparisonTable run_comparison_experiment(const ComparisonConfig& config);

struct SmoothingConfig {
  std::string model = "cubic-beta";
  std::size_t sample_size = 300;
  std::size_t grid_size = 25;
  std::size_t bootstrap = 50;
  QuantileLevel alpha{0.5};
  std::size_t replications = 50;
  std::size_t query_count = 300;
  std::uint64_t seed = 0;
};

struct SmoothingRow {
  std::size_t replication;
  double roughness_single;
  double roughness_bootstrap;
};

/// Mean squared second difference of single-grid versus bootstrap curves.
std::vector<SmoothingRow> run_smoothing_experiment(const SmoothingConfig& config);

}  // namespace qquant
