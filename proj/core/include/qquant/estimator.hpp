#pragma once

// Quantization-based conditional quantile estimation. A grid is trained on
// the covariates; the estimate at x is the sample alpha-quantile of the
// responses whose covariate falls in the same Voronoi cell as x. The
// bootstrap variant averages that estimate over B grids trained on
// resampled covariates, always conditioning on the original sample.

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "qquant/core.hpp"
#include "qquant/quantizer.hpp"

namespace qquant {

/// A grid together with the partition it induces on a dataset. Responses are
/// sorted per cell so every prediction is an index lookup.
class CellIndex {
 public:
  CellIndex(Grid grid, const Dataset& data);

  const Grid& grid() const noexcept { return grid_; }
  const CellAssignment& assignment() const noexcept { return assignment_; }
  std::span<const double> cell_responses(std::size_t cell) const noexcept { return cells_[cell]; }
  std::size_t cell_count(std::size_t cell) const noexcept { return cells_[cell].size(); }

  /// nullopt when the cell of x holds no observation.
  std::optional<double> try_predict(std::span<const double> x, QuantileLevel alpha) const;

 private:
  Grid grid_;
  CellAssignment assignment_;
  std::vector<std::vector<double>> cells_;
};

class QuantEstimator {
 public:
  QuantEstimator(std::shared_ptr<const Dataset> data, Grid grid);

  const Grid& grid() const noexcept { return index_.grid(); }
  const CellAssignment& assignment() const noexcept { return index_.assignment(); }
  const Dataset& data() const noexcept { return *data_; }
  const CellIndex& cells() const noexcept { return index_; }

 private:
  std::shared_ptr<const Dataset> data_;
  CellIndex index_;
};

class BootstrapEstimator {
 public:
  BootstrapEstimator(std::shared_ptr<const Dataset> data, std::vector<Grid> grids);

  std::size_t replicates() const noexcept { return indexes_.size(); }
  const Grid& grid(std::size_t b) const noexcept { return indexes_[b].grid(); }
  const CellIndex& cells(std::size_t b) const noexcept { return indexes_[b]; }
  const Dataset& data() const noexcept { return *data_; }

 private:
  std::shared_ptr<const Dataset> data_;
  std::vector<CellIndex> indexes_;
};

/// Trains the grid with clvq_train (requires n > N) and indexes the cells.
QuantEstimator fit(const Dataset& data, const ClvqConfig& config);
QuantEstimator fit(std::shared_ptr<const Dataset> data, const ClvqConfig& config);

/// B grids from clvq_train_bootstrap; grid b is seeded with
/// derive_seed(config.seed, SeedFamily::bootstrap, b).
BootstrapEstimator fit_bootstrap(const Dataset& data, const ClvqConfig& config, std::size_t replicates);
BootstrapEstimator fit_bootstrap(std::shared_ptr<const Dataset> data, const ClvqConfig& config,
                                 std::size_t replicates);

/// Throws Errc::numerical "empty quantization cell" when x falls in a cell
/// without observations.
double predict(const QuantEstimator& est, std::span<const double> x, QuantileLevel alpha);

/// Mean of the per-grid predictions over grids whose cell of x is nonempty.
double predict_bootstrap(const BootstrapEstimator& est, std::span<const double> x, QuantileLevel alpha);

/// Predictions at every (query row, level); failures become NaN entries.
QuantileCurve predict_curve(const QuantEstimator& est, const Matrix& query,
                            std::span<const QuantileLevel> levels);
QuantileCurve predict_curve(const BootstrapEstimator& est, const Matrix& query,
                            std::span<const QuantileLevel> levels);

}  // namespace qquant
