#include "qquant/estimator.hpp"

#include <algorithm>
#include <cmath>

#include "qquant/parallel.hpp"
#include "qquant/random.hpp"

namespace qquant {

CellIndex::CellIndex(Grid grid, const Dataset& data)
    : grid_(std::move(grid)), assignment_(assign_cells(grid_, data.x())), cells_(grid_.size()) {
  const auto y = data.y();
  for (std::size_t i = 0; i < y.size(); ++i) cells_[assignment_.indices[i]].push_back(y[i]);
  for (auto& cell : cells_) std::ranges::sort(cell);
}

std::optional<double> CellIndex::try_predict(std::span<const double> x, QuantileLevel alpha) const {
  const auto& cell = cells_[project(grid_, x).index];
  if (cell.empty()) return std::nullopt;
  return sorted_sample_quantile(cell, alpha);
}

QuantEstimator::QuantEstimator(std::shared_ptr<const Dataset> data, Grid grid)
    : data_(std::move(data)), index_(std::move(grid), *data_) {}

BootstrapEstimator::BootstrapEstimator(std::shared_ptr<const Dataset> data, std::vector<Grid> grids)
    : data_(std::move(data)) {
  if (grids.empty()) throw Error(Errc::invalid_argument, "bootstrap needs at least one grid");
  indexes_.reserve(grids.size());
  for (auto& g : grids) {
    if (g.dim() != grids.front().dim() || g.size() != grids.front().size()) {
      throw Error(Errc::invalid_argument, "bootstrap grids differ in shape");
    }
    indexes_.emplace_back(std::move(g), *data_);
  }
}

QuantEstimator fit(std::shared_ptr<const Dataset> data, const ClvqConfig& config) {
  if (data->size() <= config.n_points) {
    throw Error(Errc::data_precondition, "fit needs more observations than grid points");
  }
  Grid grid = clvq_train(data->x(), config);
  return QuantEstimator(std::move(data), std::move(grid));
}

QuantEstimator fit(const Dataset& data, const ClvqConfig& config) {
  return fit(std::make_shared<const Dataset>(data), config);
}

BootstrapEstimator fit_bootstrap(std::shared_ptr<const Dataset> data, const ClvqConfig& config,
                                 std::size_t replicates) {
  if (replicates == 0) throw Error(Errc::invalid_argument, "bootstrap replicate count must be at least 1");
  if (data->size() <= config.n_points) {
    throw Error(Errc::data_precondition, "fit needs more observations than grid points");
  }
  if (count_distinct_rows(data->x()) < config.n_points) {
    throw Error(Errc::data_precondition, "insufficient distinct support");
  }
  std::vector<std::optional<Grid>> slots(replicates);
  parallel_for(replicates, [&](std::size_t b) {
    ClvqConfig sub = config;
    sub.seed = derive_seed(config.seed, SeedFamily::bootstrap, b);
    slots[b].emplace(clvq_train_bootstrap(data->x(), sub));
  });
  std::vector<Grid> grids;
  grids.reserve(replicates);
  for (auto& slot : slots) grids.push_back(std::move(*slot));
  return BootstrapEstimator(std::move(data), std::move(grids));
}

BootstrapEstimator fit_bootstrap(const Dataset& data, const ClvqConfig& config, std::size_t replicates) {
  return fit_bootstrap(std::make_shared<const Dataset>(data), config, replicates);
}

double predict(const QuantEstimator& est, std::span<const double> x, QuantileLevel alpha) {
  const auto value = est.cells().try_predict(x, alpha);
  if (!value) throw Error(Errc::numerical, "empty quantization cell");
  return *value;
}

double predict_bootstrap(const BootstrapEstimator& est, std::span<const double> x, QuantileLevel alpha) {
  double sum = 0.0;
  std::size_t contributing = 0;
  for (std::size_t b = 0; b < est.replicates(); ++b) {
    if (const auto value = est.cells(b).try_predict(x, alpha)) {
      sum += *value;
      ++contributing;
    }
  }
  if (contributing == 0) throw Error(Errc::numerical, "empty quantization cell in every bootstrap grid");
  return sum / static_cast<double>(contributing);
}

QuantileCurve predict_curve(const QuantEstimator& est, const Matrix& query,
                            std::span<const QuantileLevel> levels) {
  return evaluate_curve(query, levels, [&](auto x, QuantileLevel a) { return predict(est, x, a); });
}

QuantileCurve predict_curve(const BootstrapEstimator& est, const Matrix& query,
                            std::span<const QuantileLevel> levels) {
  return evaluate_curve(query, levels, [&](auto x, QuantileLevel a) { return predict_bootstrap(est, x, a); });
}

}  // namespace qquant
