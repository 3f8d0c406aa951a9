#include "qquant/simulation.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>

#include "qquant/competitors.hpp"
#include "qquant/estimator.hpp"
#include "qquant/normal.hpp"
#include "qquant/parallel.hpp"

namespace qquant {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::size_t cell_of(const Grid& grid, std::span<const double> x) { return nearest_index(grid.points(), x); }

std::vector<double> population_curve(const LocationScaleModel& model, const Matrix& query, QuantileLevel alpha) {
  std::vector<double> truth(query.rows());
  for (std::size_t i = 0; i < query.rows(); ++i) truth[i] = population_quantile(model, query.row(i), alpha);
  return truth;
}

std::vector<double> column(const QuantileCurve& curve, std::size_t level) {
  std::vector<double> out(curve.values.rows());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = curve.values(i, level);
  return out;
}

}  // namespace

LocationScaleModel cubic_beta_model() {
  LocationScaleModel model;
  model.name = "cubic-beta";
  model.dim = 1;
  model.m1 = [](std::span<const double> x) { return x[0] * x[0] * x[0] / 5.0; };
  model.m2 = [](std::span<const double>) { return 1.0; };
  model.sample_covariate = [](Rng& rng, std::span<double> out) {
    // Z within ~1e-16 of 0 or 1 rounds onto the boundary; keep X in the open support.
    out[0] = std::clamp(6.0 * beta(rng, 0.3, 0.3) - 3.0, std::nextafter(-3.0, 0.0), std::nextafter(3.0, 0.0));
  };
  model.sample_error = [](Rng& rng) { return standard_normal(rng); };
  model.error_quantile = [](double p) { return normal_quantile(p); };
  model.support_lo = {-3.0};
  model.support_hi = {3.0};
  return model;
}

LocationScaleModel uniform_design_model(std::size_t dim, std::function<double(std::span<const double>)> m1,
                                        std::function<double(std::span<const double>)> m2) {
  LocationScaleModel model;
  model.name = "uniform-design";
  model.dim = dim;
  model.m1 = std::move(m1);
  model.m2 = std::move(m2);
  model.sample_covariate = [](Rng& rng, std::span<double> out) {
    for (double& v : out) v = uniform01(rng);
  };
  model.sample_error = [](Rng& rng) { return standard_normal(rng); };
  model.error_quantile = [](double p) { return normal_quantile(p); };
  model.support_lo.assign(dim, 0.0);
  model.support_hi.assign(dim, 1.0);
  return model;
}

LocationScaleModel model_by_id(const std::string& id) {
  if (id == "cubic-beta") return cubic_beta_model();
  throw Error(Errc::invalid_argument, "unknown model id: " + id);
}

Matrix generate_covariates(const LocationScaleModel& model, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw Error(Errc::invalid_argument, "sample size must be at least 1");
  Rng rng(derive_seed(seed, SeedFamily::data, 0));
  Matrix x(n, model.dim);
  for (std::size_t i = 0; i < n; ++i) model.sample_covariate(rng, x.row(i));
  return x;
}

Dataset generate(const LocationScaleModel& model, std::size_t n, std::uint64_t seed) {
  Matrix x = generate_covariates(model, n, seed);
  Rng rng(derive_seed(seed, SeedFamily::data, 1));
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto xi = x.row(i);
    y[i] = model.m1(xi) + model.m2(xi) * model.sample_error(rng);
  }
  return Dataset(std::move(x), std::move(y));
}

double population_quantile(const LocationScaleModel& model, std::span<const double> x, QuantileLevel alpha) {
  if (!model.error_quantile) throw Error(Errc::invalid_argument, "error law has no quantile function");
  if (x.size() != model.dim) throw Error(Errc::invalid_argument, "dimension mismatch in population quantile");
  return model.m1(x) + model.m2(x) * model.error_quantile(alpha.value());
}

std::vector<std::optional<double>> qtilde_cells(const LocationScaleModel& model, const Grid& grid,
                                                QuantileLevel alpha, std::size_t mc_n, std::uint64_t seed) {
  if (grid.dim() != model.dim) throw Error(Errc::invalid_argument, "grid and model dimensions differ");
  const Dataset sample = generate(model, mc_n, seed);
  std::vector<std::vector<double>> cells(grid.size());
  for (std::size_t i = 0; i < sample.size(); ++i) cells[cell_of(grid, sample.x_row(i))].push_back(sample.y()[i]);
  std::vector<std::optional<double>> out(grid.size());
  for (std::size_t c = 0; c < cells.size(); ++c) {
    if (!cells[c].empty()) out[c] = sample_quantile(cells[c], alpha);
  }
  return out;
}

double approx_quantile_qtilde(const LocationScaleModel& model, const Grid& grid, std::span<const double> x,
                              QuantileLevel alpha, std::size_t mc_n, std::uint64_t seed) {
  const auto cell = project(grid, x).index;
  const auto values = qtilde_cells(model, grid, alpha, mc_n, seed);
  if (!values[cell]) throw Error(Errc::numerical, "cell has negligible mass");
  return *values[cell];
}

Matrix equispaced_open(double lo, double hi, std::size_t count) {
  if (!(lo < hi) || count == 0) throw Error(Errc::invalid_argument, "invalid query range");
  Matrix out(count, 1);
  for (std::size_t i = 0; i < count; ++i) {
    out(i, 0) = lo + (hi - lo) * static_cast<double>(i + 1) / static_cast<double>(count + 1);
  }
  return out;
}

double log_log_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw Error(Errc::invalid_argument, "slope needs at least two points");
  const auto n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

double mean_squared_second_difference(std::span<const double> values) {
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 2; i < values.size(); ++i) {
    const double d2 = values[i] - 2.0 * values[i - 1] + values[i - 2];
    if (std::isnan(d2)) continue;
    sum += d2 * d2;
    ++count;
  }
  return count == 0 ? kNaN : sum / static_cast<double>(count);
}

double curve_mse(std::span<const double> values, std::span<const double> truth) {
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (std::isnan(values[i])) continue;
    const double err = values[i] - truth[i];
    sum += err * err;
    ++count;
  }
  return count == 0 ? kNaN : sum / static_cast<double>(count);
}

ZadorTable run_rate_experiment_zador(const ZadorConfig& config) {
  if (config.grid_sizes.empty()) throw Error(Errc::invalid_argument, "no grid sizes given");
  Rng rng(derive_seed(config.seed, SeedFamily::data, 0));
  Matrix sample(config.sample_size, 1);
  for (std::size_t i = 0; i < sample.rows(); ++i) sample(i, 0) = uniform01(rng);

  ZadorTable table;
  for (std::size_t N : config.grid_sizes) {
    Grid grid = [&] {
      if (config.exact_grids) return uniform_optimal_grid(0.0, 1.0, N);
      ClvqConfig clvq = ClvqConfig::with_defaults(N, derive_seed(config.seed, SeedFamily::grid, N));
      clvq.p = config.p;
      clvq.epochs = config.epochs;
      return clvq_train(sample, clvq);
    }();
    table.rows.push_back({N, distortion(grid, sample, config.p), zador_reference_d1(config.p, N)});
  }
  if (table.rows.size() >= 2) {
    std::vector<double> xs, ys;
    for (const auto& row : table.rows) {
      xs.push_back(static_cast<double>(row.grid_size));
      ys.push_back(row.distortion);
    }
    table.slope = log_log_slope(xs, ys);
    table.slope_in_band = *table.slope >= -config.p - 0.3 && *table.slope <= -config.p + 0.3;
  }
  return table;
}

Theorem3Table run_rate_experiment_theorem3(const Theorem3Config& config) {
  if (config.grid_sizes.empty()) throw Error(Errc::invalid_argument, "no grid sizes given");
  const auto model = model_by_id(config.model);
  const Matrix train = generate_covariates(model, config.train_n, derive_seed(config.seed, SeedFamily::grid, 0));
  const Matrix eval = generate_covariates(model, config.eval_n, derive_seed(config.seed, SeedFamily::data, 0));
  const Matrix query = equispaced_open(model.support_lo[0], model.support_hi[0], config.sup_query_count);
  const auto mc_seed = derive_seed(config.seed, SeedFamily::monte_carlo, 0);

  std::vector<double> eval_truth(eval.rows());
  for (std::size_t i = 0; i < eval.rows(); ++i) eval_truth[i] = population_quantile(model, eval.row(i), config.alpha);
  const auto query_truth = population_curve(model, query, config.alpha);

  Theorem3Table table;
  table.rows.resize(config.grid_sizes.size());
  parallel_for(config.grid_sizes.size(), [&](std::size_t g) {
    const std::size_t N = config.grid_sizes[g];
    const Grid grid = clvq_train(train, ClvqConfig::with_defaults(N, derive_seed(config.seed, SeedFamily::grid, N)));
    const auto cells = qtilde_cells(model, grid, config.alpha, config.mc_n, mc_seed);

    double sq = 0.0;
    std::size_t used = 0;
    for (std::size_t i = 0; i < eval.rows(); ++i) {
      const auto& q = cells[cell_of(grid, eval.row(i))];
      if (!q) continue;
      sq += (*q - eval_truth[i]) * (*q - eval_truth[i]);
      ++used;
    }
    double sup = 0.0;
    for (std::size_t i = 0; i < query.rows(); ++i) {
      const auto& q = cells[cell_of(grid, query.row(i))];
      if (q) sup = std::max(sup, std::abs(*q - query_truth[i]));
    }
    table.rows[g] = {N, used == 0 ? kNaN : std::sqrt(sq / static_cast<double>(used)), sup};
  });
  if (table.rows.size() >= 2) {
    std::vector<double> xs, ys;
    for (const auto& row : table.rows) {
      xs.push_back(static_cast<double>(row.grid_size));
      ys.push_back(row.lp_error);
    }
    table.slope = log_log_slope(xs, ys);
  }
  return table;
}

Theorem5Table run_rate_experiment_theorem5(const Theorem5Config& config) {
  if (config.sample_sizes.empty()) throw Error(Errc::invalid_argument, "no sample sizes given");
  if (config.replications == 0) throw Error(Errc::invalid_argument, "replications must be at least 1");
  const auto model = model_by_id(config.model);
  const Matrix reference_x =
      generate_covariates(model, config.reference_n, derive_seed(config.seed, SeedFamily::grid, 0));
  const Grid reference_grid = clvq_train(
      reference_x, ClvqConfig::with_defaults(config.grid_size, derive_seed(config.seed, SeedFamily::grid, 1)));

  Theorem5Table table;
  table.reference_value = approx_quantile_qtilde(model, reference_grid, config.x, config.alpha, config.mc_n,
                                                 derive_seed(config.seed, SeedFamily::monte_carlo, 0));

  for (std::size_t s = 0; s < config.sample_sizes.size(); ++s) {
    const std::size_t n = config.sample_sizes[s];
    std::vector<double> errors(config.replications, kNaN);
    parallel_for(config.replications, [&](std::size_t r) {
      const auto rep_seed = derive_seed(derive_seed(config.seed, SeedFamily::replicate, r), s);
      const Dataset data = generate(model, n, derive_seed(rep_seed, SeedFamily::data, 0));
      const auto est =
          fit(data, ClvqConfig::with_defaults(config.grid_size, derive_seed(rep_seed, SeedFamily::grid, 0)));
      if (const auto value = est.cells().try_predict(config.x, config.alpha)) {
        errors[r] = std::abs(*value - table.reference_value);
      }
    });
    double sum = 0.0;
    std::size_t used = 0;
    for (double e : errors) {
      if (std::isnan(e)) continue;
      sum += e;
      ++used;
    }
    table.rows.push_back({n, used == 0 ? kNaN : sum / static_cast<double>(used), used});
  }
  return table;
}

ComparisonTable run_comparison_experiment(const ComparisonConfig& config) {
  if (config.replications == 0) throw Error(Errc::invalid_argument, "replications must be at least 1");
  if (config.alphas.empty()) throw Error(Errc::invalid_argument, "no quantile levels given");
  const auto model = model_by_id(config.model);
  const Matrix query = equispaced_open(model.support_lo[0], model.support_hi[0], config.query_count);
  const auto h_grid = config.h_grid.empty() ? default_h_grid() : config.h_grid;
  const auto k_grid = config.k_grid.empty() ? default_k_grid(config.sample_size) : config.k_grid;

  std::vector<std::string> names{"quant", "quant-boot", "knn", "loc-const"};
  if (config.include_local_linear) names.emplace_back("loc-lin");
  const std::size_t n_alpha = config.alphas.size();
  std::vector<std::vector<double>> truth;
  for (const auto& alpha : config.alphas) truth.push_back(population_curve(model, query, alpha));

  // mse[replication][estimator * n_alpha + level]
  std::vector<std::vector<double>> mse(config.replications, std::vector<double>(names.size() * n_alpha, kNaN));
  parallel_for(config.replications, [&](std::size_t r) {
    const auto rep_seed = derive_seed(config.seed, SeedFamily::replicate, r);
    const auto data = std::make_shared<const Dataset>(
        generate(model, config.sample_size, derive_seed(rep_seed, SeedFamily::data, 0)));
    const auto clvq = ClvqConfig::with_defaults(config.grid_size, derive_seed(rep_seed, SeedFamily::grid, 0));
    auto& out = mse[r];

    const auto quant = predict_curve(fit(data, clvq), query, config.alphas);
    const auto boot = predict_curve(fit_bootstrap(data, clvq, config.bootstrap), query, config.alphas);
    const double h_mean = select_h_mean_cv(*data, h_grid, config.folds, derive_seed(rep_seed, SeedFamily::folds, 0));

    for (std::size_t j = 0; j < n_alpha; ++j) {
      const QuantileLevel alpha = config.alphas[j];
      out[0 * n_alpha + j] = curve_mse(column(quant, j), truth[j]);
      out[1 * n_alpha + j] = curve_mse(column(boot, j), truth[j]);

      const auto truth_fn = [&](std::span<const double> x, QuantileLevel a) { return population_quantile(model, x, a); };
      const auto selection = knn_select_k(*data, truth_fn, query, alpha, k_grid);
      const KnnEstimator knn(data, selection.k);
      const std::array<QuantileLevel, 1> level{alpha};
      out[2 * n_alpha + j] = curve_mse(
          column(evaluate_curve(query, level, [&](auto x, QuantileLevel a) { return knn_predict(knn, x, a); }), 0),
          truth[j]);

      const KernelConfig kernel{yu_jones_bandwidth(h_mean, alpha)};
      out[3 * n_alpha + j] = curve_mse(
          column(evaluate_curve(query, level,
                                [&](auto x, QuantileLevel a) { return local_constant_predict(*data, kernel, x, a); }),
                 0),
          truth[j]);
      if (config.include_local_linear) {
        out[4 * n_alpha + j] = curve_mse(
            column(evaluate_curve(query, level,
                                  [&](auto x, QuantileLevel a) { return local_linear_predict(*data, kernel, x, a); }),
                   0),
            truth[j]);
      }
    }
  });

  ComparisonTable table;
  for (std::size_t e = 0; e < names.size(); ++e) {
    for (std::size_t j = 0; j < n_alpha; ++j) {
      std::vector<double> per_rep(config.replications);
      double sum = 0.0;
      std::size_t used = 0;
      for (std::size_t r = 0; r < config.replications; ++r) {
        per_rep[r] = mse[r][e * n_alpha + j];
        if (std::isnan(per_rep[r])) continue;
        sum += per_rep[r];
        ++used;
      }
      table.rows.push_back({names[e], config.alphas[j].value(), used == 0 ? kNaN : sum / static_cast<double>(used), used});
      table.per_replication.push_back(std::move(per_rep));
    }
  }
  return table;
}

std::vector<SmoothingRow> run_smoothing_experiment(const SmoothingConfig& config) {
  const auto model = model_by_id(config.model);
  const Matrix query = equispaced_open(model.support_lo[0], model.support_hi[0], config.query_count);
  const std::array<QuantileLevel, 1> level{config.alpha};
  std::vector<SmoothingRow> rows(config.replications);
  parallel_for(config.replications, [&](std::size_t r) {
    const auto rep_seed = derive_seed(config.seed, SeedFamily::replicate, r);
    const auto data = std::make_shared<const Dataset>(
        generate(model, config.sample_size, derive_seed(rep_seed, SeedFamily::data, 0)));
    const auto clvq = ClvqConfig::with_defaults(config.grid_size, derive_seed(rep_seed, SeedFamily::grid, 0));
    const auto single = predict_curve(fit(data, clvq), query, level);
    const auto boot = predict_curve(fit_bootstrap(data, clvq, config.bootstrap), query, level);
    rows[r] = {r, mean_squared_second_difference(column(single, 0)), mean_squared_second_difference(column(boot, 0))};
  });
  return rows;
}

}  // namespace qquant
