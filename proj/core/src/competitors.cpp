#include "qquant/competitors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>

#include "qquant/normal.hpp"
#include "qquant/random.hpp"

namespace qquant {

KnnEstimator::KnnEstimator(std::shared_ptr<const Dataset> data, std::size_t k) : data_(std::move(data)), k_(k) {
  if (k_ < 1 || k_ > data_->size()) throw Error(Errc::invalid_argument, "k must lie in [1, n]");
}

KnnEstimator::KnnEstimator(const Dataset& data, std::size_t k)
    : KnnEstimator(std::make_shared<const Dataset>(data), k) {}

std::vector<std::size_t> neighbour_order(const Dataset& data, std::span<const double> x) {
  if (x.size() != data.dim()) throw Error(Errc::invalid_argument, "dimension mismatch in neighbour search");
  std::vector<double> dist(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) dist[i] = squared_distance(data.x_row(i), x);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return dist[a] < dist[b]; });
  return order;
}

double knn_predict(const KnnEstimator& est, std::span<const double> x, QuantileLevel alpha) {
  const auto order = neighbour_order(est.data(), x);
  std::vector<double> responses(est.k());
  for (std::size_t j = 0; j < est.k(); ++j) responses[j] = est.data().y()[order[j]];
  return sample_quantile(responses, alpha);
}

KnnSelection knn_select_k(const Dataset& data, const QuantileOracle& truth, const Matrix& query,
                          QuantileLevel alpha, std::span<const std::size_t> k_grid) {
  if (k_grid.empty()) throw Error(Errc::invalid_argument, "empty k grid");
  if (query.empty()) throw Error(Errc::invalid_argument, "empty query grid");
  for (std::size_t k : k_grid) {
    if (k < 1 || k > data.size()) throw Error(Errc::invalid_argument, "k must lie in [1, n]");
  }
  KnnSelection out{k_grid.front(), std::vector<double>(k_grid.size(), 0.0)};
  std::vector<double> responses;
  for (std::size_t i = 0; i < query.rows(); ++i) {
    const auto x = query.row(i);
    const double target = truth(x, alpha);
    const auto order = neighbour_order(data, x);
    for (std::size_t g = 0; g < k_grid.size(); ++g) {
      responses.resize(k_grid[g]);
      for (std::size_t j = 0; j < k_grid[g]; ++j) responses[j] = data.y()[order[j]];
      const double err = sample_quantile(responses, alpha) - target;
      out.mse[g] += err * err;
    }
  }
  for (double& m : out.mse) m /= static_cast<double>(query.rows());
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t g = 0; g < k_grid.size(); ++g) {
    if (out.mse[g] < best || (out.mse[g] == best && k_grid[g] < out.k)) {
      best = out.mse[g];
      out.k = k_grid[g];
    }
  }
  return out;
}

std::vector<std::size_t> default_k_grid(std::size_t n) {
  std::vector<std::size_t> grid;
  for (std::size_t k = 5; k <= n / 3; k += 5) grid.push_back(k);
  if (grid.empty()) grid.push_back(1);
  return grid;
}

std::vector<double> gaussian_weights(const Dataset& data, std::span<const double> x, double h) {
  if (!(h > 0.0)) throw Error(Errc::invalid_argument, "bandwidth must be positive");
  if (x.size() != data.dim()) throw Error(Errc::invalid_argument, "dimension mismatch in kernel weights");
  std::vector<double> w(data.size());
  const double denom = 2.0 * h * h;
  for (std::size_t i = 0; i < data.size(); ++i) w[i] = std::exp(-squared_distance(data.x_row(i), x) / denom);
  return w;
}

double local_constant_predict(const Dataset& data, KernelConfig cfg, std::span<const double> x,
                              QuantileLevel alpha) {
  const auto w = gaussian_weights(data, x, cfg.h);
  if (!(std::accumulate(w.begin(), w.end(), 0.0) > 0.0)) {
    throw Error(Errc::numerical, "bandwidth too small at x");
  }
  return weighted_check_argmin(data.y(), w, alpha);
}

double local_linear_objective(std::span<const double> x, std::span<const double> y, std::span<const double> w,
                              double x0, double a, double b, QuantileLevel alpha) noexcept {
  double sum = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) sum += w[i] * check_loss(y[i] - a - b * (x[i] - x0), alpha);
  return sum;
}

namespace {

struct Breakpoint {
  double slope;
  double weight;
  std::size_t index;
};

struct LineMinimum {
  double slope;
  std::size_t pinned;
};

// Exact minimisation of b -> sum_i w_i rho_alpha(r_i - b d_i) over lines
// through observation `pin`, where r_i = y_i - y_pin and d_i = x_i - x_pin.
// Each term is |d_i| w_i rho_beta(s_i - b) with s_i = r_i / d_i and beta equal
// to alpha (d_i > 0) or 1 - alpha (d_i < 0). The right derivative at b is
// C(s <= b) - sum_i c_i beta_i, so the smallest minimiser is the first
// breakpoint where the cumulative weight reaches that target.
std::optional<LineMinimum> minimise_along_pin(std::span<const double> x, std::span<const double> y,
                                              std::span<const double> w, std::size_t pin,
                                              QuantileLevel alpha, std::vector<Breakpoint>& scratch) {
  scratch.clear();
  double target = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double d = x[i] - x[pin];
    if (d == 0.0 || w[i] == 0.0) continue;
    const double c = w[i] * std::abs(d);
    scratch.push_back({(y[i] - y[pin]) / d, c, i});
    target += c * (d > 0.0 ? alpha.value() : 1.0 - alpha.value());
  }
  if (scratch.empty()) return std::nullopt;
  std::ranges::sort(scratch, [](const Breakpoint& l, const Breakpoint& r) {
    return l.slope < r.slope || (l.slope == r.slope && l.index < r.index);
  });
  double cumulative = 0.0;
  for (const auto& bp : scratch) {
    cumulative += bp.weight;
    if (cumulative >= target) return LineMinimum{bp.slope, bp.index};
  }
  return LineMinimum{scratch.back().slope, scratch.back().index};
}

constexpr double kImprovementTolerance = 1e-10;
constexpr std::size_t kMaxLineSearches = 500;

}  // namespace

LocalLinearFit local_linear_fit(const Dataset& data, KernelConfig cfg, double x0, QuantileLevel alpha) {
  if (data.dim() != 1) throw Error(Errc::invalid_argument, "local linear estimator requires d = 1");
  const std::array<double, 1> query{x0};
  const auto all_weights = gaussian_weights(data, query, cfg.h);

  // Only observations with positive weight enter the objective.
  std::vector<double> xs, ys, ws;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (all_weights[i] > 0.0) {
      xs.push_back(data.x()(i, 0));
      ys.push_back(data.y()[i]);
      ws.push_back(all_weights[i]);
    }
  }
  if (ws.empty()) throw Error(Errc::numerical, "bandwidth too small at x");

  const double a0 = weighted_check_argmin(ys, ws, alpha);
  LocalLinearFit fit{a0, 0.0, local_linear_objective(xs, ys, ws, x0, a0, 0.0, alpha), 0, false};
  std::size_t pin = static_cast<std::size_t>(std::ranges::find(ys, a0) - ys.begin());

  std::vector<Breakpoint> scratch;
  std::size_t stalls = 0;
  while (fit.iterations < kMaxLineSearches && stalls < 2) {
    const auto line = minimise_along_pin(xs, ys, ws, pin, alpha, scratch);
    if (!line) {
      // Every weighted covariate equals x_pin: the slope is not identified.
      fit.fell_back = true;
      break;
    }
    ++fit.iterations;
    const double slope = line->slope;
    const double intercept = ys[pin] - slope * (xs[pin] - x0);
    const double objective = local_linear_objective(xs, ys, ws, x0, intercept, slope, alpha);
    const double gain = fit.objective - objective;
    stalls = gain < kImprovementTolerance * std::max(1.0, fit.objective) ? stalls + 1 : 0;
    if (objective <= fit.objective) {
      fit.intercept = intercept;
      fit.slope = slope;
      fit.objective = objective;
    }
    pin = line->pinned;
  }
  return fit;
}

double local_linear_predict(const Dataset& data, KernelConfig cfg, std::span<const double> x,
                            QuantileLevel alpha) {
  if (x.size() != 1) throw Error(Errc::invalid_argument, "local linear estimator requires d = 1");
  return local_linear_fit(data, cfg, x[0], alpha).intercept;
}

double yu_jones_bandwidth(double h_mean, QuantileLevel alpha) {
  if (!(h_mean > 0.0)) throw Error(Errc::invalid_argument, "h_mean must be positive");
  const double a = alpha.value();
  const double density = normal_pdf(normal_quantile(a));
  return a * (1.0 - a) * h_mean / (density * density);
}

double nadaraya_watson(const Dataset& data, std::span<const std::size_t> rows, std::span<const double> x,
                       double h) {
  if (rows.empty()) throw Error(Errc::invalid_argument, "Nadaraya-Watson needs at least one observation");
  // Distances are shifted by the smallest one so the largest weight is 1.
  double nearest = std::numeric_limits<double>::infinity();
  for (std::size_t i : rows) nearest = std::min(nearest, squared_distance(data.x_row(i), x));
  const double denom = 2.0 * h * h;
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i : rows) {
    const double w = std::exp(-(squared_distance(data.x_row(i), x) - nearest) / denom);
    num += w * data.y()[i];
    den += w;
  }
  return num / den;
}

std::vector<double> cv_errors(const Dataset& data, std::span<const double> h_grid, std::size_t folds,
                              std::uint64_t seed) {
  if (h_grid.empty()) throw Error(Errc::invalid_argument, "empty bandwidth grid");
  if (folds < 2) throw Error(Errc::invalid_argument, "cross-validation needs at least 2 folds");
  if (folds > data.size()) throw Error(Errc::invalid_argument, "empty folds after partition");
  for (double h : h_grid) {
    if (!(h > 0.0)) throw Error(Errc::invalid_argument, "bandwidths must be positive");
  }

  std::vector<std::size_t> perm(data.size());
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Rng rng(seed);
  for (std::size_t i = perm.size(); i > 1; --i) std::swap(perm[i - 1], perm[uniform_index(rng, i)]);
  std::vector<std::size_t> fold_of(data.size());
  for (std::size_t pos = 0; pos < perm.size(); ++pos) fold_of[perm[pos]] = pos % folds;

  std::vector<double> errors(h_grid.size(), 0.0);
  std::vector<std::size_t> train;
  for (std::size_t f = 0; f < folds; ++f) {
    train.clear();
    for (std::size_t i = 0; i < data.size(); ++i) {
      if (fold_of[i] != f) train.push_back(i);
    }
    for (std::size_t i = 0; i < data.size(); ++i) {
      if (fold_of[i] != f) continue;
      for (std::size_t g = 0; g < h_grid.size(); ++g) {
        const double err = data.y()[i] - nadaraya_watson(data, train, data.x_row(i), h_grid[g]);
        errors[g] += err * err;
      }
    }
  }
  for (double& e : errors) e /= static_cast<double>(data.size());
  return errors;
}

double select_h_mean_cv(const Dataset& data, std::span<const double> h_grid, std::size_t folds,
                        std::uint64_t seed) {
  const auto errors = cv_errors(data, h_grid, folds, seed);
  std::size_t best = 0;
  for (std::size_t g = 1; g < errors.size(); ++g) {
    if (errors[g] < errors[best] || (errors[g] == errors[best] && h_grid[g] < h_grid[best])) best = g;
  }
  return h_grid[best];
}

std::vector<double> log_spaced(double lo, double hi, std::size_t count) {
  if (!(lo > 0.0 && hi >= lo) || count == 0) throw Error(Errc::invalid_argument, "invalid log-spaced range");
  std::vector<double> out(count);
  if (count == 1) {
    out[0] = lo;
    return out;
  }
  const double step = std::log(hi / lo) / static_cast<double>(count - 1);
  for (std::size_t i = 0; i < count; ++i) out[i] = lo * std::exp(step * static_cast<double>(i));
  out.back() = hi;
  return out;
}

std::vector<double> default_h_grid() { return log_spaced(0.05, 2.0, 25); }

}  // namespace qquant
