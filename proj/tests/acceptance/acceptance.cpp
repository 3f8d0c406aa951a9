// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
// criterion fails. Every experiment runs under a fixed seed.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "qquant/competitors.hpp"
#include "qquant/core.hpp"
#include "qquant/quantizer.hpp"
#include "qquant/random.hpp"
#include "qquant/simulation.hpp"
#include "support.hpp"

namespace fs = std::filesystem;
using qquant::QuantileLevel;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

struct Criterion {
  int id;
  const char* name;
  double limit_seconds;  // 0: no runtime limit
  std::function<Outcome()> run;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

Outcome uniform_grid_recovery() {
  const auto x = qqtest::uniform_column(200000, 20240601);
  const auto grid = qquant::clvq_train(x, qquant::ClvqConfig::with_defaults(5, 1));
  std::vector<double> pts(grid.points().values());
  std::sort(pts.begin(), pts.end());
  double dev = 0.0;
  for (std::size_t k = 0; k < 5; ++k) dev = std::max(dev, std::abs(pts[k] - (2.0 * k + 1.0) / 10.0));
  return {dev <= 0.03, "max deviation " + fmt("%.5f", dev) + " (limit 0.03)"};
}

Outcome zador_constant() {
  qquant::ZadorConfig c;
  c.seed = 2;
  for (std::size_t n = 4; n <= 32; ++n) c.grid_sizes.push_back(n);
  const auto band = qquant::run_rate_experiment_zador(c);
  double lo = INFINITY, hi = -INFINITY;
  bool reference_ok = true;
  for (const auto& r : band.rows) {
    const double n = static_cast<double>(r.grid_size);
    lo = std::min(lo, n * n * r.distortion);
    hi = std::max(hi, n * n * r.distortion);
    reference_ok = reference_ok && std::abs(r.predicted * 12.0 * n * n - 1.0) < 1e-12;
  }
  c.grid_sizes = {2, 4, 8, 16, 32};
  const auto rate = qquant::run_rate_experiment_zador(c);
  const double slope = *rate.slope;
  const bool pass = reference_ok && lo >= 0.85 / 12.0 && hi <= 1.15 / 12.0 && slope >= -2.3 && slope <= -1.7;
  return {pass, "N^2 D in [" + fmt("%.5f", lo) + ", " + fmt("%.5f", hi) + "] vs [" + fmt("%.5f", 0.85 / 12) + ", " +
                    fmt("%.5f", 1.15 / 12) + "], slope " + fmt("%.4f", slope)};
}

Outcome check_loss_equivalence() {
  qquant::Rng rng(3);
  int mismatches = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + qquant::uniform_index(rng, 50);
    std::vector<double> y(n);
    for (auto& v : y) v = std::round(qquant::standard_normal(rng) * 5.0) / 5.0;
    const QuantileLevel alpha(0.01 + 0.98 * qquant::uniform01(rng));
    const std::vector<double> ones(n, 1.0);
    const double expected = qqtest::definition_quantile(y, alpha.value());
    if (qquant::weighted_check_argmin(y, ones, alpha) != expected) ++mismatches;
    if (qquant::sample_quantile(y, alpha) != expected) ++mismatches;
    // Indicator weights over a random subset against the subset's quantile.
    std::vector<double> w(n), subset;
    for (std::size_t i = 0; i < n; ++i) {
      w[i] = (i == 0 || qquant::uniform01(rng) < 0.5) ? 1.0 : 0.0;
      if (w[i] > 0) subset.push_back(y[i]);
    }
    if (qquant::weighted_check_argmin(y, w, alpha) != qqtest::definition_quantile(subset, alpha.value())) ++mismatches;
  }
  return {mismatches == 0, std::to_string(mismatches) + " mismatches in 1000 samples"};
}

Outcome quantized_quantile_rate() {
  qquant::Theorem3Config c;
  c.grid_sizes = {5, 10, 20, 40};
  c.alpha = QuantileLevel(0.5);
  c.mc_n = 1000000;
  c.seed = 4;
  const auto t = qquant::run_rate_experiment_theorem3(c);
  bool decreasing = true;
  std::string errs;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    if (i > 0) decreasing = decreasing && t.rows[i].lp_error < t.rows[i - 1].lp_error;
    errs += (i ? "," : "") + fmt("%.4f", t.rows[i].lp_error);
  }
  return {decreasing && *t.slope <= -0.2,
          "L2 errors " + errs + (decreasing ? " (decreasing)" : " (not decreasing)") + ", slope " +
              fmt("%.3f", *t.slope) + " (limit -0.2)"};
}

Outcome estimator_consistency() {
  qquant::Theorem5Config c;
  c.grid_size = 10;
  c.sample_sizes = {500, 5000, 50000};
  c.replications = 20;
  c.x = {0.0};
  c.seed = 5;
  const auto t = qquant::run_rate_experiment_theorem5(c);
  bool decreasing = true;
  std::string errs;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    if (i > 0) decreasing = decreasing && t.rows[i].mean_abs_error < t.rows[i - 1].mean_abs_error;
    decreasing = decreasing && t.rows[i].replications == 20;
    errs += (i ? "," : "") + fmt("%.4f", t.rows[i].mean_abs_error);
  }
  return {decreasing, "mean |error| " + errs + " at n=500,5000,50000"};
}

Outcome bootstrap_smoothing() {
  qquant::SmoothingConfig c;
  c.seed = 6;
  const auto rows = qquant::run_smoothing_experiment(c);
  std::size_t smoother = 0;
  for (const auto& r : rows) smoother += r.roughness_bootstrap < r.roughness_single ? 1 : 0;
  return {rows.size() == 50 && smoother >= 45, "bootstrap smoother in " + std::to_string(smoother) + "/50 (need 45)"};
}

Outcome yu_jones_rule() {
  double worst = 0.0;
  for (double h : {0.05, 0.3, 1.0, 2.0}) {
    worst = std::max(worst, std::abs(qquant::yu_jones_bandwidth(h, QuantileLevel(0.5)) - std::numbers::pi / 2 * h));
    for (double a : {0.05, 0.25}) {
      worst = std::max(worst, std::abs(qquant::yu_jones_bandwidth(h, QuantileLevel(a)) -
                                       qquant::yu_jones_bandwidth(h, QuantileLevel(1.0 - a))));
    }
  }
  return {worst <= 1e-12, "max deviation " + fmt("%.3g", worst) + " (limit 1e-12)"};
}

Outcome local_linear_oracle() {
  qquant::Rng rng(8);
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 2 + qquant::uniform_index(rng, 14);
    std::vector<double> x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = 4.0 * qquant::uniform01(rng) - 2.0;
      y[i] = std::sin(2.0 * x[i]) + 0.5 * qquant::standard_normal(rng);
    }
    const qquant::Dataset d(qquant::Matrix::column(x), y);
    const double h = 0.2 + 1.5 * qquant::uniform01(rng);
    const double x0 = 3.0 * qquant::uniform01(rng) - 1.5;
    const QuantileLevel alpha(0.05 + 0.9 * qquant::uniform01(rng));
    qqtest::LineObjective f{x, y, std::vector<double>(n), x0, alpha.value()};
    for (std::size_t i = 0; i < n; ++i) f.w[i] = std::exp(-(x[i] - x0) * (x[i] - x0) / (2 * h * h));
    const auto fit = qquant::local_linear_fit(d, qquant::KernelConfig{h}, x0, alpha);
    worst = std::max(worst, std::abs(f(fit.intercept, fit.slope) - qqtest::grid_refinement_minimum(f)));
  }
  return {worst <= 1e-6, "max objective gap " + fmt("%.3g", worst) + " over 100 instances (limit 1e-6)"};
}

// FNV-1a over a file's bytes.
std::uint64_t fnv1a(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::uint64_t h = 1469598103934665603ull;
  char c;
  while (in.get(c)) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ull;
  }
  return h;
}

Outcome cli_determinism() {
  const fs::path root = fs::temp_directory_path() / "qquant_acceptance";
  fs::remove_all(root);
  const fs::path cfg = root / "zador.cfg";
  fs::create_directories(root);
  std::ofstream(cfg) << "experiment = zador\nN = 2..32\nseed = 11\nexact = false\nsample_size = 50000\n";

  const std::vector<std::vector<std::string>> commands{
      {"generate", "-n", "300", "--seed", "9", "--output", "data.csv"},
      {"quantize", "--input", "data.csv", "-N", "25", "--seed", "7", "--output", "grid.csv"},
      {"quantize", "--input", "data.csv", "-N", "25", "--seed", "7", "--resample", "--output", "grid_boot.csv"},
      {"estimate", "--input", "data.csv", "-N", "25", "-B", "10", "--seed", "3", "--knn", "30", "--kernel",
       "--output", "curve.csv"},
      {"estimate", "--input", "data.csv", "-N", "10", "--seed", "3", "--output", "curve10.csv"},
      {"simulate", "--config", cfg.string(), "--output", "zador.csv"},
      {"simulate", "--experiment", "theorem3", "--seed", "1", "--set", "N=5,10", "--set", "alpha=0.5", "--set",
       "mc_n=100000", "--set", "eval_n=10000", "--set", "train_n=50000", "--output", "rate.csv"},
      {"simulate", "--experiment", "theorem5", "--seed", "1", "--set", "N=5", "--set", "n=500,2000", "--set",
       "replications=4", "--set", "alpha=0.5", "--set", "mc_n=100000", "--set", "reference_n=50000", "--output",
       "consistency.csv"},
      {"simulate", "--experiment", "comparison", "--seed", "1", "--set", "n=150", "--set", "N=10", "--set", "B=5",
       "--set", "alpha=0.25,0.5", "--set", "replications=3", "--set", "query_count=50", "--output", "compare.csv"},
      {"simulate", "--experiment", "smoothing", "--seed", "1", "--set", "n=300", "--set", "N=25", "--set", "B=10",
       "--set", "alpha=0.5", "--set", "replications=5", "--output", "smooth.csv"},
      {"compare-plotdata", "--input", "curve.csv", "--input", "curve10.csv", "--output", "merged.csv"},
  };

  std::vector<std::vector<std::uint64_t>> hashes(2);
  std::size_t files = 0;
  for (int pass = 0; pass < 2; ++pass) {
    // Identical command lines each pass; the directory is wiped in between.
    const fs::path dir = root / "run";
    fs::remove_all(dir);
    fs::create_directories(dir);
    for (auto args : commands) {
      for (auto& a : args) {
        if (a.ends_with(".csv")) a = (dir / a).string();
      }
      std::ostringstream out, err;
      if (qquant::cli::run(args, out, err) != 0) {
        return {false, "command '" + args.front() + "' failed: " + err.str()};
      }
      const fs::path output = args[std::distance(args.begin(), std::find(args.begin(), args.end(), "--output")) + 1];
      for (const auto& p : {output, fs::path(output.string() + ".manifest.json")}) {
        hashes[pass].push_back(fnv1a(p));
        if (pass == 0) ++files;
      }
    }
  }
  fs::remove_all(root);
  const bool same = hashes[0] == hashes[1];
  return {same, std::to_string(commands.size()) + " commands, " + std::to_string(files) +
                    " files hashed twice: " + (same ? "byte-identical" : "outputs differ")};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "uniform grid recovery by CLVQ", 5, uniform_grid_recovery},
      {2, "Zador constant and distortion rate", 10, zador_constant},
      {3, "check-loss argmin equals type-1 quantile", 5, check_loss_equivalence},
      {4, "quantized quantile error decays with N", 120, quantized_quantile_rate},
      {5, "estimator converges to the quantized quantile", 120, estimator_consistency},
      {6, "bootstrap smoothing of quantile curves", 180, bootstrap_smoothing},
      {7, "Yu-Jones bandwidth rule", 1, yu_jones_rule},
      {8, "local linear solver vs brute-force oracle", 30, local_linear_oracle},
      {9, "CLI determinism", 0, cli_determinism},
  };

  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome{false, ""};
    try {
      outcome = c.run();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = c.limit_seconds == 0 || seconds < c.limit_seconds;
    const bool pass = outcome.pass && in_time;
    failures += pass ? 0 : 1;
    std::printf("[%s] criterion %d: %s: %s; %.2f s", pass ? "PASS" : "FAIL", c.id, c.name, outcome.detail.c_str(),
                seconds);
    if (c.limit_seconds > 0) std::printf(" (limit %.0f s)", c.limit_seconds);
    std::printf("\n");
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
