#include "cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <memory>
#include <ostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "config.hpp"
#include "qquant/competitors.hpp"
#include "qquant/estimator.hpp"
#include "qquant/io.hpp"
#include "qquant/parallel.hpp"
#include "qquant/quantizer.hpp"
#include "qquant/random.hpp"
#include "qquant/simulation.hpp"

#ifndef QQUANT_VERSION
#define QQUANT_VERSION "unknown"
#endif

namespace qquant::cli {

namespace {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

struct CommonOptions {
  std::string input;
  std::string output;
  std::uint64_t seed = 0;
  bool timing = false;
};

/// Sidecar metadata written next to every primary output as <output>.manifest.json.
class RunManifest {
 public:
  explicit RunManifest(std::string command) : start_(std::chrono::steady_clock::now()) {
    doc_["command"] = std::move(command);
    doc_["version"] = QQUANT_VERSION;
    doc_["master_seed"] = nullptr;
    doc_["seed_families"] = Json::array();
    doc_["config"] = Json::object();
    doc_["outputs"] = Json::array();
    doc_["warnings"] = Json::object();
  }

  void seed(std::uint64_t master, std::initializer_list<SeedFamily> families) {
    doc_["master_seed"] = master;
    for (auto f : families) doc_["seed_families"].push_back(to_string(f));
  }
  Json& config() { return doc_["config"]; }
  Json& warnings() { return doc_["warnings"]; }
  void output(const fs::path& path) { doc_["outputs"].push_back(path.filename().string()); }

  void write(const fs::path& primary, bool with_timing) {
    if (with_timing) {
      doc_["timing_ms"] = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_).count();
    }
    write_file_atomically(manifest_path(primary), doc_.dump(2) + "\n");
  }

  static fs::path manifest_path(const fs::path& primary) {
    auto p = primary;
    p += ".manifest.json";
    return p;
  }

 private:
  Json doc_;
  std::chrono::steady_clock::time_point start_;
};

std::vector<QuantileLevel> parse_levels(const std::string& text) {
  std::vector<QuantileLevel> levels;
  for (double a : parse_double_list(text, "--alpha")) levels.emplace_back(a);
  return levels;
}

Json levels_json(const std::vector<QuantileLevel>& levels) {
  Json out = Json::array();
  for (const auto& l : levels) out.push_back(l.value());
  return out;
}

void require_output(const CommonOptions& opts) {
  if (opts.output.empty()) throw Error(Errc::invalid_argument, "--output is required");
}

// ---------------------------------------------------------------------------
// generate

struct GenerateOptions {
  std::string model = "cubic-beta";
  std::size_t n = 300;
};

int cmd_generate(const CommonOptions& common, const GenerateOptions& opts, std::ostream& out) {
  require_output(common);
  const auto model = model_by_id(opts.model);
  const Dataset data = generate(model, opts.n, common.seed);
  std::ostringstream csv;
  write_dataset(csv, data);
  write_file_atomically(common.output, csv.str());

  RunManifest manifest("generate");
  manifest.seed(common.seed, {SeedFamily::data});
  manifest.config()["model"] = opts.model;
  manifest.config()["n"] = opts.n;
  manifest.output(common.output);
  manifest.write(common.output, common.timing);
  out << "wrote " << data.size() << " observations to " << common.output << '\n';
  return kSuccess;
}

// ---------------------------------------------------------------------------
// quantize

struct QuantizeOptions {
  std::size_t n_points = 0;
  double p = 2.0;
  std::size_t epochs = 1;
  bool resample = false;
};

int cmd_quantize(const CommonOptions& common, const QuantizeOptions& opts, std::ostream& out) {
  require_output(common);
  if (common.input.empty()) throw Error(Errc::invalid_argument, "--input is required");
  const Dataset data = read_dataset_file(common.input);
  ClvqConfig config = ClvqConfig::with_defaults(opts.n_points, common.seed);
  config.p = opts.p;
  config.epochs = opts.epochs;
  const Grid grid = opts.resample ? clvq_train_bootstrap(data.x(), config) : clvq_train(data.x(), config);
  const Grid report = grid.dim() == 1 ? grid.sorted() : grid;

  std::ostringstream csv;
  write_grid(csv, report);
  write_file_atomically(common.output, csv.str());

  const double dist = distortion(grid, data.x(), opts.p);
  RunManifest manifest("quantize");
  manifest.seed(common.seed, {SeedFamily::grid});
  manifest.config()["input"] = common.input;
  manifest.config()["n_points"] = opts.n_points;
  manifest.config()["p"] = opts.p;
  manifest.config()["epochs"] = opts.epochs;
  manifest.config()["resample"] = opts.resample;
  manifest.config()["step_a"] = config.schedule.a();
  manifest.config()["step_b"] = config.schedule.b();
  manifest.config()["distortion"] = format_double(dist);
  if (grid.size() >= 2) manifest.config()["separation"] = format_double(grid_separation(grid));
  manifest.output(common.output);
  manifest.write(common.output, common.timing);

  out << "distortion " << format_double(dist) << '\n';
  if (grid.size() >= 2) out << "separation " << format_double(grid_separation(grid)) << '\n';
  return kSuccess;
}

// ---------------------------------------------------------------------------
// estimate

struct EstimateOptions {
  std::size_t n_points = 0;
  std::size_t bootstrap = 0;
  std::string alpha = "0.05,0.25,0.5,0.75,0.95";
  std::string query;  // "lo,hi,count"
  double p = 2.0;
  std::size_t knn_k = 0;
  bool kernel = false;
};

Matrix query_grid(const Dataset& data, const std::string& spec) {
  if (data.dim() != 1) throw Error(Errc::invalid_argument, "curve output requires one covariate");
  if (spec.empty()) {
    const auto [lo, hi] = std::ranges::minmax(data.x().values());
    if (!(lo < hi)) throw Error(Errc::invalid_argument, "covariate range is degenerate; pass --query");
    return equispaced_open(lo, hi, 300);
  }
  const auto parts = parse_double_list(spec, "--query");
  if (parts.size() != 3 || parts[2] < 1 || parts[2] != std::floor(parts[2])) {
    throw Error(Errc::invalid_argument, "--query expects lo,hi,count");
  }
  return equispaced_open(parts[0], parts[1], static_cast<std::size_t>(parts[2]));
}

int cmd_estimate(const CommonOptions& common, const EstimateOptions& opts, std::ostream& out) {
  require_output(common);
  if (common.input.empty()) throw Error(Errc::invalid_argument, "--input is required");
  const auto levels = parse_levels(opts.alpha);
  auto data = std::make_shared<const Dataset>(read_dataset_file(common.input));
  const Matrix query = query_grid(*data, opts.query);

  ClvqConfig config = ClvqConfig::with_defaults(opts.n_points, common.seed);
  config.p = opts.p;

  RunManifest manifest("estimate");
  std::ostringstream csv;
  const auto quant = predict_curve(fit(data, config), query, levels);
  write_curve(csv, quant, {"quant", opts.n_points, 0});
  std::size_t missing = quant.missing();
  manifest.warnings()["quant_missing"] = quant.missing();

  if (opts.bootstrap > 0) {
    const auto boot = predict_curve(fit_bootstrap(data, config, opts.bootstrap), query, levels);
    write_curve(csv, boot, {"quant-boot", opts.n_points, opts.bootstrap}, false);
    missing += boot.missing();
    manifest.warnings()["quant_boot_missing"] = boot.missing();
  }
  if (opts.knn_k > 0) {
    const KnnEstimator knn(data, opts.knn_k);
    const auto curve = evaluate_curve(query, levels, [&](auto x, QuantileLevel a) { return knn_predict(knn, x, a); });
    write_curve(csv, curve, {"knn", std::nullopt, std::nullopt}, false);
  }
  double h_mean = 0.0;
  if (opts.kernel) {
    h_mean = select_h_mean_cv(*data, default_h_grid(), 5, derive_seed(common.seed, SeedFamily::folds, 0));
    for (const char* name : {"loc-const", "loc-lin"}) {
      QuantileCurve curve{query, levels, Matrix(query.rows(), levels.size())};
      for (std::size_t j = 0; j < levels.size(); ++j) {
        const KernelConfig kernel{yu_jones_bandwidth(h_mean, levels[j])};
        const std::array<QuantileLevel, 1> one{levels[j]};
        const auto column = evaluate_curve(query, one, [&](auto x, QuantileLevel a) {
          return std::string_view(name) == "loc-const" ? local_constant_predict(*data, kernel, x, a)
                                                       : local_linear_predict(*data, kernel, x, a);
        });
        for (std::size_t i = 0; i < query.rows(); ++i) curve.values(i, j) = column.values(i, 0);
      }
      missing += curve.missing();
      manifest.warnings()[std::string(name) + "_missing"] = curve.missing();
      write_curve(csv, curve, {name, std::nullopt, std::nullopt}, false);
    }
  }
  write_file_atomically(common.output, csv.str());

  const auto [lo, hi] = std::ranges::minmax(data->x().values());
  std::size_t outside = 0;
  for (double q : query.values()) outside += (q < lo || q > hi) ? 1 : 0;

  manifest.seed(common.seed, {SeedFamily::grid, SeedFamily::bootstrap, SeedFamily::folds});
  manifest.config()["input"] = common.input;
  manifest.config()["n_points"] = opts.n_points;
  manifest.config()["bootstrap"] = opts.bootstrap;
  manifest.config()["alpha"] = levels_json(levels);
  manifest.config()["query_count"] = query.rows();
  manifest.config()["query_lo"] = format_double(query(0, 0));
  manifest.config()["query_hi"] = format_double(query(query.rows() - 1, 0));
  manifest.config()["p"] = opts.p;
  if (opts.knn_k > 0) manifest.config()["knn_k"] = opts.knn_k;
  if (opts.kernel) manifest.config()["h_mean"] = format_double(h_mean);
  manifest.warnings()["queries_outside_support"] = outside;
  manifest.output(common.output);
  manifest.write(common.output, common.timing);

  if (missing > 0) out << "warning: " << missing << " predictions fell in empty cells\n";
  out << "wrote curve for " << query.rows() << " query points x " << levels.size() << " levels\n";
  return kSuccess;
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateOptions {
  std::string config;
  std::string experiment;
  std::vector<std::string> overrides;
  bool seed_given = false;
};

const std::set<std::string> kCommonKeys{"experiment", "seed", "model"};

std::set<std::string> with_common(std::initializer_list<std::string> keys) {
  std::set<std::string> out(kCommonKeys);
  out.insert(keys);
  return out;
}

int cmd_simulate(const CommonOptions& common, const SimulateOptions& opts, std::ostream& out) {
  require_output(common);
  KeyValueConfig cfg = opts.config.empty() ? KeyValueConfig{} : KeyValueConfig::load(opts.config);
  for (const auto& kv : opts.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw Error(Errc::invalid_argument, "--set expects key=value");
    cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (!opts.experiment.empty()) cfg.set("experiment", opts.experiment);
  if (opts.seed_given) cfg.set("seed", std::to_string(common.seed));

  const std::string experiment = cfg.require("experiment");
  RunManifest manifest("simulate");
  std::ostringstream table;

  if (experiment == "zador") {
    cfg.check_keys(with_common({"N", "p", "exact", "sample_size", "epochs"}));
    ZadorConfig c;
    c.grid_sizes = cfg.require_size_list("N");
    c.seed = cfg.require_u64("seed");
    c.p = cfg.double_or("p", c.p);
    c.exact_grids = cfg.bool_or("exact", c.exact_grids);
    c.sample_size = cfg.size_or("sample_size", c.sample_size);
    c.epochs = cfg.size_or("epochs", c.epochs);
    const auto result = run_rate_experiment_zador(c);
    write_zador_table(table, result);
    manifest.seed(c.seed, {SeedFamily::data, SeedFamily::grid});
    if (result.slope) {
      manifest.config()["slope"] = format_double(*result.slope);
      out << "slope " << format_double(*result.slope) << (*result.slope_in_band ? " (in band)" : " (out of band)")
          << '\n';
    }
  } else if (experiment == "theorem3") {
    cfg.check_keys(with_common({"N", "alpha", "mc_n", "eval_n", "train_n", "query_count"}));
    Theorem3Config c;
    c.grid_sizes = cfg.require_size_list("N");
    c.alpha = QuantileLevel(cfg.require_double("alpha"));
    c.mc_n = cfg.require_size("mc_n");
    c.seed = cfg.require_u64("seed");
    c.model = cfg.string_or("model", c.model);
    c.eval_n = cfg.size_or("eval_n", c.eval_n);
    c.train_n = cfg.size_or("train_n", c.train_n);
    c.sup_query_count = cfg.size_or("query_count", c.sup_query_count);
    const auto result = run_rate_experiment_theorem3(c);
    write_theorem3_table(table, result);
    manifest.seed(c.seed, {SeedFamily::data, SeedFamily::grid, SeedFamily::monte_carlo});
    if (result.slope) {
      manifest.config()["slope"] = format_double(*result.slope);
      out << "slope " << format_double(*result.slope) << '\n';
    }
  } else if (experiment == "theorem5") {
    cfg.check_keys(with_common({"N", "n", "replications", "alpha", "x", "mc_n", "reference_n"}));
    Theorem5Config c;
    c.grid_size = cfg.require_size("N");
    c.sample_sizes = cfg.require_size_list("n");
    c.replications = cfg.require_size("replications");
    c.alpha = QuantileLevel(cfg.require_double("alpha"));
    c.seed = cfg.require_u64("seed");
    c.model = cfg.string_or("model", c.model);
    c.x = cfg.double_list_or("x", c.x);
    c.mc_n = cfg.size_or("mc_n", c.mc_n);
    c.reference_n = cfg.size_or("reference_n", c.reference_n);
    const auto result = run_rate_experiment_theorem5(c);
    write_theorem5_table(table, result);
    manifest.seed(c.seed, {SeedFamily::data, SeedFamily::grid, SeedFamily::monte_carlo, SeedFamily::replicate});
    manifest.config()["reference_value"] = format_double(result.reference_value);
  } else if (experiment == "comparison") {
    cfg.check_keys(with_common({"n", "N", "B", "alpha", "replications", "query_count", "folds", "local_linear",
                                "h_grid", "k_grid"}));
    ComparisonConfig c;
    c.sample_size = cfg.require_size("n");
    c.grid_size = cfg.require_size("N");
    c.bootstrap = cfg.require_size("B");
    c.alphas.clear();
    for (double a : cfg.require_double_list("alpha")) c.alphas.emplace_back(a);
    c.replications = cfg.require_size("replications");
    c.seed = cfg.require_u64("seed");
    c.model = cfg.string_or("model", c.model);
    c.query_count = cfg.size_or("query_count", c.query_count);
    c.folds = cfg.size_or("folds", c.folds);
    c.include_local_linear = cfg.bool_or("local_linear", c.include_local_linear);
    c.h_grid = cfg.double_list_or("h_grid", {});
    c.k_grid = cfg.size_list_or("k_grid", {});
    const auto result = run_comparison_experiment(c);
    write_comparison_table(table, result);
    manifest.seed(c.seed, {SeedFamily::replicate, SeedFamily::data, SeedFamily::grid, SeedFamily::bootstrap,
                           SeedFamily::folds});
  } else if (experiment == "smoothing") {
    cfg.check_keys(with_common({"n", "N", "B", "alpha", "replications", "query_count"}));
    SmoothingConfig c;
    c.sample_size = cfg.require_size("n");
    c.grid_size = cfg.require_size("N");
    c.bootstrap = cfg.require_size("B");
    c.alpha = QuantileLevel(cfg.require_double("alpha"));
    c.replications = cfg.require_size("replications");
    c.seed = cfg.require_u64("seed");
    c.model = cfg.string_or("model", c.model);
    c.query_count = cfg.size_or("query_count", c.query_count);
    const auto rows = run_smoothing_experiment(c);
    write_smoothing_table(table, rows);
    const auto smoother = std::ranges::count_if(rows, [](const SmoothingRow& r) {
      return r.roughness_bootstrap < r.roughness_single;
    });
    manifest.config()["bootstrap_smoother"] = smoother;
    manifest.seed(c.seed, {SeedFamily::replicate, SeedFamily::data, SeedFamily::grid, SeedFamily::bootstrap});
    out << "bootstrap smoother in " << smoother << " of " << rows.size() << " replications\n";
  } else {
    throw Error(Errc::invalid_argument, "unknown experiment: " + experiment);
  }

  for (const auto& [key, value] : cfg.values()) manifest.config()[key] = value;
  write_file_atomically(common.output, table.str());
  manifest.output(common.output);
  manifest.write(common.output, common.timing);
  out << "wrote " << experiment << " table to " << common.output << '\n';
  return kSuccess;
}

// ---------------------------------------------------------------------------
// compare-plotdata

const std::set<std::string> kEstimators{"quant", "quant-boot", "knn", "loc-const", "loc-lin"};

int cmd_compare_plotdata(const CommonOptions& common, const std::vector<std::string>& inputs, std::ostream& out) {
  require_output(common);
  if (inputs.empty()) throw Error(Errc::invalid_argument, "at least one --input is required");

  std::vector<std::string> reference_grid;
  std::ostringstream merged;
  merged << kCurveHeader << '\n';
  std::size_t rows = 0;
  for (const auto& path : inputs) {
    const auto table = read_csv_file(path);
    std::ostringstream header;
    for (std::size_t j = 0; j < table.header.size(); ++j) header << (j ? "," : "") << table.header[j];
    if (header.str() != kCurveHeader) {
      throw Error(Errc::invalid_argument, path + ": expected header " + std::string(kCurveHeader));
    }
    // The query grid of a file is its sequence of distinct x values in order
    // of first appearance.
    std::vector<std::string> grid;
    std::set<std::string> seen;
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
      const auto& row = table.rows[i];
      if (!parse_double(row[0]) || !parse_double(row[1])) {
        throw Error(Errc::invalid_argument,
                    path + ": line " + std::to_string(table.line_numbers[i]) + ": malformed x or alpha");
      }
      if (!kEstimators.contains(row[3])) {
        throw Error(Errc::invalid_argument,
                    path + ": line " + std::to_string(table.line_numbers[i]) + ": unknown estimator '" + row[3] + "'");
      }
      if (seen.insert(row[0]).second) grid.push_back(row[0]);
      merged << row[0] << ',' << row[1] << ',' << row[2] << ',' << row[3] << ',' << row[4] << ',' << row[5] << '\n';
      ++rows;
    }
    if (reference_grid.empty()) {
      reference_grid = std::move(grid);
    } else if (grid != reference_grid) {
      throw Error(Errc::invalid_argument, path + ": query grid does not match " + inputs.front());
    }
  }
  write_file_atomically(common.output, merged.str());

  RunManifest manifest("compare-plotdata");
  manifest.config()["inputs"] = inputs;
  manifest.config()["rows"] = rows;
  manifest.output(common.output);
  manifest.write(common.output, common.timing);
  out << "merged " << inputs.size() << " files, " << rows << " rows\n";
  return kSuccess;
}

void apply_thread_limit() {
  const char* env = std::getenv("QQ_THREADS");
  set_worker_limit(env != nullptr && *env != '\0' ? static_cast<unsigned>(parse_u64(env, "QQ_THREADS")) : 0);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Quantization-based conditional quantile estimation", "qquant"};
  app.require_subcommand(1);

  CommonOptions common;
  auto add_common = [&](CLI::App* sub, bool with_input) {
    if (with_input) sub->add_option("--input", common.input, "Input CSV file");
    sub->add_option("--output", common.output, "Output file");
    sub->add_option("--seed", common.seed, "Master seed");
    sub->add_flag("--timing", common.timing, "Record wall time in the manifest");
  };

  GenerateOptions gen;
  auto* generate_cmd = app.add_subcommand("generate", "Simulate a dataset from a built-in model");
  add_common(generate_cmd, false);
  generate_cmd->add_option("--model", gen.model, "Model id")->capture_default_str();
  generate_cmd->add_option("-n,--n", gen.n, "Sample size")->capture_default_str();

  QuantizeOptions quant;
  auto* quantize_cmd = app.add_subcommand("quantize", "Train a CLVQ grid on the covariates of a dataset");
  add_common(quantize_cmd, true);
  quantize_cmd->add_option("-N,--n-points", quant.n_points, "Grid size")->required();
  quantize_cmd->add_option("--p-norm", quant.p, "Norm exponent p >= 1")->capture_default_str();
  quantize_cmd->add_option("--epochs", quant.epochs, "Passes over the data")->capture_default_str();
  quantize_cmd->add_flag("--resample", quant.resample, "Draw initial grid and stimuli with replacement");

  EstimateOptions est;
  auto* estimate_cmd = app.add_subcommand("estimate", "Fit the quantization estimator and write quantile curves");
  add_common(estimate_cmd, true);
  estimate_cmd->add_option("-N,--n-points", est.n_points, "Grid size")->required();
  estimate_cmd->add_option("-B,--bootstrap", est.bootstrap, "Bootstrap grids (0 disables)")->capture_default_str();
  estimate_cmd->add_option("--alpha", est.alpha, "Comma-separated quantile levels")->capture_default_str();
  estimate_cmd->add_option("--query", est.query, "Query grid lo,hi,count (default: data range, 300 points)");
  estimate_cmd->add_option("--p-norm", est.p, "Norm exponent p >= 1")->capture_default_str();
  estimate_cmd->add_option("--knn", est.knn_k, "Also emit k-nearest-neighbour curves with this k");
  estimate_cmd->add_flag("--kernel", est.kernel, "Also emit local constant and local linear curves");

  SimulateOptions sim;
  auto* simulate_cmd = app.add_subcommand("simulate", "Run a seeded simulation experiment");
  add_common(simulate_cmd, false);
  simulate_cmd->add_option("--config", sim.config, "key=value config file");
  simulate_cmd->add_option("--experiment", sim.experiment, "zador | theorem3 | theorem5 | comparison | smoothing");
  simulate_cmd->add_option("--set", sim.overrides, "Override a config key (key=value)");

  std::vector<std::string> plot_inputs;
  auto* plot_cmd = app.add_subcommand("compare-plotdata", "Merge curve CSVs into one long-format file");
  plot_cmd->add_option("--input", plot_inputs, "Curve CSV (repeatable)")->required();
  plot_cmd->add_option("--output", common.output, "Merged output file");
  plot_cmd->add_flag("--timing", common.timing, "Record wall time in the manifest");

  std::vector<std::string> argv_storage{"qquant"};
  argv_storage.insert(argv_storage.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : argv_storage) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kUsageError;
  }
  sim.seed_given = simulate_cmd->count("--seed") > 0;

  try {
    apply_thread_limit();
    if (*generate_cmd) return cmd_generate(common, gen, out);
    if (*quantize_cmd) return cmd_quantize(common, quant, out);
    if (*estimate_cmd) return cmd_estimate(common, est, out);
    if (*simulate_cmd) return cmd_simulate(common, sim, out);
    if (*plot_cmd) return cmd_compare_plotdata(common, plot_inputs, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return e.code() == Errc::invalid_argument ? kUsageError : kDataPrecondition;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  }
  return kUsageError;
}

}  // namespace qquant::cli
