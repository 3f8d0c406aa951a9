#include "qquant/io.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <system_error>

namespace qquant {

namespace {

Error csv_error(std::size_t line, const std::string& what) {
  return Error(Errc::invalid_argument, "line " + std::to_string(line) + ": " + what);
}

std::vector<std::string> split(std::string_view line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    fields.emplace_back(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::string indexed_header(std::size_t dim) {
  std::string out;
  for (std::size_t j = 0; j < dim; ++j) {
    if (j > 0) out += ',';
    out += 'x' + std::to_string(j + 1);
  }
  return out;
}

// Numeric matrix from a table; every field must be a finite number.
Matrix numeric_rows(const CsvTable& table, std::size_t first_col, std::size_t cols) {
  Matrix m(table.rows.size(), cols);
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      const auto value = parse_double(table.rows[i][first_col + j]);
      if (!value || !std::isfinite(*value)) {
        throw csv_error(table.line_numbers[i], "column " + std::to_string(first_col + j + 1) +
                                                   " is not a finite number: '" + table.rows[i][first_col + j] + "'");
      }
      m(i, j) = *value;
    }
  }
  return m;
}

std::string optional_count(const std::optional<std::size_t>& v) { return v ? std::to_string(*v) : std::string(); }

}  // namespace

std::string format_double(double value) {
  if (std::isnan(value)) return {};
  std::array<char, 64> buffer{};
  const auto result = std::to_chars(buffer.data(), buffer.data() + buffer.size(), value);
  return {buffer.data(), result.ptr};
}

std::optional<double> parse_double(std::string_view text) {
  text = trim(text);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  if (text.empty()) return std::nullopt;
  double value = 0.0;
  const auto result = std::from_chars(text.data(), text.data() + text.size(), value);
  if (result.ec != std::errc() || result.ptr != text.data() + text.size()) return std::nullopt;
  return value;
}

CsvTable read_csv(std::istream& in) {
  CsvTable table;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    const auto content = trim(line);
    if (content.empty()) continue;
    auto fields = split(content);
    for (auto& f : fields) f = std::string(trim(f));
    if (!have_header) {
      table.header = std::move(fields);
      have_header = true;
      continue;
    }
    if (fields.size() != table.header.size()) {
      throw csv_error(line_no, "expected " + std::to_string(table.header.size()) + " fields, found " +
                                   std::to_string(fields.size()));
    }
    table.rows.push_back(std::move(fields));
    table.line_numbers.push_back(line_no);
  }
  if (!have_header) throw csv_error(1, "missing header");
  return table;
}

CsvTable read_csv_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::invalid_argument, "cannot open " + path.string());
  return read_csv(in);
}

Dataset read_dataset(std::istream& in) {
  const auto table = read_csv(in);
  if (table.header.size() < 2) throw csv_error(1, "dataset header needs x1,...,xd,y");
  const std::size_t dim = table.header.size() - 1;
  if (table.header.back() != "y") throw csv_error(1, "last dataset column must be 'y'");
  if (table.rows.empty()) throw csv_error(1, "dataset has no rows");
  Matrix x = numeric_rows(table, 0, dim);
  const Matrix y = numeric_rows(table, dim, 1);
  return Dataset(std::move(x), y.values());
}

Dataset read_dataset_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::invalid_argument, "cannot open " + path.string());
  return read_dataset(in);
}

void write_dataset(std::ostream& out, const Dataset& data) {
  out << indexed_header(data.dim()) << ",y\n";
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (double v : data.x_row(i)) out << format_double(v) << ',';
    out << format_double(data.y()[i]) << '\n';
  }
}

Grid read_grid(std::istream& in) {
  const auto table = read_csv(in);
  if (table.rows.empty()) throw csv_error(1, "grid has no rows");
  return Grid(numeric_rows(table, 0, table.header.size()));
}

Grid read_grid_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::invalid_argument, "cannot open " + path.string());
  return read_grid(in);
}

void write_grid(std::ostream& out, const Grid& grid) {
  out << indexed_header(grid.dim()) << '\n';
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto p = grid.point(i);
    for (std::size_t j = 0; j < p.size(); ++j) out << (j > 0 ? "," : "") << format_double(p[j]);
    out << '\n';
  }
}

void write_curve(std::ostream& out, const QuantileCurve& curve, const CurveLabel& label, bool header) {
  if (curve.query_points.cols() != 1) throw Error(Errc::invalid_argument, "curve output requires d = 1 queries");
  if (header) out << kCurveHeader << '\n';
  const std::string tail = ',' + label.estimator + ',' + optional_count(label.grid_size) + ',' +
                           optional_count(label.bootstrap) + '\n';
  for (std::size_t i = 0; i < curve.query_points.rows(); ++i) {
    for (std::size_t j = 0; j < curve.levels.size(); ++j) {
      out << format_double(curve.query_points(i, 0)) << ',' << format_double(curve.levels[j].value()) << ','
          << format_double(curve.values(i, j)) << tail;
    }
  }
}

void write_zador_table(std::ostream& out, const ZadorTable& table) {
  out << "N,distortion,predicted,slope_flag\n";
  const std::string flag = table.slope_in_band ? (*table.slope_in_band ? "1" : "0") : "";
  for (const auto& row : table.rows) {
    out << row.grid_size << ',' << format_double(row.distortion) << ',' << format_double(row.predicted) << ','
        << flag << '\n';
  }
}

void write_theorem3_table(std::ostream& out, const Theorem3Table& table) {
  out << "N,lp_error\n";
  for (const auto& row : table.rows) out << row.grid_size << ',' << format_double(row.lp_error) << '\n';
}

void write_theorem5_table(std::ostream& out, const Theorem5Table& table) {
  out << "n,mean_abs_error,replications\n";
  for (const auto& row : table.rows) {
    out << row.sample_size << ',' << format_double(row.mean_abs_error) << ',' << row.replications << '\n';
  }
}

void write_comparison_table(std::ostream& out, const ComparisonTable& table) {
  out << "estimator,alpha,mse,replications\n";
  for (const auto& row : table.rows) {
    out << row.estimator << ',' << format_double(row.alpha) << ',' << format_double(row.mse) << ','
        << row.replications << '\n';
  }
}

void write_smoothing_table(std::ostream& out, std::span<const SmoothingRow> rows) {
  out << "replication,roughness_single,roughness_bootstrap\n";
  for (const auto& row : rows) {
    out << row.replication << ',' << format_double(row.roughness_single) << ','
        << format_double(row.roughness_bootstrap) << '\n';
  }
}

void write_file_atomically(const std::filesystem::path& path, const std::string& contents) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::invalid_argument, "cannot write " + tmp.string());
    out << contents;
    out.flush();
    if (!out) throw Error(Errc::invalid_argument, "write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error(Errc::invalid_argument, "cannot move output into place: " + path.string());
  }
}

}  // namespace qquant
