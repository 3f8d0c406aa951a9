#pragma once

// CSV formats. Numbers are written in shortest round-trip form with '.' as
// the decimal separator, independent of the locale; missing values are
// empty fields.

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qquant/core.hpp"
#include "qquant/quantizer.hpp"
#include "qquant/simulation.hpp"

namespace qquant {

/// Shortest decimal string that parses back to exactly `value`; empty for NaN.
std::string format_double(double value);

/// Full-string decimal parse; nullopt on any malformed input.
std::optional<double> parse_double(std::string_view text);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;  // 1-based source line of each row
};

/// Reads a comma-separated file with a header line. Throws Errc::invalid_argument
/// with a "line N:" prefix on ragged rows.
CsvTable read_csv(std::istream& in);
CsvTable read_csv_file(const std::filesystem::path& path);

/// Header "x1,...,xd,y".
Dataset read_dataset(std::istream& in);
Dataset read_dataset_file(const std::filesystem::path& path);
void write_dataset(std::ostream& out, const Dataset& data);

/// Header "x1,...,xd".
Grid read_grid(std::istream& in);
Grid read_grid_file(const std::filesystem::path& path);
void write_grid(std::ostream& out, const Grid& grid);

struct CurveLabel {
  std::string estimator;
  std::optional<std::size_t> grid_size;
  std::optional<std::size_t> bootstrap;
};

inline constexpr std::string_view kCurveHeader = "x,alpha,value,estimator,N,B";

/// One row per (query point, level), query-major. Requires d = 1 queries.
void write_curve(std::ostream& out, const QuantileCurve& curve, const CurveLabel& label, bool header = true);

void write_zador_table(std::ostream& out, const ZadorTable& table);
void write_theorem3_table(std::ostream& out, const Theorem3Table& table);
void write_theorem5_table(std::ostream& out, const Theorem5Table& table);
void write_comparison_table(std::ostream& out, const ComparisonTable& table);
void write_smoothing_table(std::ostream& out, std::span<const SmoothingRow> rows);

/// Writes to a sibling temporary file and renames it over `path`, so a failed
/// run never leaves a partial file behind.
void write_file_atomically(const std::filesystem::path& path, const std::string& contents);

}  // namespace qquant
