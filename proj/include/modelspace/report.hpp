#pragma once

// Tables, CSV and SVG output for experiment results. Numbers are written with
// std::to_chars (shortest round-trip form), so identical values always give
// identical bytes.

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "json.hpp"

namespace modelspace::report {

using Json = nlohmann::ordered_json;
using Cell = std::variant<std::int64_t, double, std::string>;

struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  /// Throws std::invalid_argument when the row width differs from columns.size().
  void add_row(std::vector<Cell> row);
  /// Throws std::out_of_range for an unknown column name.
  std::size_t column(std::string_view name) const;
  /// Numeric view of one column; strings throw std::invalid_argument.
  std::vector<double> numeric_column(std::string_view name) const;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// "inf", "-inf", "nan" for non-finite values.
std::string format_number(double x);
std::string format_cell(const Cell& c);

/// RFC 4180: header row, comma separated, CRLF line endings, fields quoted
/// when they contain a comma, quote, CR or LF.
std::string to_csv(const Table& t);

/// JSON number, or a string for non-finite values.
Json json_number(double x);

/// Writes to a temporary sibling and renames it over the target. Creates
/// parent directories. Throws IoError.
void write_atomic(const std::filesystem::path& path, std::string_view contents);

struct PlotSpec {
  std::string name;          // file stem
  std::string table;
  std::string kind = "line";  // "line" or "heatmap"
  std::string x;
  std::vector<std::string> y;  // one series per column (line)
  std::string y_axis;          // row coordinate column (heatmap)
  std::string value;           // cell value column (heatmap)
  std::string filter_column;   // optional: keep rows where this column ...
  double filter_value = 0.0;   // ... equals this value
  bool log_y = false;          // line: log10 scale; heatmap: colour by log10
  std::string title;
};

/// Standalone SVG with axes, a legend, and `metadata` embedded as JSON in a
/// <metadata> element. Throws std::invalid_argument for unknown kinds and
/// std::out_of_range for unknown columns.
std::string render_svg(const Table& t, const PlotSpec& spec, const Json& metadata);

}  // namespace modelspace::report
